//! DFA minimization by partition refinement.

use std::collections::HashMap;

use super::{Edge, Nfa};

/// Marker for the implicit dead state of a partial DFA.
const DEAD: usize = usize::MAX;

/// Returns the canonical minimal partial DFA for the language of `dfa`.
///
/// Useless states are dropped first, so the result has no trap state; a total
/// machine for the same language would need one extra state. States are
/// renumbered by breadth-first discovery order over the sorted alphabet, which
/// makes equal languages produce structurally equal machines.
///
/// Panics when `dfa` is not deterministic.
pub fn minimize_dfa(dfa: &Nfa) -> Nfa {
    assert!(
        dfa.is_deterministic(),
        "minimize_dfa requires a deterministic automaton"
    );
    let trimmed = dfa.trim();
    let n = trimmed.num_states();
    let num_symbols = trimmed.alphabet().len();

    // successor[q][a], with DEAD for missing transitions.
    let successor: Vec<Vec<usize>> = (0..n)
        .map(|q| {
            (0..num_symbols)
                .map(|a| {
                    trimmed
                        .transitions(q, a)
                        .first()
                        .map(|e| e.to)
                        .unwrap_or(DEAD)
                })
                .collect()
        })
        .collect();

    // Moore refinement: split blocks by (own block, successor blocks) until
    // stable. Trimming guarantees no real state is equivalent to the dead
    // state, so DEAD can stay a bare marker. Blocks are numbered in order of
    // first occurrence, so a stable partition reproduces itself exactly.
    let mut block: Vec<usize> = {
        let mut assignment = HashMap::new();
        (0..n)
            .map(|q| {
                let id = assignment.len();
                *assignment.entry(trimmed.is_accepting(q)).or_insert(id)
            })
            .collect()
    };
    loop {
        let mut assignment: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next_block = vec![0usize; n];
        for q in 0..n {
            let signature: Vec<usize> = successor[q]
                .iter()
                .map(|&s| if s == DEAD { DEAD } else { block[s] })
                .collect();
            let id = assignment.len();
            next_block[q] = *assignment.entry((block[q], signature)).or_insert(id);
        }
        if next_block == block {
            break;
        }
        block = next_block;
    }
    let num_blocks = block.iter().max().copied().unwrap_or(0) + 1;

    // Quotient machine, renumbered canonically by BFS from the start block.
    let mut representative = vec![usize::MAX; num_blocks];
    for q in 0..n {
        if representative[block[q]] == usize::MAX {
            representative[block[q]] = q;
        }
    }
    let mut order = vec![usize::MAX; num_blocks];
    let mut queue = vec![block[0]];
    order[block[0]] = 0;
    let mut discovered = 1;
    let mut head = 0;
    while head < queue.len() {
        let b = queue[head];
        head += 1;
        for a in 0..num_symbols {
            let s = successor[representative[b]][a];
            if s != DEAD && order[block[s]] == usize::MAX {
                order[block[s]] = discovered;
                discovered += 1;
                queue.push(block[s]);
            }
        }
    }
    debug_assert_eq!(discovered, num_blocks);

    let mut edges = Vec::new();
    let mut accepting = Vec::new();
    for b in 0..num_blocks {
        let q = representative[b];
        if trimmed.is_accepting(q) {
            accepting.push(order[b]);
        }
        for a in 0..num_symbols {
            let s = successor[q][a];
            if s != DEAD {
                edges.push(Edge {
                    from: order[b],
                    symbol: a,
                    to: order[block[s]],
                });
            }
        }
    }
    Nfa::new(trimmed.alphabet().clone(), num_blocks, accepting, edges).unwrap()
}
