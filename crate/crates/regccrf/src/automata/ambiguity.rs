//! Unambiguity checking via the self-product construction.
//!
//! An automaton is ambiguous exactly when some string has two distinct
//! accepting paths. Pairs of runs are runs of the product automaton, and two
//! runs differ somewhere iff the product run leaves the diagonal, so the check
//! reduces to reachability: is any off-diagonal product state both reachable
//! from `(start, start)` and able to reach an accepting pair?

use std::collections::HashMap;
use std::fmt;

use super::{Edge, Nfa};

/// Proof of ambiguity: one string together with two distinct accepting paths.
/// The string is the shortest one admitting two paths. Paths are given as
/// `(from, label, to)` triples over the source automaton's state numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityWitness {
    pub string: Vec<String>,
    pub path_a: Vec<(usize, String, usize)>,
    pub path_b: Vec<(usize, String, usize)>,
}

impl fmt::Display for AmbiguityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_path = |path: &[(usize, String, usize)]| {
            path.iter()
                .map(|(from, label, to)| format!("q{from}-{label}->q{to}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(
            f,
            "string `{}` has two accepting paths: [{}] and [{}]",
            self.string.join(" "),
            fmt_path(&self.path_a),
            fmt_path(&self.path_b)
        )
    }
}

impl std::error::Error for AmbiguityWitness {}

/// Checks that every accepted string has exactly one accepting path.
///
/// Returns a shortest witness on failure. Deterministic automata are trivially
/// unambiguous and short-circuit before the product is built.
pub fn check_unambiguous(nfa: &Nfa) -> Result<(), AmbiguityWitness> {
    if nfa.is_deterministic() {
        return Ok(());
    }

    // Breadth-first exploration of reachable product states. Parents remember
    // the pair of source edges so witness paths can be reconstructed.
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([((0, 0), 0)]);
    let mut states: Vec<(usize, usize)> = vec![(0, 0)];
    let mut parent: Vec<Option<(usize, Edge, Edge)>> = vec![None];
    let mut product_edges: Vec<(usize, usize, Edge, Edge)> = Vec::new();
    let mut head = 0;
    while head < states.len() {
        let (p, q) = states[head];
        for symbol in 0..nfa.alphabet().len() {
            for ep in nfa.transitions(p, symbol) {
                for eq in nfa.transitions(q, symbol) {
                    let key = (ep.to, eq.to);
                    let to = match index.get(&key) {
                        Some(&i) => i,
                        None => {
                            let i = states.len();
                            index.insert(key, i);
                            states.push(key);
                            parent.push(Some((head, *ep, *eq)));
                            i
                        }
                    };
                    product_edges.push((head, to, *ep, *eq));
                }
            }
        }
        head += 1;
    }

    // Forward distances follow from BFS discovery; recompute explicitly since
    // `parent` only records the discovery tree.
    let n = states.len();
    let mut dist_fwd = vec![usize::MAX; n];
    dist_fwd[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &(from, to, _, _) in &product_edges {
            if from == u && dist_fwd[to] == usize::MAX {
                dist_fwd[to] = dist_fwd[u] + 1;
                queue.push_back(to);
            }
        }
    }

    // Backward BFS from accepting pairs, remembering one shortest suffix edge.
    let mut dist_bwd = vec![usize::MAX; n];
    let mut suffix: Vec<Option<(usize, Edge, Edge)>> = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    for (i, &(p, q)) in states.iter().enumerate() {
        if nfa.is_accepting(p) && nfa.is_accepting(q) {
            dist_bwd[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(from, to, ep, eq) in &product_edges {
            if to == u && dist_bwd[from] == usize::MAX {
                dist_bwd[from] = dist_bwd[u] + 1;
                suffix[from] = Some((u, ep, eq));
                queue.push_back(from);
            }
        }
    }

    let best = (0..n)
        .filter(|&i| states[i].0 != states[i].1)
        .filter(|&i| dist_fwd[i] != usize::MAX && dist_bwd[i] != usize::MAX)
        .min_by_key(|&i| dist_fwd[i] + dist_bwd[i]);
    let Some(split) = best else {
        return Ok(());
    };

    // Prefix: walk discovery parents back to the start. The discovery tree is
    // a BFS tree, so parent chains are shortest paths.
    let mut path_a: Vec<Edge> = Vec::new();
    let mut path_b: Vec<Edge> = Vec::new();
    let mut cursor = split;
    while let Some((prev, ep, eq)) = parent[cursor] {
        path_a.push(ep);
        path_b.push(eq);
        cursor = prev;
    }
    path_a.reverse();
    path_b.reverse();
    // Suffix: follow shortest-suffix pointers to an accepting pair.
    let mut cursor = split;
    while let Some((next, ep, eq)) = suffix[cursor] {
        path_a.push(ep);
        path_b.push(eq);
        cursor = next;
    }

    debug_assert_ne!(path_a, path_b);
    let alphabet = nfa.alphabet();
    let string = path_a
        .iter()
        .map(|e| alphabet.symbol(e.symbol).to_string())
        .collect();
    let render = |path: &[Edge]| {
        path.iter()
            .map(|e| (e.from, alphabet.symbol(e.symbol).to_string(), e.to))
            .collect()
    };
    Err(AmbiguityWitness {
        string,
        path_a: render(&path_a),
        path_b: render(&path_b),
    })
}
