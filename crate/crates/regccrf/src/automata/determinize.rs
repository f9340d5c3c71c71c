//! Subset-construction determinization.

use std::collections::HashMap;

use super::{AutomataError, Edge, Nfa};

/// Builds a deterministic automaton for the language of `nfa`.
///
/// Only subsets reachable from the start are materialized. Construction stops
/// with [`AutomataError::StateBudgetExceeded`] as soon as more than
/// `state_budget` subset states exist; the worst case is exponential in the
/// input state count.
pub fn determinize(nfa: &Nfa, state_budget: usize) -> Result<Nfa, AutomataError> {
    if state_budget == 0 {
        return Err(AutomataError::StateBudgetExceeded { budget: 0 });
    }
    let num_symbols = nfa.alphabet().len();
    let mut subsets: Vec<Vec<usize>> = vec![vec![0]];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(vec![0], 0)]);
    let mut edges = Vec::new();
    let mut accepting = Vec::new();

    let mut next = 0;
    while next < subsets.len() {
        let subset = subsets[next].clone();
        if subset.iter().any(|&q| nfa.is_accepting(q)) {
            accepting.push(next);
        }
        for symbol in 0..num_symbols {
            let mut seen = vec![false; nfa.num_states()];
            for &q in &subset {
                for e in nfa.transitions(q, symbol) {
                    seen[e.to] = true;
                }
            }
            let successor: Vec<usize> = (0..nfa.num_states()).filter(|&q| seen[q]).collect();
            if successor.is_empty() {
                continue;
            }
            let to = match index.get(&successor) {
                Some(&i) => i,
                None => {
                    let i = subsets.len();
                    if i >= state_budget {
                        return Err(AutomataError::StateBudgetExceeded {
                            budget: state_budget,
                        });
                    }
                    index.insert(successor.clone(), i);
                    subsets.push(successor);
                    i
                }
            };
            edges.push(Edge {
                from: next,
                symbol,
                to,
            });
        }
        next += 1;
    }

    Nfa::new(nfa.alphabet().clone(), subsets.len(), accepting, edges)
}
