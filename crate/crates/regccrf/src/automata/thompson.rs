//! Translation from regex syntax trees to epsilon-free NFAs.
//!
//! The classic construction goes through an epsilon-NFA with one start and one
//! accept state per fragment. That intermediate form never escapes this
//! module: `ast_to_nfa` eliminates epsilon moves before returning.

use super::{Alphabet, AutomataError, Edge, Nfa, RegexAst};

/// Epsilon-NFA under construction. `None` as a symbol is an epsilon move.
struct EpsNfa {
    num_states: usize,
    edges: Vec<(usize, Option<usize>, usize)>,
}

struct Fragment {
    start: usize,
    accept: usize,
}

impl EpsNfa {
    fn state(&mut self) -> usize {
        self.num_states += 1;
        self.num_states - 1
    }

    fn edge(&mut self, from: usize, symbol: Option<usize>, to: usize) {
        self.edges.push((from, symbol, to));
    }

    fn fragment(&mut self, ast: &RegexAst, alphabet: &Alphabet) -> Result<Fragment, AutomataError> {
        match ast {
            RegexAst::Empty => {
                let start = self.state();
                let accept = self.state();
                self.edge(start, None, accept);
                Ok(Fragment { start, accept })
            }
            RegexAst::Symbol(name) => {
                let symbol =
                    alphabet
                        .index_of(name)
                        .ok_or_else(|| AutomataError::UnknownLabel {
                            label: name.clone(),
                        })?;
                let start = self.state();
                let accept = self.state();
                self.edge(start, Some(symbol), accept);
                Ok(Fragment { start, accept })
            }
            RegexAst::Concat(parts) => {
                let mut parts = parts.iter();
                let first = self.fragment(parts.next().expect("concat is non-empty"), alphabet)?;
                let mut accept = first.accept;
                for part in parts {
                    let next = self.fragment(part, alphabet)?;
                    self.edge(accept, None, next.start);
                    accept = next.accept;
                }
                Ok(Fragment {
                    start: first.start,
                    accept,
                })
            }
            RegexAst::Alternation(parts) => {
                let start = self.state();
                let accept = self.state();
                for part in parts {
                    let inner = self.fragment(part, alphabet)?;
                    self.edge(start, None, inner.start);
                    self.edge(inner.accept, None, accept);
                }
                Ok(Fragment { start, accept })
            }
            RegexAst::Star(c) => {
                let start = self.state();
                let accept = self.state();
                let inner = self.fragment(c, alphabet)?;
                self.edge(start, None, accept);
                self.edge(start, None, inner.start);
                self.edge(inner.accept, None, inner.start);
                self.edge(inner.accept, None, accept);
                Ok(Fragment { start, accept })
            }
            RegexAst::Plus(c) => {
                let start = self.state();
                let accept = self.state();
                let inner = self.fragment(c, alphabet)?;
                self.edge(start, None, inner.start);
                self.edge(inner.accept, None, inner.start);
                self.edge(inner.accept, None, accept);
                Ok(Fragment { start, accept })
            }
            RegexAst::Optional(c) => {
                let start = self.state();
                let accept = self.state();
                let inner = self.fragment(c, alphabet)?;
                self.edge(start, None, accept);
                self.edge(start, None, inner.start);
                self.edge(inner.accept, None, accept);
                Ok(Fragment { start, accept })
            }
            RegexAst::Repeat(c, n) => {
                if *n == 0 {
                    return self.fragment(&RegexAst::Empty, alphabet);
                }
                let mut first: Option<Fragment> = None;
                let mut accept = 0;
                for _ in 0..*n {
                    let copy = self.fragment(c, alphabet)?;
                    match &first {
                        None => {
                            accept = copy.accept;
                            first = Some(copy);
                        }
                        Some(_) => {
                            self.edge(accept, None, copy.start);
                            accept = copy.accept;
                        }
                    }
                }
                Ok(Fragment {
                    start: first.unwrap().start,
                    accept,
                })
            }
        }
    }

    fn epsilon_closure(&self, of: usize) -> Vec<usize> {
        let mut seen = vec![false; self.num_states];
        seen[of] = true;
        let mut stack = vec![of];
        while let Some(q) = stack.pop() {
            for &(from, symbol, to) in &self.edges {
                if from == q && symbol.is_none() && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        (0..self.num_states).filter(|&q| seen[q]).collect()
    }
}

/// Builds an epsilon-free NFA for `ast`, trimmable but not yet trimmed.
///
/// Fails only when the AST mentions a symbol outside `alphabet`, which cannot
/// happen for trees produced by the parser.
pub fn ast_to_nfa(ast: &RegexAst, alphabet: &Alphabet) -> Result<Nfa, AutomataError> {
    let mut eps = EpsNfa {
        num_states: 0,
        edges: Vec::new(),
    };
    let fragment = eps.fragment(ast, alphabet)?;

    // Standard elimination: q gets every symbol edge leaving the closure of q,
    // and accepts when its closure touches the accept state.
    let mut accepting = Vec::new();
    let mut edges = Vec::new();
    let closures: Vec<Vec<usize>> = (0..eps.num_states)
        .map(|q| eps.epsilon_closure(q))
        .collect();
    for q in 0..eps.num_states {
        if closures[q].contains(&fragment.accept) {
            accepting.push(q);
        }
        for &p in &closures[q] {
            for &(from, symbol, to) in &eps.edges {
                if from == p {
                    if let Some(symbol) = symbol {
                        edges.push(Edge {
                            from: q,
                            symbol,
                            to,
                        });
                    }
                }
            }
        }
    }

    // Renumber so the fragment's start state becomes state 0.
    let swap = |q: usize| {
        if q == fragment.start {
            0
        } else if q == 0 {
            fragment.start
        } else {
            q
        }
    };
    let edges = edges
        .into_iter()
        .map(|e| Edge {
            from: swap(e.from),
            symbol: e.symbol,
            to: swap(e.to),
        })
        .collect();
    let accepting: Vec<usize> = accepting.into_iter().map(swap).collect();
    Nfa::new(alphabet.clone(), eps.num_states, accepting, edges)
}
