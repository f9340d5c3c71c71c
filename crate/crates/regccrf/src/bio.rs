//! Builds the regular language of valid BIO label sequences for a role
//! inventory with span-level constraints.
//!
//! The label alphabet is `O`, plus `B-r`/`I-r` per role, plus
//! `B-C-x`/`I-C-x` per continuation role. Accepted sequences are exactly
//! those where:
//!
//! * every `I` label continues an open span of the same kind,
//! * each core role opens at most one base span,
//! * a continuation span `C-x` opens only after a base span of `x` has
//!   completed (a span still open at the end of the sequence counts as
//!   completed there, and one that closes at position `i` licenses a
//!   continuation starting at `i + 1`).
//!
//! Every prefix of a valid sequence is valid, so all automaton states are
//! accepting. The result is determinized by construction and returned in
//! minimized canonical form.

use std::collections::HashMap;

use thiserror::Error;

use crate::automata::{minimize_dfa, Alphabet, AutomataError, Edge, Nfa};

#[derive(Debug, Error)]
pub enum BioError {
    #[error("role name `{0}` appears more than once")]
    DuplicateRole(String),
    #[error("continuation role `{0}` is not a declared core or non-core role")]
    UnknownContinuationBase(String),
    #[error("role names must be non-empty")]
    EmptyRoleName,
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

/// A role inventory. Core roles may span at most once per sequence,
/// non-core roles repeat freely, continuation roles name which roles may be
/// resumed after their span has closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BioSpec {
    pub core_roles: Vec<String>,
    pub noncore_roles: Vec<String>,
    pub continuation_roles: Vec<String>,
}

impl BioSpec {
    pub fn validate(&self) -> Result<(), BioError> {
        let mut seen = HashMap::new();
        for role in self.core_roles.iter().chain(&self.noncore_roles) {
            if role.is_empty() {
                return Err(BioError::EmptyRoleName);
            }
            if seen.insert(role.clone(), ()).is_some() {
                return Err(BioError::DuplicateRole(role.clone()));
            }
        }
        let mut seen_cont = HashMap::new();
        for role in &self.continuation_roles {
            if !seen.contains_key(role) {
                return Err(BioError::UnknownContinuationBase(role.clone()));
            }
            if seen_cont.insert(role.clone(), ()).is_some() {
                return Err(BioError::DuplicateRole(format!("C-{role}")));
            }
        }
        Ok(())
    }

    /// All roles in declaration order, cores first.
    fn roles(&self) -> Vec<&str> {
        self.core_roles
            .iter()
            .chain(&self.noncore_roles)
            .map(String::as_str)
            .collect()
    }

    /// Label order: `O`, then `B-r`/`I-r` per role, then `B-C-x`/`I-C-x`
    /// per continuation role.
    pub fn label_alphabet(&self) -> Result<Alphabet, BioError> {
        self.validate()?;
        let mut labels = vec!["O".to_string()];
        for role in self.roles() {
            labels.push(format!("B-{role}"));
            labels.push(format!("I-{role}"));
        }
        for role in &self.continuation_roles {
            labels.push(format!("B-C-{role}"));
            labels.push(format!("I-C-{role}"));
        }
        Ok(Alphabet::new(labels)?)
    }
}

/// A span kind: which role is open, and whether as a continuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Open {
    None,
    Base(usize),
    Continuation(usize),
}

/// Explored automaton state. `core_used` and `cont_avail` are bitsets over
/// core role indices and continuation role indices respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct BioState {
    core_used: u64,
    cont_avail: u64,
    open: Open,
}

/// Compiles the language for `spec` into its minimal DFA. Exploration stops
/// with an error if more than `state_budget` states are reached.
pub fn build_bio_nfa(spec: &BioSpec, state_budget: usize) -> Result<Nfa, BioError> {
    spec.validate()?;
    let alphabet = spec.label_alphabet()?;
    let roles = spec.roles();
    assert!(roles.len() <= 64, "role bitsets are 64 bits wide");
    let num_core = spec.core_roles.len();
    let cont_index: HashMap<usize, usize> = spec
        .continuation_roles
        .iter()
        .enumerate()
        .map(|(ci, name)| {
            let ri = roles.iter().position(|r| r == name).expect("validated");
            (ri, ci)
        })
        .collect();

    // Closing whatever span is open, which licenses continuations of the
    // closed role's base span.
    let close = |s: BioState| -> BioState {
        let mut avail = s.cont_avail;
        if let Open::Base(ri) = s.open {
            if let Some(&ci) = cont_index.get(&ri) {
                avail |= 1 << ci;
            }
        }
        BioState {
            core_used: s.core_used,
            cont_avail: avail,
            open: Open::None,
        }
    };
    let step = |s: BioState, label: usize| -> Option<BioState> {
        if label == 0 {
            return Some(close(s));
        }
        let role_labels = 2 * roles.len();
        if label <= role_labels {
            let ri = (label - 1) / 2;
            if (label - 1) % 2 == 0 {
                let mut next = close(s);
                if ri < num_core {
                    if next.core_used & (1 << ri) != 0 {
                        return None;
                    }
                    next.core_used |= 1 << ri;
                }
                next.open = Open::Base(ri);
                Some(next)
            } else {
                (s.open == Open::Base(ri)).then_some(s)
            }
        } else {
            let ci = (label - role_labels - 1) / 2;
            if (label - role_labels - 1) % 2 == 0 {
                let next = close(s);
                (next.cont_avail & (1 << ci) != 0).then_some(BioState {
                    open: Open::Continuation(ci),
                    ..next
                })
            } else {
                (s.open == Open::Continuation(ci)).then_some(s)
            }
        }
    };

    let start = BioState {
        core_used: 0,
        cont_avail: 0,
        open: Open::None,
    };
    let mut index: HashMap<BioState, usize> = HashMap::from([(start, 0)]);
    let mut queue = vec![start];
    let mut edges = Vec::new();
    let mut head = 0;
    while head < queue.len() {
        let state = queue[head];
        let from = index[&state];
        head += 1;
        for label in 0..alphabet.len() {
            let Some(next) = step(state, label) else {
                continue;
            };
            let to = match index.get(&next) {
                Some(&i) => i,
                None => {
                    if queue.len() >= state_budget {
                        return Err(BioError::Automata(AutomataError::StateBudgetExceeded {
                            budget: state_budget,
                        }));
                    }
                    let i = queue.len();
                    index.insert(next, i);
                    queue.push(next);
                    i
                }
            };
            edges.push(Edge {
                from,
                symbol: label,
                to,
            });
        }
    }
    let nfa = Nfa::new(alphabet, queue.len(), 0..queue.len(), edges)?;
    Ok(minimize_dfa(&nfa))
}
