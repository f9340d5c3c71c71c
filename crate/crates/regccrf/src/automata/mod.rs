//! Finite automata over label alphabets.
//!
//! Everything here works with a single epsilon-free NFA representation: states
//! are `0..num_states` with state `0` as the unique start state, and edges are
//! `(from, symbol, to)` triples kept sorted lexicographically. Construction
//! from a regular expression, determinization, minimization and the
//! unambiguity check live in submodules; this module owns the shared types and
//! the basic language operations (membership, path recovery, enumeration).

use std::collections::HashMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

mod ambiguity;
mod determinize;
mod minimize;
mod regex;
mod thompson;

pub use ambiguity::{check_unambiguous, AmbiguityWitness};
pub use determinize::determinize;
pub use minimize::minimize_dfa;
pub use regex::{parse_regex, ParseError, RegexAst};
pub use thompson::ast_to_nfa;

/// Default cap on the number of states determinization may create.
pub const DEFAULT_STATE_BUDGET: usize = 100_000;

/// Cap on the number of string prefixes language enumeration may explore.
const ENUMERATION_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error("unknown label `{label}`")]
    UnknownLabel { label: String },
    #[error("state budget exceeded: construction needs more than {budget} states")]
    StateBudgetExceeded { budget: usize },
    #[error("enumeration budget exceeded after {visited} prefixes")]
    EnumerationBudgetExceeded { visited: usize },
}

/// An ordered set of symbol names. Symbol identity is positional: all label
/// sequences elsewhere in the crate are indices into an `Alphabet`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, AutomataError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(AutomataError::Malformed("empty symbol name".into()));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(AutomataError::Malformed(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Self { symbols, index })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Maps label names to indices, failing on the first unknown name.
    pub fn encode<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>, AutomataError> {
        labels
            .iter()
            .map(|l| {
                self.index_of(l.as_ref())
                    .ok_or(AutomataError::UnknownLabel {
                        label: l.as_ref().to_string(),
                    })
            })
            .collect()
    }

    pub fn decode(&self, indices: &[usize]) -> Vec<String> {
        indices.iter().map(|&i| self.symbols[i].clone()).collect()
    }
}

/// A labelled transition. The derived ordering is the canonical edge order
/// used everywhere: `(from, symbol, to)` lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub symbol: usize,
    pub to: usize,
}

/// An epsilon-free NFA with start state `0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    alphabet: Alphabet,
    num_states: usize,
    accepting: Vec<bool>,
    edges: Vec<Edge>,
}

impl Nfa {
    pub fn new(
        alphabet: Alphabet,
        num_states: usize,
        accepting: impl IntoIterator<Item = usize>,
        mut edges: Vec<Edge>,
    ) -> Result<Self, AutomataError> {
        if num_states == 0 {
            return Err(AutomataError::Malformed(
                "an automaton needs at least the start state".into(),
            ));
        }
        let mut accept_flags = vec![false; num_states];
        for q in accepting {
            if q >= num_states {
                return Err(AutomataError::Malformed(format!(
                    "accepting state {q} out of range (num_states = {num_states})"
                )));
            }
            accept_flags[q] = true;
        }
        for e in &edges {
            if e.from >= num_states || e.to >= num_states {
                return Err(AutomataError::Malformed(format!(
                    "edge ({}, {}, {}) references a state out of range",
                    e.from, e.symbol, e.to
                )));
            }
            if e.symbol >= alphabet.len() {
                return Err(AutomataError::Malformed(format!(
                    "edge ({}, {}, {}) references a symbol out of range",
                    e.from, e.symbol, e.to
                )));
            }
        }
        edges.sort();
        edges.dedup();
        Ok(Self {
            alphabet,
            num_states,
            accepting: accept_flags,
            edges,
        })
    }

    /// Convenience constructor with symbols given by name.
    pub fn from_named_edges(
        alphabet: Alphabet,
        num_states: usize,
        accepting: impl IntoIterator<Item = usize>,
        edges: &[(usize, &str, usize)],
    ) -> Result<Self, AutomataError> {
        let resolved = edges
            .iter()
            .map(|&(from, name, to)| {
                alphabet
                    .index_of(name)
                    .map(|symbol| Edge { from, symbol, to })
                    .ok_or(AutomataError::UnknownLabel {
                        label: name.to_string(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(alphabet, num_states, accepting, resolved)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.num_states)
            .filter(|&q| self.accepting[q])
            .collect()
    }

    /// Index of `edge` in the canonical edge order.
    pub fn edge_index(&self, edge: Edge) -> Option<usize> {
        self.edges.binary_search(&edge).ok()
    }

    /// Edges leaving `state` on `symbol`, as a slice of the sorted edge list.
    pub fn transitions(&self, state: usize, symbol: usize) -> &[Edge] {
        let lo = self
            .edges
            .partition_point(|e| (e.from, e.symbol) < (state, symbol));
        let hi = self
            .edges
            .partition_point(|e| (e.from, e.symbol) <= (state, symbol));
        &self.edges[lo..hi]
    }

    /// True when no state has two outgoing edges with the same symbol.
    pub fn is_deterministic(&self) -> bool {
        self.edges
            .windows(2)
            .all(|w| (w[0].from, w[0].symbol) != (w[1].from, w[1].symbol))
    }

    pub fn accepts(&self, string: &[usize]) -> bool {
        let mut current = vec![false; self.num_states];
        current[0] = true;
        for &symbol in string {
            if symbol >= self.alphabet.len() {
                return false;
            }
            let mut next = vec![false; self.num_states];
            let mut any = false;
            for (q, &live) in current.iter().enumerate() {
                if live {
                    for e in self.transitions(q, symbol) {
                        next[e.to] = true;
                        any = true;
                    }
                }
            }
            if !any {
                return false;
            }
            current = next;
        }
        current
            .iter()
            .enumerate()
            .any(|(q, &live)| live && self.accepting[q])
    }

    pub fn accepts_labels<S: AsRef<str>>(&self, labels: &[S]) -> bool {
        match self.alphabet.encode(labels) {
            Ok(string) => self.accepts(&string),
            Err(_) => false,
        }
    }

    /// The accepting path for `string` as edge indices, if one exists.
    ///
    /// When the automaton is unambiguous the path is unique; otherwise the
    /// lexicographically least viable successor is taken at each step.
    pub fn accepting_path(&self, string: &[usize]) -> Option<Vec<usize>> {
        let t = string.len();
        // viable[i][q]: the suffix string[i..] can reach acceptance from q.
        let mut viable = vec![vec![false; self.num_states]; t + 1];
        viable[t].clone_from(&self.accepting);
        for i in (0..t).rev() {
            let symbol = string[i];
            if symbol >= self.alphabet.len() {
                return None;
            }
            for q in 0..self.num_states {
                viable[i][q] = self
                    .transitions(q, symbol)
                    .iter()
                    .any(|e| viable[i + 1][e.to]);
            }
        }
        if !viable[0][0] {
            return None;
        }
        let mut path = Vec::with_capacity(t);
        let mut state = 0;
        for (i, &symbol) in string.iter().enumerate() {
            let edge = self
                .transitions(state, symbol)
                .iter()
                .find(|e| viable[i + 1][e.to])
                .copied()
                .expect("a viable state always has a viable successor");
            path.push(self.edge_index(edge).unwrap());
            state = edge.to;
        }
        Some(path)
    }

    /// All accepted strings of length at most `max_len`, sorted by length and
    /// then lexicographically by symbol index.
    pub fn enumerate_language(&self, max_len: usize) -> Result<Vec<Vec<usize>>, AutomataError> {
        let mut accepted = Vec::new();
        let start_set = {
            let mut s = vec![false; self.num_states];
            s[0] = true;
            s
        };
        let mut frontier: Vec<(Vec<usize>, Vec<bool>)> = vec![(Vec::new(), start_set)];
        let mut visited = 1usize;
        for len in 0..=max_len {
            for (prefix, states) in &frontier {
                debug_assert_eq!(prefix.len(), len);
                if states
                    .iter()
                    .enumerate()
                    .any(|(q, &live)| live && self.accepting[q])
                {
                    accepted.push(prefix.clone());
                }
            }
            if len == max_len {
                break;
            }
            let mut next_frontier = Vec::new();
            for (prefix, states) in &frontier {
                for symbol in 0..self.alphabet.len() {
                    let mut next = vec![false; self.num_states];
                    let mut any = false;
                    for (q, &live) in states.iter().enumerate() {
                        if live {
                            for e in self.transitions(q, symbol) {
                                next[e.to] = true;
                                any = true;
                            }
                        }
                    }
                    if any {
                        visited += 1;
                        if visited > ENUMERATION_BUDGET {
                            return Err(AutomataError::EnumerationBudgetExceeded { visited });
                        }
                        let mut extended = prefix.clone();
                        extended.push(symbol);
                        next_frontier.push((extended, next));
                    }
                }
            }
            frontier = next_frontier;
        }
        Ok(accepted)
    }

    /// Restriction to useful states: reachable from the start and able to
    /// reach an accepting state. State numbering keeps the original relative
    /// order, so the start state stays `0`. An automaton with the empty
    /// language collapses to a single non-accepting start state.
    pub fn trim(&self) -> Nfa {
        let mut reachable = vec![false; self.num_states];
        reachable[0] = true;
        let mut stack = vec![0];
        while let Some(q) = stack.pop() {
            let lo = self.edges.partition_point(|e| e.from < q);
            for e in &self.edges[lo..] {
                if e.from != q {
                    break;
                }
                if !reachable[e.to] {
                    reachable[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        let mut coreachable = self.accepting.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for e in &self.edges {
                if coreachable[e.to] && !coreachable[e.from] {
                    coreachable[e.from] = true;
                    changed = true;
                }
            }
        }
        let useful: Vec<bool> = (0..self.num_states)
            .map(|q| reachable[q] && coreachable[q])
            .collect();
        if !useful[0] {
            return Nfa::new(self.alphabet.clone(), 1, [], Vec::new()).unwrap();
        }
        let mut renumber = vec![usize::MAX; self.num_states];
        let mut count = 0;
        for (q, &keep) in useful.iter().enumerate() {
            if keep {
                renumber[q] = count;
                count += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| useful[e.from] && useful[e.to])
            .map(|e| Edge {
                from: renumber[e.from],
                symbol: e.symbol,
                to: renumber[e.to],
            })
            .collect();
        let accepting = (0..self.num_states)
            .filter(|&q| useful[q] && self.accepting[q])
            .map(|q| renumber[q]);
        Nfa::new(self.alphabet.clone(), count, accepting, edges).unwrap()
    }
}

impl fmt::Display for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "nfa: {} states, {} edges, accepting {:?}",
            self.num_states,
            self.edges.len(),
            self.accepting_states()
        )?;
        for e in &self.edges {
            writeln!(
                f,
                "  q{} -{}-> q{}",
                e.from,
                self.alphabet.symbol(e.symbol),
                e.to
            )?;
        }
        Ok(())
    }
}

/// Compiles a regular expression into a trimmed epsilon-free NFA. The result
/// is generally ambiguous; see [`compile_regex`] for the deterministic route.
pub fn regex_to_nfa(source: &str, alphabet: &Alphabet) -> Result<Nfa, AutomataError> {
    let ast = parse_regex(source, alphabet)?;
    Ok(ast_to_nfa(&ast, alphabet)?.trim())
}

/// Compiles a regular expression into the canonical minimal DFA for its
/// language: parse, translate, determinize (subject to `state_budget`),
/// minimize.
pub fn compile_regex(
    source: &str,
    alphabet: &Alphabet,
    state_budget: usize,
) -> Result<Nfa, AutomataError> {
    let nfa = regex_to_nfa(source, alphabet)?;
    Ok(minimize_dfa(&determinize(&nfa, state_budget)?))
}

/// Returns an unambiguous automaton for the language of `nfa`: the input
/// itself when it already is unambiguous, otherwise its minimal DFA.
pub fn ensure_unambiguous(nfa: &Nfa, state_budget: usize) -> Result<Nfa, AutomataError> {
    if check_unambiguous(nfa).is_ok() {
        Ok(nfa.clone())
    } else {
        Ok(minimize_dfa(&determinize(nfa, state_budget)?))
    }
}

#[derive(Serialize, Deserialize)]
struct NfaJson {
    alphabet: Vec<String>,
    num_states: usize,
    accepting: Vec<usize>,
    edges: Vec<(usize, String, usize)>,
}

impl Serialize for Nfa {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        NfaJson {
            alphabet: self.alphabet.symbols.clone(),
            num_states: self.num_states,
            accepting: self.accepting_states(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.from, self.alphabet.symbol(e.symbol).to_string(), e.to))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Nfa {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = NfaJson::deserialize(deserializer)?;
        let alphabet = Alphabet::new(raw.alphabet).map_err(D::Error::custom)?;
        let edges = raw
            .edges
            .iter()
            .map(|(from, name, to)| {
                alphabet
                    .index_of(name)
                    .map(|symbol| Edge {
                        from: *from,
                        symbol,
                        to: *to,
                    })
                    .ok_or_else(|| {
                        D::Error::custom(format!("edge symbol `{name}` is not in the alphabet"))
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Nfa::new(alphabet, raw.num_states, raw.accepting, edges).map_err(D::Error::custom)
    }
}
