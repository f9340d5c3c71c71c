//! Construction of constrained tag sets from unambiguous NFAs.
//!
//! The constraint is realized by changing the tag space, not the model: each
//! tag stands for an NFA edge `(source, label, target)`, transitions between
//! tags are allowed only when the edges chain (`target == next source`), the
//! first tag must leave the start state and the last must enter an accepting
//! state. A label sequence then has exactly one feasible tag path when it is
//! in the language and none otherwise, which is what makes the construction
//! exact.
//!
//! Tags with equal `(source, label)` always score identically and can be
//! merged without changing the distribution; [`ConstrainedTagSet::reduce`]
//! performs that merge, unioning targets and masks.

use std::fmt;

use crate::automata::{check_unambiguous, AmbiguityWitness, Nfa};

/// One tag: an NFA edge, or after reduction a class of edges sharing source
/// state and label. `targets` is sorted and non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    pub source: usize,
    pub label: usize,
    pub targets: Vec<usize>,
}

/// Tag inventory plus feasibility masks for one unambiguous NFA.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedTagSet {
    nfa: Nfa,
    tags: Vec<Tag>,
    /// Row-major `num_tags x num_tags`.
    allowed_transitions: Vec<bool>,
    allowed_start: Vec<bool>,
    allowed_end: Vec<bool>,
    /// Maps an index into the NFA's sorted edge list to its tag.
    edge_to_tag: Vec<usize>,
    reduced: bool,
}

impl ConstrainedTagSet {
    /// Builds the edge-form tag set: one tag per NFA edge, in the canonical
    /// edge order. Fails with a witness when the NFA is ambiguous, since a
    /// label sequence with two accepting paths would get probability mass
    /// counted twice.
    pub fn build(nfa: Nfa) -> Result<Self, AmbiguityWitness> {
        check_unambiguous(&nfa)?;
        let tags: Vec<Tag> = nfa
            .edges()
            .iter()
            .map(|e| Tag {
                source: e.from,
                label: e.symbol,
                targets: vec![e.to],
            })
            .collect();
        let edge_to_tag = (0..tags.len()).collect();
        Ok(Self::assemble(nfa, tags, edge_to_tag, false))
    }

    /// Merges tags with equal `(source, label)` into classes. Mask bits are
    /// unions over class members, so every feasible tag path of the edge form
    /// maps to a feasible class path with the same score and vice versa; the
    /// constrained distribution is unchanged. Idempotent.
    pub fn reduce(&self) -> Self {
        let mut classes: Vec<Tag> = Vec::new();
        let mut class_of_tag = vec![0usize; self.tags.len()];
        for (i, tag) in self.tags.iter().enumerate() {
            // Tags are sorted by (source, label), so class members are
            // adjacent and classes inherit the canonical order.
            match classes.last_mut() {
                Some(last) if last.source == tag.source && last.label == tag.label => {
                    last.targets.extend(tag.targets.iter().copied());
                    class_of_tag[i] = classes.len() - 1;
                }
                _ => {
                    class_of_tag[i] = classes.len();
                    classes.push(tag.clone());
                }
            }
        }
        for class in &mut classes {
            class.targets.sort_unstable();
            class.targets.dedup();
        }
        let edge_to_tag = self.edge_to_tag.iter().map(|&t| class_of_tag[t]).collect();
        Self::assemble(self.nfa.clone(), classes, edge_to_tag, true)
    }

    fn assemble(nfa: Nfa, tags: Vec<Tag>, edge_to_tag: Vec<usize>, reduced: bool) -> Self {
        let k = tags.len();
        let mut allowed_transitions = vec![false; k * k];
        for (u, from) in tags.iter().enumerate() {
            for (v, to) in tags.iter().enumerate() {
                allowed_transitions[u * k + v] = from.targets.contains(&to.source);
            }
        }
        let allowed_start = tags.iter().map(|t| t.source == 0).collect();
        let allowed_end = tags
            .iter()
            .map(|t| t.targets.iter().any(|&q| nfa.is_accepting(q)))
            .collect();
        Self {
            nfa,
            tags,
            allowed_transitions,
            allowed_start,
            allowed_end,
            edge_to_tag,
            reduced,
        }
    }

    pub fn nfa(&self) -> &Nfa {
        &self.nfa
    }

    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn num_labels(&self) -> usize {
        self.nfa.alphabet().len()
    }

    pub fn tag(&self, i: usize) -> &Tag {
        &self.tags[i]
    }

    pub fn label_of(&self, tag: usize) -> usize {
        self.tags[tag].label
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn transition_allowed(&self, from: usize, to: usize) -> bool {
        self.allowed_transitions[from * self.tags.len() + to]
    }

    pub fn start_allowed(&self, tag: usize) -> bool {
        self.allowed_start[tag]
    }

    pub fn end_allowed(&self, tag: usize) -> bool {
        self.allowed_end[tag]
    }

    /// The unique feasible tag path for `y`, or `None` when `y` is not in the
    /// language.
    pub fn tag_path(&self, y: &[usize]) -> Option<Vec<usize>> {
        let path = self.nfa.accepting_path(y)?;
        Some(path.into_iter().map(|e| self.edge_to_tag[e]).collect())
    }

    /// Human-readable rendering of a tag, e.g. `q0-B->q1`.
    pub fn describe(&self, tag: usize) -> String {
        let t = &self.tags[tag];
        let label = self.nfa.alphabet().symbol(t.label);
        match t.targets.as_slice() {
            [single] => format!("q{}-{}->q{}", t.source, label, single),
            many => format!(
                "q{}-{}->{{{}}}",
                t.source,
                label,
                many.iter()
                    .map(|q| format!("q{q}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        }
    }
}

impl fmt::Display for ConstrainedTagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} tags ({}) over {} labels:",
            self.num_tags(),
            if self.reduced {
                "class-reduced"
            } else {
                "edge form"
            },
            self.num_labels()
        )?;
        for i in 0..self.num_tags() {
            writeln!(f, "  y'{}: {}", i, self.describe(i))?;
        }
        Ok(())
    }
}
