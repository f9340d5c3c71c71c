//! Linear-chain CRFs whose output space is constrained to a regular language.
//!
//! The pieces fit together like this:
//!
//! * [`automata`] builds and manipulates epsilon-free NFAs over a label
//!   alphabet, including regex compilation, determinization, minimization and
//!   an exact unambiguity check.
//! * [`crf`] is a plain log-space linear-chain CRF engine over an abstract tag
//!   set: partition function, marginals, Viterbi and analytic NLL gradients.
//! * [`tagset`] turns an unambiguous NFA into a constrained tag set whose tags
//!   are NFA edges (or merged edge classes), with transition and boundary
//!   masks that make exactly the in-language label sequences feasible.
//! * [`constrained`] scores label sequences under label-level parameters
//!   expanded onto the constrained tag set: exact constrained probabilities,
//!   marginals, Viterbi decoding and label-level gradients.
//! * [`train`] fits parameters by SGD against a finite data distribution and
//!   evaluates exact cross-entropies, with or without the constraint applied
//!   during training.
//! * [`experiments`] contains the two synthetic studies exposed by the CLI,
//!   with their closed-form reference values.
//! * [`bio`] builds BIO-style span-role languages with role constraints.

#![allow(clippy::manual_is_multiple_of)]
#![allow(clippy::needless_range_loop)]

pub mod automata;
pub mod bio;
pub mod constrained;
pub mod crf;
pub mod experiments;
pub mod model;
pub mod tagset;
pub mod train;

pub use bio::{build_bio_nfa, BioError, BioSpec};

pub use automata::{Alphabet, AutomataError, Edge, Nfa};
pub use constrained::{
    constrained_log_prob, constrained_marginals, constrained_viterbi, expand_scores,
    ConstraintError, CrfParams, LabelGradient, LabelMarginals, LabeledSequencePair,
};
pub use crf::{CrfError, TagMarginals, TagScores};
pub use model::{Model, ModelError};
pub use tagset::{ConstrainedTagSet, Tag};
pub use train::{
    evaluate_cross_entropy, run_regimens, sample, train_constrained, train_unconstrained,
    DataDistribution, ModelRef, Regimen, RegimenResult, RegimenSet, TrainConfig, TrainError,
    WeightedPair,
};
