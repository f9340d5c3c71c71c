//! Label-level parameters and exact inference under a language constraint.
//!
//! Parameters stay in label space: one transition weight per label pair and
//! one emission weight per (position, label). [`expand_scores`] broadcasts
//! them onto a [`ConstrainedTagSet`], applying the feasibility masks, after
//! which the plain CRF engine does all the work. Because every in-language
//! label sequence has exactly one feasible tag path with the same score it
//! would get without the constraint, the resulting distribution is the
//! unconstrained one restricted to the language and renormalized.

use thiserror::Error;

use crate::crf::{CrfError, TagScores, NEG_INF};
use crate::tagset::ConstrainedTagSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("label sequence `{}` is outside the constraint language", labels.join(" "))]
    OutOfLanguage { labels: Vec<String> },
    #[error("the constraint language contains no string of length {len}")]
    EmptySupport { len: usize },
    #[error("sequence length {len} exceeds the {positions}-position emission table")]
    LengthExceedsTable { len: usize, positions: usize },
}

/// Trainable parameters over labels: a transition matrix and a per-position
/// emission table. Emissions are explicit per absolute position and carry no
/// dependence on the observations; callers that do have an upstream featurizer
/// can fill the table with its scores instead.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfParams {
    num_labels: usize,
    positions: usize,
    /// Row-major `num_labels x num_labels`.
    transition: Vec<f64>,
    /// Row-major `positions x num_labels`.
    emission: Vec<f64>,
}

/// One observation sequence with its gold labels (as alphabet indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequencePair {
    pub x: Vec<String>,
    pub y: Vec<usize>,
}

/// Per-position label posteriors, rows summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMarginals {
    len: usize,
    num_labels: usize,
    probs: Vec<f64>,
}

/// Gradient with the same layout as [`CrfParams`] restricted to the first
/// `len` emission rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelGradient {
    pub len: usize,
    pub num_labels: usize,
    /// Row-major `len x num_labels`.
    pub emission: Vec<f64>,
    /// Row-major `num_labels x num_labels`.
    pub transition: Vec<f64>,
}

impl CrfParams {
    pub fn zeros(num_labels: usize, positions: usize) -> Self {
        assert!(num_labels >= 1, "need at least one label");
        Self {
            num_labels,
            positions,
            transition: vec![0.0; num_labels * num_labels],
            emission: vec![0.0; positions * num_labels],
        }
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.num_labels + to]
    }

    pub fn set_transition(&mut self, from: usize, to: usize, w: f64) {
        self.transition[from * self.num_labels + to] = w;
    }

    pub fn emission(&self, position: usize, label: usize) -> f64 {
        self.emission[position * self.num_labels + label]
    }

    pub fn set_emission(&mut self, position: usize, label: usize, w: f64) {
        self.emission[position * self.num_labels + label] = w;
    }

    pub fn transition_table(&self) -> &[f64] {
        &self.transition
    }

    pub fn emission_table(&self) -> &[f64] {
        &self.emission
    }

    pub(crate) fn transition_table_mut(&mut self) -> &mut [f64] {
        &mut self.transition
    }

    pub(crate) fn emission_table_mut(&mut self) -> &mut [f64] {
        &mut self.emission
    }

    pub fn from_tables(
        num_labels: usize,
        transition: Vec<f64>,
        emission: Vec<f64>,
    ) -> Option<Self> {
        if num_labels == 0
            || transition.len() != num_labels * num_labels
            || emission.len() % num_labels != 0
        {
            return None;
        }
        let positions = emission.len() / num_labels;
        Some(Self {
            num_labels,
            positions,
            transition,
            emission,
        })
    }

    /// Plain label-space scores for sequences of length `len`: the model with
    /// no constraint attached.
    pub fn unconstrained_scores(&self, len: usize) -> Result<TagScores, ConstraintError> {
        if len > self.positions {
            return Err(ConstraintError::LengthExceedsTable {
                len,
                positions: self.positions,
            });
        }
        let mut scores = TagScores::zeros(len, self.num_labels);
        for i in 0..len {
            for a in 0..self.num_labels {
                scores.set_emission(i, a, self.emission(i, a));
            }
        }
        for a in 0..self.num_labels {
            for b in 0..self.num_labels {
                scores.set_transition(a, b, self.transition(a, b));
            }
        }
        Ok(scores)
    }
}

/// Broadcasts label parameters onto the constrained tag space for sequences of
/// length `len`: tags score like their labels where the masks allow, and get
/// [`NEG_INF`] where they do not.
pub fn expand_scores(
    ts: &ConstrainedTagSet,
    params: &CrfParams,
    len: usize,
) -> Result<TagScores, ConstraintError> {
    assert_eq!(
        ts.num_labels(),
        params.num_labels(),
        "tag set and parameters disagree on the alphabet"
    );
    assert!(len >= 1, "constrained scores need at least one position");
    if len > params.positions() {
        return Err(ConstraintError::LengthExceedsTable {
            len,
            positions: params.positions(),
        });
    }
    let k = ts.num_tags();
    if k == 0 {
        return Err(ConstraintError::EmptySupport { len });
    }
    let mut scores = TagScores::zeros(len, k);
    for i in 0..len {
        for tag in 0..k {
            scores.set_emission(i, tag, params.emission(i, ts.label_of(tag)));
        }
    }
    for u in 0..k {
        for v in 0..k {
            let w = if ts.transition_allowed(u, v) {
                params.transition(ts.label_of(u), ts.label_of(v))
            } else {
                NEG_INF
            };
            scores.set_transition(u, v, w);
        }
        scores.set_start_allowed(u, ts.start_allowed(u));
        scores.set_end_allowed(u, ts.end_allowed(u));
    }
    Ok(scores)
}

fn empty_support(err: CrfError, len: usize) -> ConstraintError {
    match err {
        CrfError::EmptySupport | CrfError::ImpossibleSequence => {
            ConstraintError::EmptySupport { len }
        }
    }
}

/// Exact log-probability of `y` under the constrained model. Out-of-language
/// sequences are a hard error, not probability zero: callers must decide
/// whether to drop them.
pub fn constrained_log_prob(
    ts: &ConstrainedTagSet,
    params: &CrfParams,
    y: &[usize],
) -> Result<f64, ConstraintError> {
    let path = ts
        .tag_path(y)
        .ok_or_else(|| ConstraintError::OutOfLanguage {
            labels: ts.nfa().alphabet().decode(y),
        })?;
    let scores = expand_scores(ts, params, y.len())?;
    let nll = scores.nll(&path).map_err(|e| empty_support(e, y.len()))?;
    Ok(-nll)
}

/// Most probable in-language label sequence of length `len`. Fails when the
/// language has no string of that length.
pub fn constrained_viterbi(
    ts: &ConstrainedTagSet,
    params: &CrfParams,
    len: usize,
) -> Result<Vec<usize>, ConstraintError> {
    let scores = expand_scores(ts, params, len)?;
    let (tags, _) = scores.viterbi().map_err(|e| empty_support(e, len))?;
    Ok(tags.into_iter().map(|t| ts.label_of(t)).collect())
}

/// Per-position label marginals of the constrained distribution at length
/// `len`: tag marginals summed over each label's tags.
pub fn constrained_marginals(
    ts: &ConstrainedTagSet,
    params: &CrfParams,
    len: usize,
) -> Result<LabelMarginals, ConstraintError> {
    let scores = expand_scores(ts, params, len)?;
    let tag_marginals = scores.marginals().map_err(|e| empty_support(e, len))?;
    let num_labels = ts.num_labels();
    let mut probs = vec![0.0; len * num_labels];
    for i in 0..len {
        for tag in 0..ts.num_tags() {
            probs[i * num_labels + ts.label_of(tag)] += tag_marginals.unary(i, tag);
        }
    }
    Ok(LabelMarginals {
        len,
        num_labels,
        probs,
    })
}

/// Gradient of the constrained NLL of `y` with respect to the label-level
/// parameters. Tags sharing a label share parameters, so tag-level gradients
/// sum into their label cells.
pub fn nll_gradient_labelwise(
    ts: &ConstrainedTagSet,
    params: &CrfParams,
    y: &[usize],
) -> Result<LabelGradient, ConstraintError> {
    let path = ts
        .tag_path(y)
        .ok_or_else(|| ConstraintError::OutOfLanguage {
            labels: ts.nfa().alphabet().decode(y),
        })?;
    let scores = expand_scores(ts, params, y.len())?;
    let tag_grad = scores
        .nll_gradient(&path)
        .map_err(|e| empty_support(e, y.len()))?;
    let num_labels = ts.num_labels();
    let k = ts.num_tags();
    let mut emission = vec![0.0; y.len() * num_labels];
    for i in 0..y.len() {
        for tag in 0..k {
            emission[i * num_labels + ts.label_of(tag)] += tag_grad.emission[i * k + tag];
        }
    }
    let mut transition = vec![0.0; num_labels * num_labels];
    for u in 0..k {
        for v in 0..k {
            transition[ts.label_of(u) * num_labels + ts.label_of(v)] +=
                tag_grad.transition[u * k + v];
        }
    }
    Ok(LabelGradient {
        len: y.len(),
        num_labels,
        emission,
        transition,
    })
}

impl LabelMarginals {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    /// Probability of `label` at position `i`.
    pub fn prob(&self, i: usize, label: usize) -> f64 {
        self.probs[i * self.num_labels + label]
    }
}
