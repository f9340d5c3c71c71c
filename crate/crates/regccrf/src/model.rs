//! Model files: an NFA plus label-level parameters, as versioned JSON.
//!
//! The file holds everything needed to reconstruct a working model: the
//! automaton (in the shared NFA format), the ordered label alphabet, the
//! transition matrix, the per-position emission table, and whether tag classes
//! were merged. The tag set itself is rebuilt deterministically on load.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::Nfa;
use crate::constrained::CrfParams;
use crate::tagset::ConstrainedTagSet;

pub const MODEL_VERSION: &str = "regccrf-v1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model version `{found}` (expected `{MODEL_VERSION}`)")]
    Version { found: String },
    #[error("model file is inconsistent: {0}")]
    Inconsistent(String),
}

/// A ready-to-use model: tag set plus parameters.
#[derive(Debug, Clone)]
pub struct Model {
    pub tag_set: ConstrainedTagSet,
    pub params: CrfParams,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    version: String,
    nfa: Nfa,
    alphabet: Vec<String>,
    class_reduction: bool,
    /// `num_labels x num_labels`, row per source label.
    transition: Vec<Vec<f64>>,
    /// One row per position, `num_labels` wide. Empty for untrained models.
    emission: Vec<Vec<f64>>,
}

impl Model {
    pub fn new(tag_set: ConstrainedTagSet, params: CrfParams) -> Self {
        assert_eq!(
            tag_set.num_labels(),
            params.num_labels(),
            "tag set and parameters disagree on the alphabet"
        );
        Self { tag_set, params }
    }

    /// Builds a model with all-zero parameters sized for sequences up to
    /// `positions`.
    pub fn skeleton(tag_set: ConstrainedTagSet, positions: usize) -> Self {
        let params = CrfParams::zeros(tag_set.num_labels(), positions);
        Self { tag_set, params }
    }

    pub fn to_json_string(&self) -> String {
        let n = self.params.num_labels();
        let json = ModelJson {
            version: MODEL_VERSION.to_string(),
            nfa: self.tag_set.nfa().clone(),
            alphabet: self.tag_set.nfa().alphabet().symbols().to_vec(),
            class_reduction: self.tag_set.is_reduced(),
            transition: (0..n)
                .map(|a| (0..n).map(|b| self.params.transition(a, b)).collect())
                .collect(),
            emission: (0..self.params.positions())
                .map(|i| (0..n).map(|a| self.params.emission(i, a)).collect())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&json).expect("model serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self, ModelError> {
        let raw: ModelJson = serde_json::from_str(s)?;
        if raw.version != MODEL_VERSION {
            return Err(ModelError::Version { found: raw.version });
        }
        let alphabet = raw.nfa.alphabet();
        if raw.alphabet != alphabet.symbols() {
            return Err(ModelError::Inconsistent(
                "alphabet field disagrees with the NFA alphabet".into(),
            ));
        }
        let n = alphabet.len();
        let mut transition = Vec::with_capacity(n * n);
        if raw.transition.len() != n {
            return Err(ModelError::Inconsistent(format!(
                "transition matrix has {} rows for {} labels",
                raw.transition.len(),
                n
            )));
        }
        for row in &raw.transition {
            if row.len() != n {
                return Err(ModelError::Inconsistent(
                    "transition matrix is not square".into(),
                ));
            }
            transition.extend_from_slice(row);
        }
        let mut emission = Vec::with_capacity(raw.emission.len() * n);
        for (i, row) in raw.emission.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Inconsistent(format!(
                    "emission row {i} has {} entries for {} labels",
                    row.len(),
                    n
                )));
            }
            emission.extend_from_slice(row);
        }
        let params = CrfParams::from_tables(n, transition, emission)
            .ok_or_else(|| ModelError::Inconsistent("parameter tables are malformed".into()))?;
        let tag_set = ConstrainedTagSet::build(raw.nfa)
            .map_err(|w| ModelError::Inconsistent(format!("NFA is ambiguous: {w}")))?;
        let tag_set = if raw.class_reduction {
            tag_set.reduce()
        } else {
            tag_set
        };
        Ok(Self { tag_set, params })
    }
}
