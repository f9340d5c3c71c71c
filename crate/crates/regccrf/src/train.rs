//! SGD training against an explicit finite data distribution.
//!
//! Tasks are given as a finite list of `(x, y, p)` triples. Minibatches are
//! sampled i.i.d. from that distribution, gradients are the exact analytic
//! ones, and evaluation computes exact cross-entropies by summing over the
//! support, so runs are reproducible bit-for-bit from the seed.
//!
//! Two objectives share one loop: the unconstrained one fits a plain CRF over
//! labels, the constrained one fits the same label-level parameters through
//! the constrained tag set, which renormalizes over the language.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constrained::{expand_scores, ConstraintError, CrfParams, LabeledSequencePair};
use crate::crf::TagScores;
use crate::tagset::ConstrainedTagSet;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid data distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("training diverged at step {step} (batch loss {loss})")]
    Diverged { step: usize, loss: f64 },
    #[error("cross-entropy is infinite: model assigns probability zero to `{}`", labels.join(" "))]
    InfiniteCrossEntropy { labels: Vec<String> },
}

/// One support point of a data distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPair {
    pub x: Vec<String>,
    pub y: Vec<usize>,
    pub p: f64,
}

/// A finite distribution over labeled sequence pairs. Probabilities are
/// strictly positive and sum to one within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDistribution {
    entries: Vec<WeightedPair>,
}

impl DataDistribution {
    pub fn new(entries: Vec<WeightedPair>) -> Result<Self, TrainError> {
        if entries.is_empty() {
            return Err(TrainError::InvalidDistribution("empty support".into()));
        }
        let mut total = 0.0;
        let mut seen: HashMap<(&[String], &[usize]), ()> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.x.len() != e.y.len() {
                return Err(TrainError::InvalidDistribution(format!(
                    "entry {i}: observation length {} != label length {}",
                    e.x.len(),
                    e.y.len()
                )));
            }
            if e.y.is_empty() {
                return Err(TrainError::InvalidDistribution(format!(
                    "entry {i}: sequences must be non-empty"
                )));
            }
            if e.p.is_nan() || e.p <= 0.0 {
                return Err(TrainError::InvalidDistribution(format!(
                    "entry {i}: probability {} is not positive",
                    e.p
                )));
            }
            if seen.insert((&e.x[..], &e.y[..]), ()).is_some() {
                return Err(TrainError::InvalidDistribution(format!(
                    "entry {i}: duplicate support point"
                )));
            }
            total += e.p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(TrainError::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[WeightedPair] {
        &self.entries
    }

    pub fn max_len(&self) -> usize {
        self.entries.iter().map(|e| e.y.len()).max().unwrap_or(0)
    }

    /// Exact conditional entropy of labels given observations, in nats.
    pub fn entropy(&self) -> f64 {
        let mut mass_of_x: HashMap<&[String], f64> = HashMap::new();
        for e in &self.entries {
            *mass_of_x.entry(&e.x[..]).or_insert(0.0) += e.p;
        }
        self.entries
            .iter()
            .map(|e| e.p * (mass_of_x[&e.x[..]].ln() - e.p.ln()))
            .sum()
    }
}

/// Hyperparameters for the SGD loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// The learning rate is multiplied by `1 - lr_decay_frac` after every
    /// `lr_decay_every` completed steps.
    pub lr_decay_every: usize,
    pub lr_decay_frac: f64,
    /// Transition weights start from `Normal(0, transition_init_std)`;
    /// emissions start at zero.
    pub transition_init_std: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 5000,
            batch_size: 50,
            learning_rate: 1.0,
            lr_decay_every: 100,
            lr_decay_frac: 0.10,
            transition_init_std: 0.1,
            seed: 0,
        }
    }
}

/// Draws `n` i.i.d. samples from `dist`. The same seed always produces the
/// same samples.
pub fn sample(dist: &DataDistribution, n: usize, seed: u64) -> Vec<LabeledSequencePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let e = &dist.entries[draw(dist, &mut rng)];
            LabeledSequencePair {
                x: e.x.clone(),
                y: e.y.clone(),
            }
        })
        .collect()
}

fn draw(dist: &DataDistribution, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, e) in dist.entries.iter().enumerate() {
        cum += e.p;
        if u < cum {
            return i;
        }
    }
    dist.entries.len() - 1
}

/// A model to evaluate: parameters with or without the constraint attached.
#[derive(Clone, Copy)]
pub enum ModelRef<'a> {
    Unconstrained(&'a CrfParams),
    Constrained(&'a ConstrainedTagSet, &'a CrfParams),
}

enum Objective<'a> {
    Unconstrained { num_labels: usize },
    Constrained(&'a ConstrainedTagSet),
}

impl Objective<'_> {
    fn num_labels(&self) -> usize {
        match self {
            Objective::Unconstrained { num_labels } => *num_labels,
            Objective::Constrained(ts) => ts.num_labels(),
        }
    }

    fn scores(&self, params: &CrfParams, len: usize) -> Result<TagScores, ConstraintError> {
        match self {
            Objective::Unconstrained { .. } => params.unconstrained_scores(len),
            Objective::Constrained(ts) => expand_scores(ts, params, len),
        }
    }

    /// Label-level expected counts at length `len`: per-position unary
    /// expectations, pooled pairwise expectations, and the log-partition.
    fn expectations(
        &self,
        params: &CrfParams,
        len: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, f64), TrainError> {
        let scores = self.scores(params, len)?;
        let marginals = scores
            .marginals()
            .map_err(|_| TrainError::Constraint(ConstraintError::EmptySupport { len }))?;
        let l = self.num_labels();
        let k = marginals.num_tags();
        let label_of = |tag: usize| match self {
            Objective::Unconstrained { .. } => tag,
            Objective::Constrained(ts) => ts.label_of(tag),
        };
        let mut unary = vec![0.0; len * l];
        for i in 0..len {
            for tag in 0..k {
                unary[i * l + label_of(tag)] += marginals.unary(i, tag);
            }
        }
        let mut pair = vec![0.0; l * l];
        for i in 0..len - 1 {
            for u in 0..k {
                for v in 0..k {
                    pair[label_of(u) * l + label_of(v)] += marginals.pairwise(i, u, v);
                }
            }
        }
        Ok((unary, pair, marginals.log_partition()))
    }
}

/// Label-space score of `y`; for in-language sequences this equals the score
/// of the unique feasible tag path.
fn label_score(params: &CrfParams, y: &[usize]) -> f64 {
    let mut s = 0.0;
    for (i, &a) in y.iter().enumerate() {
        s += params.emission(i, a);
    }
    for w in y.windows(2) {
        s += params.transition(w[0], w[1]);
    }
    s
}

fn train(
    dist: &DataDistribution,
    objective: Objective<'_>,
    config: &TrainConfig,
) -> Result<CrfParams, TrainError> {
    if config.batch_size == 0 {
        return Err(TrainError::InvalidConfig(
            "batch_size must be positive".into(),
        ));
    }
    if config.learning_rate.is_nan() || config.learning_rate <= 0.0 {
        return Err(TrainError::InvalidConfig(
            "learning_rate must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&config.lr_decay_frac) {
        return Err(TrainError::InvalidConfig(
            "lr_decay_frac must lie in [0, 1)".into(),
        ));
    }
    let num_labels = objective.num_labels();
    for e in dist.entries() {
        if let Some(&bad) = e.y.iter().find(|&&a| a >= num_labels) {
            return Err(TrainError::InvalidDistribution(format!(
                "label index {bad} out of range for {num_labels} labels"
            )));
        }
        if let Objective::Constrained(ts) = &objective {
            if ts.tag_path(&e.y).is_none() {
                return Err(TrainError::Constraint(ConstraintError::OutOfLanguage {
                    labels: ts.nfa().alphabet().decode(&e.y),
                }));
            }
        }
    }

    let positions = dist.max_len();
    let mut params = CrfParams::zeros(num_labels, positions);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    if config.transition_init_std > 0.0 {
        let normal = Normal::new(0.0, config.transition_init_std)
            .map_err(|e| TrainError::InvalidConfig(format!("transition init: {e}")))?;
        for a in 0..num_labels {
            for b in 0..num_labels {
                params.set_transition(a, b, normal.sample(&mut rng));
            }
        }
    }

    let batch = config.batch_size as f64;
    let mut lr = config.learning_rate;
    let mut counts = vec![0usize; dist.entries().len()];
    for step in 1..=config.steps {
        if config.lr_decay_every > 0 && step > 1 && (step - 1) % config.lr_decay_every == 0 {
            lr *= 1.0 - config.lr_decay_frac;
        }
        counts.fill(0);
        for _ in 0..config.batch_size {
            counts[draw(dist, &mut rng)] += 1;
        }

        let mut grad_emission = vec![0.0; positions * num_labels];
        let mut grad_transition = vec![0.0; num_labels * num_labels];
        let mut loss = 0.0;

        // Expected counts depend only on the sequence length, so each length
        // present in the batch costs one forward-backward pass.
        let mut batch_of_len: HashMap<usize, f64> = HashMap::new();
        for (e, &c) in dist.entries().iter().zip(&counts) {
            if c > 0 {
                *batch_of_len.entry(e.y.len()).or_insert(0.0) += c as f64 / batch;
            }
        }
        let mut lengths: Vec<usize> = batch_of_len.keys().copied().collect();
        lengths.sort_unstable();
        for &len in &lengths {
            let weight = batch_of_len[&len];
            let (unary, pair, logz) = objective.expectations(&params, len)?;
            for i in 0..len * num_labels {
                grad_emission[i] += weight * unary[i];
            }
            for i in 0..num_labels * num_labels {
                grad_transition[i] += weight * pair[i];
            }
            loss += weight * logz;
        }
        for (e, &c) in dist.entries().iter().zip(&counts) {
            if c == 0 {
                continue;
            }
            let w = c as f64 / batch;
            for (i, &a) in e.y.iter().enumerate() {
                grad_emission[i * num_labels + a] -= w;
            }
            for pair in e.y.windows(2) {
                grad_transition[pair[0] * num_labels + pair[1]] -= w;
            }
            loss -= w * label_score(&params, &e.y);
        }
        if !loss.is_finite() {
            return Err(TrainError::Diverged { step, loss });
        }

        for (p, g) in params.emission_table_mut().iter_mut().zip(&grad_emission) {
            *p -= lr * g;
        }
        for (p, g) in params
            .transition_table_mut()
            .iter_mut()
            .zip(&grad_transition)
        {
            *p -= lr * g;
        }
    }
    Ok(params)
}

/// Fits a plain CRF over labels by SGD on the expected NLL.
pub fn train_unconstrained(
    dist: &DataDistribution,
    num_labels: usize,
    config: &TrainConfig,
) -> Result<CrfParams, TrainError> {
    train(dist, Objective::Unconstrained { num_labels }, config)
}

/// Fits the same label-level parameters with the language constraint applied
/// inside the objective, so probability is renormalized over the language.
/// Every support point must be in the language.
pub fn train_constrained(
    dist: &DataDistribution,
    ts: &ConstrainedTagSet,
    config: &TrainConfig,
) -> Result<CrfParams, TrainError> {
    train(dist, Objective::Constrained(ts), config)
}

/// Log-probability of one support entry under `model`.
fn entry_log_prob(
    model: ModelRef<'_>,
    logz_cache: &mut HashMap<usize, Result<f64, ConstraintError>>,
    e: &WeightedPair,
) -> Result<f64, TrainError> {
    let len = e.y.len();
    let infinite = |labels: Vec<String>| TrainError::InfiniteCrossEntropy { labels };
    match model {
        ModelRef::Unconstrained(params) => {
            let logz = logz_cache
                .entry(len)
                .or_insert_with(|| {
                    params.unconstrained_scores(len).and_then(|s| {
                        s.log_partition()
                            .map_err(|_| ConstraintError::EmptySupport { len })
                    })
                })
                .clone()
                .map_err(TrainError::Constraint)?;
            Ok(label_score(params, &e.y) - logz)
        }
        ModelRef::Constrained(ts, params) => {
            if ts.tag_path(&e.y).is_none() {
                return Err(infinite(ts.nfa().alphabet().decode(&e.y)));
            }
            let logz = logz_cache
                .entry(len)
                .or_insert_with(|| {
                    expand_scores(ts, params, len).and_then(|s| {
                        s.log_partition()
                            .map_err(|_| ConstraintError::EmptySupport { len })
                    })
                })
                .clone()
                .map_err(TrainError::Constraint)?;
            Ok(label_score(params, &e.y) - logz)
        }
    }
}

/// Exact expected negative log-probability of the data under `model`, in
/// nats. A support point with zero model probability (an out-of-language
/// sequence under a constrained model) is reported as an error rather than
/// silently returning infinity.
pub fn evaluate_cross_entropy(
    dist: &DataDistribution,
    model: ModelRef<'_>,
) -> Result<f64, TrainError> {
    let mut cache = HashMap::new();
    let mut h = 0.0;
    for e in dist.entries() {
        h -= e.p * entry_log_prob(model, &mut cache, e)?;
    }
    Ok(h)
}

/// Model probability of every support string, in support order.
pub fn per_string_probabilities(
    dist: &DataDistribution,
    model: ModelRef<'_>,
) -> Result<Vec<(Vec<usize>, f64)>, TrainError> {
    let mut cache = HashMap::new();
    dist.entries()
        .iter()
        .map(|e| entry_log_prob(model, &mut cache, e).map(|lp| (e.y.clone(), lp.exp())))
        .collect()
}

/// The three ways of combining training and decoding with a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regimen {
    /// Trained without the constraint, evaluated without it.
    Unconstrained,
    /// Trained without the constraint, constrained at evaluation time.
    ConstrainedDecoding,
    /// Constraint applied inside the training objective.
    ConstrainedTraining,
}

impl Regimen {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regimen::Unconstrained => "unconstrained",
            Regimen::ConstrainedDecoding => "constrained-decoding",
            Regimen::ConstrainedTraining => "constrained-training",
        }
    }
}

/// Serializes as a result row (regimen, cross-entropy, per-string
/// probabilities); the raw parameter tables stay out of the row format.
#[derive(Debug, Clone, Serialize)]
pub struct RegimenResult {
    pub regimen: Regimen,
    #[serde(skip)]
    pub params: CrfParams,
    pub cross_entropy: f64,
    /// Model probability of each support string, in support order.
    pub per_string: Vec<(Vec<usize>, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimenSet {
    pub unconstrained: RegimenResult,
    pub constrained_decoding: RegimenResult,
    pub constrained_training: RegimenResult,
}

/// Trains and evaluates all three regimens on one task. The unconstrained
/// parameters are trained once and reused for constrained decoding; the
/// constrained-training regimen trains its own parameters from the same seed.
pub fn run_regimens(
    dist: &DataDistribution,
    ts: &ConstrainedTagSet,
    config: &TrainConfig,
) -> Result<RegimenSet, TrainError> {
    let theta_u = train_unconstrained(dist, ts.num_labels(), config)?;
    let unconstrained = RegimenResult {
        regimen: Regimen::Unconstrained,
        cross_entropy: evaluate_cross_entropy(dist, ModelRef::Unconstrained(&theta_u))?,
        per_string: per_string_probabilities(dist, ModelRef::Unconstrained(&theta_u))?,
        params: theta_u.clone(),
    };
    let constrained_decoding = RegimenResult {
        regimen: Regimen::ConstrainedDecoding,
        cross_entropy: evaluate_cross_entropy(dist, ModelRef::Constrained(ts, &theta_u))?,
        per_string: per_string_probabilities(dist, ModelRef::Constrained(ts, &theta_u))?,
        params: theta_u,
    };
    let theta_c = train_constrained(dist, ts, config)?;
    let constrained_training = RegimenResult {
        regimen: Regimen::ConstrainedTraining,
        cross_entropy: evaluate_cross_entropy(dist, ModelRef::Constrained(ts, &theta_c))?,
        per_string: per_string_probabilities(dist, ModelRef::Constrained(ts, &theta_c))?,
        params: theta_c,
    };
    Ok(RegimenSet {
        unconstrained,
        constrained_decoding,
        constrained_training,
    })
}
