//! Two synthetic studies comparing constrained decoding against constrained
//! training, with closed-form reference values for both.
//!
//! Both tasks hold the observation sequence constant (every token is `o`),
//! so emissions are free per-position parameters and everything about the
//! optimum can be worked out analytically.
//!
//! The arbitrary-gap task uses the language `(ac)*|(bc)*` with data placing
//! 3/4 on `(ac)^k` and 1/4 on `(bc)^k`. Even-indexed labels are always `c`,
//! so an unconstrained chain model treats odd positions independently; its
//! optimum puts `(3/4)^k` on `(ac)^k`, and conditioning that optimum on the
//! language concentrates mass as `3^k / (3^k + 1)`. Constrained training can
//! match the data exactly, so its cross-entropy stays near the data entropy
//! while constrained decoding's grows linearly in `k`.
//!
//! The map-inference task uses the three-string language `acd|bcd|bce` with
//! data probabilities (0.4, 0.3, 0.3). The unconstrained optimum factorizes
//! over adjacent pairs, which makes `bcd` the constrained-decoding mode even
//! though the data mode is `acd`; constrained training recovers the data
//! distribution and its mode.

use serde::{Deserialize, Serialize};

use crate::automata::{compile_regex, Alphabet, AutomataError, DEFAULT_STATE_BUDGET};
use crate::tagset::ConstrainedTagSet;
use crate::train::{run_regimens, DataDistribution, TrainConfig, TrainError, WeightedPair};

pub const ARBITRARY_GAP_REGEX: &str = "(ac)*|(bc)*";
pub const MAP_INFERENCE_REGEX: &str = "acd|bcd|bce";

/// Entropy of the 3/4-1/4 data distribution in nats.
pub const ARBITRARY_GAP_DATA_ENTROPY: f64 = 0.5623351446188083;

/// Probability the optimal constrained-decoding model puts on `(ac)^k`.
pub fn arbitrary_gap_p_cd_reference(k: u32) -> f64 {
    let pow = 3f64.powi(k as i32);
    pow / (pow + 1.0)
}

/// Cross-entropy of the data with the optimal constrained-decoding model.
pub fn arbitrary_gap_h_cd_reference(k: u32) -> f64 {
    let p = arbitrary_gap_p_cd_reference(k);
    -0.75 * p.ln() - 0.25 * (1.0 - p).ln()
}

pub fn arbitrary_gap_language() -> ConstrainedTagSet {
    let alphabet = Alphabet::new(["a", "b", "c"]).expect("fixed alphabet");
    let nfa = compile_regex(ARBITRARY_GAP_REGEX, &alphabet, DEFAULT_STATE_BUDGET)
        .expect("fixed regex compiles");
    ConstrainedTagSet::build(nfa)
        .expect("DFA is unambiguous")
        .reduce()
}

/// 3/4 on `(ac)^k`, 1/4 on `(bc)^k`, constant observation `o^{2k}`.
pub fn arbitrary_gap_distribution(k: u32) -> DataDistribution {
    assert!(k >= 1, "k must be at least 1");
    let x = vec!["o".to_string(); 2 * k as usize];
    let mut ac = Vec::new();
    let mut bc = Vec::new();
    for _ in 0..k {
        ac.extend([0, 2]);
        bc.extend([1, 2]);
    }
    DataDistribution::new(vec![
        WeightedPair {
            x: x.clone(),
            y: ac,
            p: 0.75,
        },
        WeightedPair { x, y: bc, p: 0.25 },
    ])
    .expect("fixed distribution is valid")
}

pub fn map_inference_language() -> ConstrainedTagSet {
    let alphabet = Alphabet::new(["a", "b", "c", "d", "e"]).expect("fixed alphabet");
    let nfa = compile_regex(MAP_INFERENCE_REGEX, &alphabet, DEFAULT_STATE_BUDGET)
        .expect("fixed regex compiles");
    ConstrainedTagSet::build(nfa)
        .expect("DFA is unambiguous")
        .reduce()
}

pub const MAP_INFERENCE_STRINGS: [&str; 3] = ["acd", "bcd", "bce"];
pub const MAP_INFERENCE_DATA_PROBS: [f64; 3] = [0.4, 0.3, 0.3];

/// Constrained-decoding probabilities at the unconstrained optimum: the
/// pairwise factorization puts (0.28, 0.12, 0.42, 0.18) on (acd, ace, bcd,
/// bce), and conditioning on the language drops `ace` and renormalizes.
pub const MAP_INFERENCE_P_CD_REFERENCE: [f64; 3] = [0.28 / 0.88, 0.42 / 0.88, 0.18 / 0.88];

pub fn map_inference_distribution() -> DataDistribution {
    let x = vec!["o".to_string(); 3];
    let entries = MAP_INFERENCE_STRINGS
        .iter()
        .zip(MAP_INFERENCE_DATA_PROBS)
        .map(|(s, p)| WeightedPair {
            x: x.clone(),
            y: s.chars().map(|c| (c as usize) - ('a' as usize)).collect(),
            p,
        })
        .collect();
    DataDistribution::new(entries).expect("fixed distribution is valid")
}

/// Seed for trial `trial` of sub-task `k`, derived so distinct (k, trial)
/// pairs get distinct, reproducible streams.
fn derive_seed(base: u64, k: u64, trial: u64) -> u64 {
    base.wrapping_add(k.wrapping_mul(1_000_003))
        .wrapping_add(trial)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row of the arbitrary-gap sweep. Trained values are means over trials
/// with sample standard deviations; `*_ref` columns are the closed forms.
/// When training fails for a `k`, `error` is set and the trained values are
/// NaN.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArbitraryGapRow {
    pub k: u32,
    pub trials: usize,
    pub p_cd: f64,
    pub p_cd_std: f64,
    pub p_ct: f64,
    pub p_ct_std: f64,
    pub h_cd: f64,
    pub h_cd_std: f64,
    pub h_ct: f64,
    pub h_ct_std: f64,
    pub p_cd_ref: f64,
    pub h_cd_ref: f64,
    pub h_data: f64,
    pub error: Option<String>,
}

/// Runs the arbitrary-gap sweep for `k` in `k_lo..=k_hi`. A failure at one
/// `k` is recorded in its row and the sweep continues.
pub fn run_arbitrary_gap(
    k_lo: u32,
    k_hi: u32,
    trials: usize,
    config: &TrainConfig,
) -> Vec<ArbitraryGapRow> {
    assert!(k_lo >= 1 && k_lo <= k_hi, "need 1 <= k_lo <= k_hi");
    assert!(trials >= 1, "need at least one trial");
    let ts = arbitrary_gap_language();
    (k_lo..=k_hi)
        .map(|k| {
            let mut row = ArbitraryGapRow {
                k,
                trials,
                p_cd: f64::NAN,
                p_cd_std: f64::NAN,
                p_ct: f64::NAN,
                p_ct_std: f64::NAN,
                h_cd: f64::NAN,
                h_cd_std: f64::NAN,
                h_ct: f64::NAN,
                h_ct_std: f64::NAN,
                p_cd_ref: arbitrary_gap_p_cd_reference(k),
                h_cd_ref: arbitrary_gap_h_cd_reference(k),
                h_data: ARBITRARY_GAP_DATA_ENTROPY,
                error: None,
            };
            match run_arbitrary_gap_k(&ts, k, trials, config) {
                Ok((p_cd, p_ct, h_cd, h_ct)) => {
                    (row.p_cd, row.p_cd_std) = mean_std(&p_cd);
                    (row.p_ct, row.p_ct_std) = mean_std(&p_ct);
                    (row.h_cd, row.h_cd_std) = mean_std(&h_cd);
                    (row.h_ct, row.h_ct_std) = mean_std(&h_ct);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

type GapTrials = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

fn run_arbitrary_gap_k(
    ts: &ConstrainedTagSet,
    k: u32,
    trials: usize,
    config: &TrainConfig,
) -> Result<GapTrials, TrainError> {
    let dist = arbitrary_gap_distribution(k);
    let mut p_cd = Vec::with_capacity(trials);
    let mut p_ct = Vec::with_capacity(trials);
    let mut h_cd = Vec::with_capacity(trials);
    let mut h_ct = Vec::with_capacity(trials);
    for trial in 0..trials {
        let config = TrainConfig {
            seed: derive_seed(config.seed, k as u64, trial as u64),
            ..config.clone()
        };
        let set = run_regimens(&dist, ts, &config)?;
        p_cd.push(set.constrained_decoding.per_string[0].1);
        p_ct.push(set.constrained_training.per_string[0].1);
        h_cd.push(set.constrained_decoding.cross_entropy);
        h_ct.push(set.constrained_training.cross_entropy);
    }
    Ok((p_cd, p_ct, h_cd, h_ct))
}

/// One trial of the map-inference task: per-string probabilities under both
/// constrained regimens and each regimen's MAP string.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapInferenceTrial {
    pub p_cd: [f64; 3],
    pub p_ct: [f64; 3],
    pub map_cd: String,
    pub map_ct: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapInferenceResult {
    pub trials: Vec<MapInferenceTrial>,
    pub p_cd: [f64; 3],
    pub p_cd_std: [f64; 3],
    pub p_ct: [f64; 3],
    pub p_ct_std: [f64; 3],
}

pub fn run_map_inference(
    trials: usize,
    config: &TrainConfig,
) -> Result<MapInferenceResult, TrainError> {
    assert!(trials >= 1, "need at least one trial");
    let ts = map_inference_language();
    let dist = map_inference_distribution();
    let alphabet = ts.nfa().alphabet().clone();
    let mut out = Vec::with_capacity(trials);
    for trial in 0..trials {
        let config = TrainConfig {
            seed: derive_seed(config.seed, 0, trial as u64),
            ..config.clone()
        };
        let set = run_regimens(&dist, &ts, &config)?;
        let probs = |r: &crate::train::RegimenResult| {
            [r.per_string[0].1, r.per_string[1].1, r.per_string[2].1]
        };
        let map_of = |params| {
            let y = crate::constrained::constrained_viterbi(&ts, params, 3)
                .expect("length 3 has support");
            alphabet.decode(&y).join("")
        };
        out.push(MapInferenceTrial {
            p_cd: probs(&set.constrained_decoding),
            p_ct: probs(&set.constrained_training),
            map_cd: map_of(&set.constrained_decoding.params),
            map_ct: map_of(&set.constrained_training.params),
        });
    }
    let column = |f: fn(&MapInferenceTrial) -> [f64; 3], i: usize| {
        out.iter().map(|t| f(t)[i]).collect::<Vec<f64>>()
    };
    let mut p_cd = [0.0; 3];
    let mut p_cd_std = [0.0; 3];
    let mut p_ct = [0.0; 3];
    let mut p_ct_std = [0.0; 3];
    for i in 0..3 {
        (p_cd[i], p_cd_std[i]) = mean_std(&column(|t| t.p_cd, i));
        (p_ct[i], p_ct_std[i]) = mean_std(&column(|t| t.p_ct, i));
    }
    Ok(MapInferenceResult {
        trials: out,
        p_cd,
        p_cd_std,
        p_ct,
        p_ct_std,
    })
}

/// Builds the language for either experiment by name, for CLI plumbing.
pub fn language_by_name(name: &str) -> Result<ConstrainedTagSet, AutomataError> {
    match name {
        "arbitrary-gap" => Ok(arbitrary_gap_language()),
        "map-inference" => Ok(map_inference_language()),
        other => Err(AutomataError::Malformed(format!(
            "unknown experiment `{other}`"
        ))),
    }
}
