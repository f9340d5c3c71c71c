//! Training and evaluation properties: reproducibility, sampling statistics,
//! and the exact relationship between unconstrained and constrained-decoding
//! cross-entropies for a fixed parameter vector.

mod common;

use common::{brute_unconstrained_log_partition, label_sequence_score, random_language_task, rng};
use rand::Rng;
use regccrf::automata::compile_regex;
use regccrf::constrained::CrfParams;
use regccrf::experiments::arbitrary_gap_distribution;
use regccrf::tagset::ConstrainedTagSet;
use regccrf::train::{
    evaluate_cross_entropy, run_regimens, sample, DataDistribution, ModelRef, TrainConfig,
    WeightedPair,
};

fn random_params(
    rng: &mut rand_chacha::ChaCha8Rng,
    num_labels: usize,
    positions: usize,
) -> CrfParams {
    let mut p = CrfParams::zeros(num_labels, positions);
    for i in 0..positions {
        for a in 0..num_labels {
            p.set_emission(i, a, rng.random_range(-1.5..1.5));
        }
    }
    for a in 0..num_labels {
        for b in 0..num_labels {
            p.set_transition(a, b, rng.random_range(-1.5..1.5));
        }
    }
    p
}

#[test]
fn regimens_are_reproducible_per_seed() {
    let mut rng = rng(11);
    let (ts, dist, _) = loop {
        if let Some(task) = random_language_task(&mut rng) {
            break task;
        }
    };
    let config = TrainConfig {
        steps: 60,
        ..TrainConfig::default()
    };
    let a = run_regimens(&dist, &ts, &config).unwrap();
    let b = run_regimens(&dist, &ts, &config).unwrap();
    assert_eq!(a.unconstrained.params, b.unconstrained.params);
    assert_eq!(a.constrained_training.params, b.constrained_training.params);
    assert_eq!(
        a.constrained_decoding.cross_entropy,
        b.constrained_decoding.cross_entropy
    );

    let other = TrainConfig { seed: 1, ..config };
    let c = run_regimens(&dist, &ts, &other).unwrap();
    assert_ne!(a.unconstrained.params, c.unconstrained.params);
}

#[test]
fn sampling_tracks_the_data_distribution() {
    let dist = arbitrary_gap_distribution(2);
    let n = 100_000;
    let samples = sample(&dist, n, 9);
    assert_eq!(samples, sample(&dist, n, 9));
    let target = dist.entries()[0].y.clone();
    let frac = samples.iter().filter(|s| s.y == target).count() as f64 / n as f64;
    let sigma = (0.75 * 0.25 / n as f64).sqrt();
    assert!(
        (frac - 0.75).abs() < 3.0 * sigma,
        "fraction {frac} too far from 0.75"
    );
}

/// For any fixed parameters, the gap between unconstrained and
/// constrained-decoding cross-entropy equals the log of the reciprocal
/// language mass, computed here by full enumeration.
#[test]
fn alpha_gap_identity_holds_exactly() {
    let mut outer = rng(21);
    let mut checked = 0;
    while checked < 25 {
        let Some((ts, dist, len)) = random_language_task(&mut outer) else {
            continue;
        };
        checked += 1;
        let num_labels = ts.num_labels();
        let params = random_params(&mut outer, num_labels, len);

        let h_u = evaluate_cross_entropy(&dist, ModelRef::Unconstrained(&params)).unwrap();
        let h_cd = evaluate_cross_entropy(&dist, ModelRef::Constrained(&ts, &params)).unwrap();

        let logz_u = brute_unconstrained_log_partition(&params, num_labels, len);
        let language_mass: f64 = ts
            .nfa()
            .enumerate_language(len)
            .unwrap()
            .iter()
            .filter(|y| y.len() == len)
            .map(|y| (label_sequence_score(&params, y) - logz_u).exp())
            .sum();
        let ln_alpha = -language_mass.ln();
        assert!(
            ((h_u - h_cd) - ln_alpha).abs() < 1e-9,
            "gap {} vs ln alpha {}",
            h_u - h_cd,
            ln_alpha
        );
        assert!(
            h_cd <= h_u + 1e-12,
            "conditioning cannot raise cross-entropy"
        );
    }
}

#[test]
fn vacuous_constraint_changes_nothing() {
    let alphabet = regccrf::automata::Alphabet::new(["a", "b", "c"]).unwrap();
    let nfa = compile_regex("(a|b|c)*", &alphabet, 1000).unwrap();
    let ts = ConstrainedTagSet::build(nfa).unwrap().reduce();
    let mut rng = rng(33);

    let dist = DataDistribution::new(vec![
        WeightedPair {
            x: vec!["o".into(); 2],
            y: vec![0, 1],
            p: 0.5,
        },
        WeightedPair {
            x: vec!["o".into(); 3],
            y: vec![2, 2, 0],
            p: 0.5,
        },
    ])
    .unwrap();

    for _ in 0..5 {
        let params = random_params(&mut rng, 3, 3);
        let h_u = evaluate_cross_entropy(&dist, ModelRef::Unconstrained(&params)).unwrap();
        let h_cd = evaluate_cross_entropy(&dist, ModelRef::Constrained(&ts, &params)).unwrap();
        assert!((h_u - h_cd).abs() < 1e-9, "{h_u} vs {h_cd}");
    }

    let config = TrainConfig {
        steps: 200,
        ..TrainConfig::default()
    };
    let set = run_regimens(&dist, &ts, &config).unwrap();
    assert!(
        (set.unconstrained.cross_entropy - set.constrained_decoding.cross_entropy).abs() < 1e-9
    );
}

#[test]
fn cross_entropy_never_beats_data_entropy() {
    let mut rng = rng(47);
    let mut checked = 0;
    while checked < 15 {
        let Some((ts, dist, len)) = random_language_task(&mut rng) else {
            continue;
        };
        checked += 1;
        let entropy = dist.entropy();
        let params = random_params(&mut rng, ts.num_labels(), len);
        for model in [
            ModelRef::Unconstrained(&params),
            ModelRef::Constrained(&ts, &params),
        ] {
            let h = evaluate_cross_entropy(&dist, model).unwrap();
            assert!(h >= entropy - 1e-9, "{h} < {entropy}");
        }
        let config = TrainConfig {
            steps: 150,
            ..TrainConfig::default()
        };
        let set = run_regimens(&dist, &ts, &config).unwrap();
        for r in [
            &set.unconstrained,
            &set.constrained_decoding,
            &set.constrained_training,
        ] {
            assert!(r.cross_entropy >= entropy - 1e-9);
            for (_, p) in &r.per_string {
                assert!((0.0..=1.0 + 1e-12).contains(p));
            }
        }
    }
}
