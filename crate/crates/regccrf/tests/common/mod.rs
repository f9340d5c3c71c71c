//! Shared brute-force oracles and random instance generators.
//!
//! Everything here recomputes quantities by exhaustive enumeration or direct
//! rule application, deliberately sharing no code with the library's dynamic
//! programs, so disagreements point at real bugs.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use regccrf::automata::{Alphabet, Edge, Nfa, RegexAst};
use regccrf::crf::{is_forbidden, TagScores};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All length-`len` strings over `0..alphabet_size` in lexicographic order.
pub fn all_strings(alphabet_size: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..alphabet_size).map(move |a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

// ---------------------------------------------------------------------------
// CRF enumeration oracle

/// Every finite-score tag sequence with its score.
pub fn enumerate_finite_sequences(s: &TagScores) -> Vec<(Vec<usize>, f64)> {
    all_strings(s.num_tags(), s.len())
        .into_iter()
        .filter_map(|tags| {
            let score = direct_sequence_score(s, &tags);
            (!is_forbidden(score)).then_some((tags, score))
        })
        .collect()
}

/// Score recomputed term by term, including mask folding.
pub fn direct_sequence_score(s: &TagScores, tags: &[usize]) -> f64 {
    let mut total = 0.0;
    for (i, &tag) in tags.iter().enumerate() {
        let mut e = s.emission(i, tag);
        if i == 0 && !s.start_allowed(tag) {
            e = regccrf::crf::NEG_INF;
        }
        if i == tags.len() - 1 && !s.end_allowed(tag) {
            e = regccrf::crf::NEG_INF;
        }
        if is_forbidden(e) {
            return regccrf::crf::NEG_INF;
        }
        total += e;
    }
    for w in tags.windows(2) {
        let t = s.transition(w[0], w[1]);
        if is_forbidden(t) {
            return regccrf::crf::NEG_INF;
        }
        total += t;
    }
    total
}

pub fn brute_log_partition(s: &TagScores) -> Option<f64> {
    let seqs = enumerate_finite_sequences(s);
    if seqs.is_empty() {
        return None;
    }
    let max = seqs
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(max + seqs.iter().map(|(_, v)| (v - max).exp()).sum::<f64>().ln())
}

pub struct BruteMarginals {
    pub unary: Vec<Vec<f64>>,
    pub pairwise: Vec<Vec<Vec<f64>>>,
}

pub fn brute_marginals(s: &TagScores) -> Option<BruteMarginals> {
    let logz = brute_log_partition(s)?;
    let k = s.num_tags();
    let t = s.len();
    let mut unary = vec![vec![0.0; k]; t];
    let mut pairwise = vec![vec![vec![0.0; k]; k]; t.saturating_sub(1)];
    for (tags, score) in enumerate_finite_sequences(s) {
        let p = (score - logz).exp();
        for (i, &tag) in tags.iter().enumerate() {
            unary[i][tag] += p;
        }
        for (i, w) in tags.windows(2).enumerate() {
            pairwise[i][w[0]][w[1]] += p;
        }
    }
    Some(BruteMarginals { unary, pairwise })
}

/// Max-score sequence; `None` when no sequence has finite score. On exact
/// ties prefers the sequence whose reversal is lexicographically smallest,
/// matching backward path reconstruction.
pub fn brute_viterbi(s: &TagScores) -> Option<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for (tags, score) in enumerate_finite_sequences(s) {
        best = match best {
            None => Some((tags, score)),
            Some((btags, bscore)) => {
                let better =
                    score > bscore || (score == bscore && tags.iter().rev().lt(btags.iter().rev()));
                if better {
                    Some((tags, score))
                } else {
                    Some((btags, bscore))
                }
            }
        };
    }
    best
}

// ---------------------------------------------------------------------------
// Finite differences

/// Symmetric relative error with a unit floor in the denominator.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0f64.max(a.abs()).max(b.abs())
}

/// Central finite difference. `eval(d)` must evaluate the objective with the
/// parameter of interest offset by `d`, leaving state unchanged afterwards.
pub fn central_difference<F: FnMut(f64) -> f64>(mut eval: F, h: f64) -> f64 {
    (eval(h) - eval(-h)) / (2.0 * h)
}

// ---------------------------------------------------------------------------
// Random instances

/// Random dense scores in [-2, 2], with masks applied with the given
/// probabilities. Start/end stay allowed often enough that most instances
/// keep non-empty support.
pub fn random_tag_scores(
    rng: &mut ChaCha8Rng,
    len: usize,
    num_tags: usize,
    forbid_prob: f64,
) -> TagScores {
    let mut s = TagScores::zeros(len, num_tags);
    for i in 0..len {
        for k in 0..num_tags {
            if rng.random::<f64>() < forbid_prob {
                s.set_emission(i, k, regccrf::crf::NEG_INF);
            } else {
                s.set_emission(i, k, rng.random_range(-2.0..2.0));
            }
        }
    }
    for a in 0..num_tags {
        for b in 0..num_tags {
            if rng.random::<f64>() < forbid_prob {
                s.set_transition(a, b, regccrf::crf::NEG_INF);
            } else {
                s.set_transition(a, b, rng.random_range(-2.0..2.0));
            }
        }
    }
    for k in 0..num_tags {
        if rng.random::<f64>() < forbid_prob / 2.0 {
            s.set_start_allowed(k, false);
        }
        if rng.random::<f64>() < forbid_prob / 2.0 {
            s.set_end_allowed(k, false);
        }
    }
    s
}

/// Random regex over the alphabet's symbols, depth-bounded so enumeration
/// stays cheap.
pub fn random_regex(rng: &mut ChaCha8Rng, alphabet: &Alphabet, depth: usize) -> RegexAst {
    let symbol = |rng: &mut ChaCha8Rng| {
        RegexAst::Symbol(
            alphabet
                .symbol(rng.random_range(0..alphabet.len()))
                .to_string(),
        )
    };
    if depth == 0 {
        return if rng.random::<f64>() < 0.1 {
            RegexAst::Empty
        } else {
            symbol(rng)
        };
    }
    match rng.random_range(0..8u32) {
        0 | 1 => symbol(rng),
        2 | 3 => {
            let n = rng.random_range(2..=3);
            RegexAst::Concat(
                (0..n)
                    .map(|_| random_regex(rng, alphabet, depth - 1))
                    .collect(),
            )
        }
        4 => {
            let n = rng.random_range(2..=3);
            RegexAst::Alternation(
                (0..n)
                    .map(|_| random_regex(rng, alphabet, depth - 1))
                    .collect(),
            )
        }
        5 => RegexAst::Star(Box::new(random_regex(rng, alphabet, depth - 1))),
        6 => RegexAst::Optional(Box::new(random_regex(rng, alphabet, depth - 1))),
        _ => RegexAst::Repeat(
            Box::new(random_regex(rng, alphabet, depth - 1)),
            rng.random_range(0..=2),
        ),
    }
}

/// Unambiguous NFA with two parallel edges out of the start on the same
/// symbol, resolved by distinct second symbols. Class reduction is
/// guaranteed to merge the fork.
pub fn forked_nfa(rng: &mut ChaCha8Rng, alphabet: &Alphabet) -> Nfa {
    let n = alphabet.len();
    assert!(n >= 2);
    let fork_sym = rng.random_range(0..n);
    let b1 = rng.random_range(0..n);
    let mut b2 = rng.random_range(0..n - 1);
    if b2 >= b1 {
        b2 += 1;
    }
    let mut edges = vec![
        Edge {
            from: 0,
            symbol: fork_sym,
            to: 1,
        },
        Edge {
            from: 0,
            symbol: fork_sym,
            to: 2,
        },
        Edge {
            from: 1,
            symbol: b1,
            to: 3,
        },
        Edge {
            from: 2,
            symbol: b2,
            to: 4,
        },
    ];
    let mut accepting = vec![3, 4];
    if rng.random::<bool>() {
        edges.push(Edge {
            from: 3,
            symbol: rng.random_range(0..n),
            to: 3,
        });
    }
    if rng.random::<bool>() {
        edges.push(Edge {
            from: 4,
            symbol: rng.random_range(0..n),
            to: 5,
        });
        accepting.push(5);
    }
    if rng.random::<bool>() {
        accepting.push(0);
    }
    let num_states = 6;
    Nfa::new(alphabet.clone(), num_states, accepting, edges).expect("shape is valid")
}

/// Random NFA with a bounded shape; may be ambiguous, may have dead states.
pub fn random_nfa(rng: &mut ChaCha8Rng, alphabet: &Alphabet) -> Nfa {
    let num_states = rng.random_range(1..=5);
    let num_edges = rng.random_range(0..=8);
    let edges = (0..num_edges)
        .map(|_| Edge {
            from: rng.random_range(0..num_states),
            symbol: rng.random_range(0..alphabet.len()),
            to: rng.random_range(0..num_states),
        })
        .collect();
    let accepting: Vec<usize> = (0..num_states)
        .filter(|_| rng.random::<f64>() < 0.5)
        .collect();
    Nfa::new(alphabet.clone(), num_states, accepting, edges).expect("shape is valid")
}

// ---------------------------------------------------------------------------
// Random training tasks

/// Unconstrained label-space score of `y` recomputed from the parameter
/// tables.
pub fn label_sequence_score(params: &regccrf::constrained::CrfParams, y: &[usize]) -> f64 {
    y.iter()
        .enumerate()
        .map(|(i, &a)| params.emission(i, a))
        .sum::<f64>()
        + y.windows(2)
            .map(|w| params.transition(w[0], w[1]))
            .sum::<f64>()
}

/// Unconstrained log-partition over all of `Sigma^t` by enumeration.
pub fn brute_unconstrained_log_partition(
    params: &regccrf::constrained::CrfParams,
    num_labels: usize,
    len: usize,
) -> f64 {
    let scores: Vec<f64> = all_strings(num_labels, len)
        .iter()
        .map(|y| label_sequence_score(params, y))
        .collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// A random training task: an unambiguous language over `{a, b, c}` and a
/// data distribution over a subset of its strings of one fixed length
/// `<= 4`. Returns the tag set in reduced form plus the chosen length.
pub fn random_language_task(
    rng: &mut ChaCha8Rng,
) -> Option<(
    regccrf::tagset::ConstrainedTagSet,
    regccrf::train::DataDistribution,
    usize,
)> {
    use regccrf::train::WeightedPair;

    let alphabet = Alphabet::new(["a", "b", "c"]).unwrap();
    let ast = random_regex(rng, &alphabet, 2);
    let nfa = regccrf::automata::compile_regex(&ast.to_string(), &alphabet, 100_000).ok()?;
    let language = nfa.enumerate_language(4).ok()?;
    let lengths: Vec<usize> = (1..=4)
        .filter(|&t| language.iter().any(|s| s.len() == t))
        .collect();
    if lengths.is_empty() {
        return None;
    }
    let len = lengths[rng.random_range(0..lengths.len())];
    let mut candidates: Vec<&Vec<usize>> = language.iter().filter(|s| s.len() == len).collect();
    let keep = rng.random_range(1..=candidates.len().min(6));
    while candidates.len() > keep {
        let drop = rng.random_range(0..candidates.len());
        candidates.swap_remove(drop);
    }
    let weights: Vec<f64> = (0..candidates.len())
        .map(|_| rng.random_range(1..=9) as f64)
        .collect();
    let total: f64 = weights.iter().sum();
    let x = vec!["o".to_string(); len];
    let entries = candidates
        .iter()
        .zip(&weights)
        .map(|(y, w)| WeightedPair {
            x: x.clone(),
            y: (*y).clone(),
            p: w / total,
        })
        .collect();
    let dist = regccrf::train::DataDistribution::new(entries).ok()?;
    let ts = regccrf::tagset::ConstrainedTagSet::build(nfa)
        .ok()?
        .reduce();
    Some((ts, dist, len))
}

// ---------------------------------------------------------------------------
// Independent regex membership

/// Matches `string` against the AST directly, with no automaton involved.
pub fn regex_matches(ast: &RegexAst, string: &[&str]) -> bool {
    match ast {
        RegexAst::Empty => string.is_empty(),
        RegexAst::Symbol(name) => string.len() == 1 && string[0] == name,
        RegexAst::Concat(parts) => concat_matches(parts, string),
        RegexAst::Alternation(parts) => parts.iter().any(|p| regex_matches(p, string)),
        RegexAst::Star(inner) => {
            string.is_empty()
                || (1..=string.len()).any(|cut| {
                    regex_matches(inner, &string[..cut]) && regex_matches(ast, &string[cut..])
                })
        }
        RegexAst::Plus(inner) => {
            regex_matches(inner, string)
                || (1..=string.len()).any(|cut| {
                    regex_matches(inner, &string[..cut]) && regex_matches(ast, &string[cut..])
                })
        }
        RegexAst::Optional(inner) => string.is_empty() || regex_matches(inner, string),
        RegexAst::Repeat(inner, n) => {
            if *n == 0 {
                return string.is_empty();
            }
            let rest = RegexAst::Repeat(inner.clone(), n - 1);
            (0..=string.len()).any(|cut| {
                regex_matches(inner, &string[..cut]) && regex_matches(&rest, &string[cut..])
            })
        }
    }
}

fn concat_matches(parts: &[RegexAst], string: &[&str]) -> bool {
    match parts {
        [] => string.is_empty(),
        [first, rest @ ..] => (0..=string.len()).any(|cut| {
            regex_matches(first, &string[..cut]) && concat_matches(rest, &string[cut..])
        }),
    }
}

/// Number of distinct accepting paths for `string`, counting edges.
pub fn count_accepting_paths(nfa: &Nfa, string: &[usize]) -> u64 {
    let mut counts = vec![0u64; nfa.num_states()];
    counts[0] = 1;
    for &symbol in string {
        let mut next = vec![0u64; nfa.num_states()];
        for (q, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for e in nfa.transitions(q, symbol) {
                next[e.to] += c;
            }
        }
        counts = next;
    }
    (0..nfa.num_states())
        .filter(|&q| nfa.is_accepting(q))
        .map(|q| counts[q])
        .sum()
}

// ---------------------------------------------------------------------------
// BIO rule checker

/// Direct per-sequence check of the BIO constraints: `I` continues a
/// matching open span, core roles span at most once, continuations need a
/// previously completed base span.
pub fn bio_accepts_by_rules(
    core_roles: &[&str],
    continuation_roles: &[&str],
    labels: &[&str],
) -> bool {
    let mut open: Option<String> = None;
    let mut core_used: Vec<&str> = Vec::new();
    let mut completed: Vec<String> = Vec::new();
    let close = |open: &mut Option<String>, completed: &mut Vec<String>| {
        if let Some(role) = open.take() {
            completed.push(role);
        }
    };
    for &label in labels {
        if label == "O" {
            close(&mut open, &mut completed);
        } else if let Some(role) = label.strip_prefix("B-C-") {
            close(&mut open, &mut completed);
            if !continuation_roles.contains(&role) || !completed.iter().any(|r| r == role) {
                return false;
            }
            open = Some(format!("C-{role}"));
        } else if let Some(role) = label.strip_prefix("B-") {
            close(&mut open, &mut completed);
            if core_roles.contains(&role) {
                if core_used.contains(&role) {
                    return false;
                }
                core_used.push(role);
            }
            open = Some(role.to_string());
        } else if let Some(kind) = label.strip_prefix("I-") {
            // Continuation spans record their open kind as "C-role", which is
            // exactly what "I-C-role" strips to.
            if open.as_deref() != Some(kind) {
                return false;
            }
        } else {
            return false;
        }
    }
    true
}
