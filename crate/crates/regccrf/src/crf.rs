//! Linear-chain CRF inference over an abstract tag set.
//!
//! A [`TagScores`] instance fixes the sequence length and holds per-position
//! emission scores, one shared transition matrix, and boolean masks for the
//! allowed initial and final tags. All inference runs in log space. Forbidden
//! entries use the sentinel [`NEG_INF`] instead of IEEE minus infinity so that
//! sums of forbidden scores never produce NaN; anything at or below
//! `-1e28` is treated as impossible.

use thiserror::Error;

/// Sentinel for a forbidden score. Large enough in magnitude that no sum of
/// realistic finite scores gets near it, finite so arithmetic stays NaN-free.
pub const NEG_INF: f64 = -1.0e30;

const FORBIDDEN_CUTOFF: f64 = -1.0e28;

/// True when a log-score is treated as minus infinity.
pub fn is_forbidden(score: f64) -> bool {
    score <= FORBIDDEN_CUTOFF
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CrfError {
    #[error("no tag sequence has positive probability under these scores")]
    EmptySupport,
    #[error("the target sequence violates a mask and has probability zero")]
    ImpossibleSequence,
}

/// Scores for tag sequences of one fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct TagScores {
    len: usize,
    num_tags: usize,
    /// Row-major `len x num_tags`.
    emission: Vec<f64>,
    /// Row-major `num_tags x num_tags`, indexed `[from][to]`.
    transition: Vec<f64>,
    start_allowed: Vec<bool>,
    end_allowed: Vec<bool>,
}

/// Exact per-position posteriors under a [`TagScores`] instance.
///
/// Every unary row sums to one, and pairwise tables are consistent with the
/// unary rows on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct TagMarginals {
    len: usize,
    num_tags: usize,
    unary: Vec<f64>,
    /// Row-major `(len-1) x num_tags x num_tags`; entry `(i, j, k)` is the
    /// probability of tag `j` at position `i` and tag `k` at position `i+1`.
    pairwise: Vec<f64>,
    log_partition: f64,
}

/// Gradient of the negative log-likelihood with the same layout as the
/// emission and transition tables it differentiates.
#[derive(Debug, Clone, PartialEq)]
pub struct NllGradient {
    pub emission: Vec<f64>,
    pub transition: Vec<f64>,
}

impl TagScores {
    /// All-zero scores with every tag allowed everywhere.
    pub fn zeros(len: usize, num_tags: usize) -> Self {
        assert!(len >= 1, "scores need at least one position");
        assert!(num_tags >= 1, "scores need at least one tag");
        Self {
            len,
            num_tags,
            emission: vec![0.0; len * num_tags],
            transition: vec![0.0; num_tags * num_tags],
            start_allowed: vec![true; num_tags],
            end_allowed: vec![true; num_tags],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_tags(&self) -> usize {
        self.num_tags
    }

    pub fn emission(&self, i: usize, tag: usize) -> f64 {
        self.emission[i * self.num_tags + tag]
    }

    pub fn set_emission(&mut self, i: usize, tag: usize, score: f64) {
        self.emission[i * self.num_tags + tag] = score;
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.num_tags + to]
    }

    pub fn set_transition(&mut self, from: usize, to: usize, score: f64) {
        self.transition[from * self.num_tags + to] = score;
    }

    pub fn start_allowed(&self, tag: usize) -> bool {
        self.start_allowed[tag]
    }

    pub fn set_start_allowed(&mut self, tag: usize, allowed: bool) {
        self.start_allowed[tag] = allowed;
    }

    pub fn end_allowed(&self, tag: usize) -> bool {
        self.end_allowed[tag]
    }

    pub fn set_end_allowed(&mut self, tag: usize, allowed: bool) {
        self.end_allowed[tag] = allowed;
    }

    /// Unnormalized log-score of `tags`; [`NEG_INF`] when a mask or forbidden
    /// entry is hit. Panics when the length does not match.
    pub fn sequence_log_score(&self, tags: &[usize]) -> f64 {
        assert_eq!(tags.len(), self.len, "sequence length mismatch");
        if !self.start_allowed[tags[0]] || !self.end_allowed[tags[self.len - 1]] {
            return NEG_INF;
        }
        let mut total = 0.0;
        for (i, &tag) in tags.iter().enumerate() {
            let e = self.emission(i, tag);
            if is_forbidden(e) {
                return NEG_INF;
            }
            total += e;
            if i + 1 < self.len {
                let tr = self.transition(tag, tags[i + 1]);
                if is_forbidden(tr) {
                    return NEG_INF;
                }
                total += tr;
            }
        }
        total
    }

    /// Forward pass: log of the sum of exponentiated path scores.
    pub fn log_partition(&self) -> Result<f64, CrfError> {
        let alpha = self.forward()?;
        let last = &alpha[(self.len - 1) * self.num_tags..];
        let logz = log_sum_exp((0..self.num_tags).map(|k| {
            if self.end_allowed[k] {
                last[k]
            } else {
                NEG_INF
            }
        }));
        if is_forbidden(logz) {
            Err(CrfError::EmptySupport)
        } else {
            Ok(logz)
        }
    }

    /// Negative log-likelihood of `tags`: `logZ - score(tags)`.
    pub fn nll(&self, tags: &[usize]) -> Result<f64, CrfError> {
        let score = self.sequence_log_score(tags);
        if is_forbidden(score) {
            return Err(CrfError::ImpossibleSequence);
        }
        Ok(self.log_partition()? - score)
    }

    /// Exact unary and pairwise posteriors via forward-backward.
    pub fn marginals(&self) -> Result<TagMarginals, CrfError> {
        let k = self.num_tags;
        let t = self.len;
        let alpha = self.forward()?;
        let last = &alpha[(t - 1) * k..];
        let logz = log_sum_exp((0..k).map(|j| {
            if self.end_allowed[j] {
                last[j]
            } else {
                NEG_INF
            }
        }));
        if is_forbidden(logz) {
            return Err(CrfError::EmptySupport);
        }

        let mut beta = vec![NEG_INF; t * k];
        for j in 0..k {
            beta[(t - 1) * k + j] = if self.end_allowed[j] { 0.0 } else { NEG_INF };
        }
        for i in (0..t - 1).rev() {
            for j in 0..k {
                beta[i * k + j] = log_sum_exp((0..k).map(|next| {
                    self.transition(j, next) + self.emission(i + 1, next) + beta[(i + 1) * k + next]
                }));
            }
        }

        let mut unary = vec![0.0; t * k];
        for i in 0..t {
            for j in 0..k {
                let log_p = alpha[i * k + j] + beta[i * k + j] - logz;
                unary[i * k + j] = if is_forbidden(log_p) {
                    0.0
                } else {
                    log_p.exp()
                };
            }
        }
        let mut pairwise = vec![0.0; t.saturating_sub(1) * k * k];
        for i in 0..t - 1 {
            for j in 0..k {
                for next in 0..k {
                    let log_p = alpha[i * k + j]
                        + self.transition(j, next)
                        + self.emission(i + 1, next)
                        + beta[(i + 1) * k + next]
                        - logz;
                    pairwise[(i * k + j) * k + next] = if is_forbidden(log_p) {
                        0.0
                    } else {
                        log_p.exp()
                    };
                }
            }
        }
        Ok(TagMarginals {
            len: t,
            num_tags: k,
            unary,
            pairwise,
            log_partition: logz,
        })
    }

    /// Highest-scoring tag sequence and its log-score. Ties are broken toward
    /// the lowest tag index at every backtracking step.
    pub fn viterbi(&self) -> Result<(Vec<usize>, f64), CrfError> {
        let k = self.num_tags;
        let t = self.len;
        let mut best = vec![NEG_INF; t * k];
        let mut back = vec![0usize; t * k];
        for j in 0..k {
            best[j] = if self.start_allowed[j] {
                self.emission(0, j)
            } else {
                NEG_INF
            };
        }
        for i in 1..t {
            for j in 0..k {
                let mut arg = 0;
                let mut score = NEG_INF;
                for prev in 0..k {
                    let candidate = best[(i - 1) * k + prev] + self.transition(prev, j);
                    if candidate > score {
                        score = candidate;
                        arg = prev;
                    }
                }
                best[i * k + j] = score + self.emission(i, j);
                back[i * k + j] = arg;
            }
        }
        let mut final_tag = 0;
        let mut final_score = NEG_INF;
        for j in 0..k {
            let candidate = if self.end_allowed[j] {
                best[(t - 1) * k + j]
            } else {
                NEG_INF
            };
            if candidate > final_score {
                final_score = candidate;
                final_tag = j;
            }
        }
        if is_forbidden(final_score) {
            return Err(CrfError::EmptySupport);
        }
        let mut tags = vec![0usize; t];
        tags[t - 1] = final_tag;
        for i in (1..t).rev() {
            tags[i - 1] = back[i * k + tags[i]];
        }
        Ok((tags, final_score))
    }

    /// Gradient of [`Self::nll`] with respect to every emission and transition
    /// entry: posterior expectations minus observed indicators. Entries that
    /// are masked off carry zero gradient.
    pub fn nll_gradient(&self, tags: &[usize]) -> Result<NllGradient, CrfError> {
        if is_forbidden(self.sequence_log_score(tags)) {
            return Err(CrfError::ImpossibleSequence);
        }
        let marginals = self.marginals()?;
        let k = self.num_tags;
        let mut emission = marginals.unary.clone();
        for (i, &tag) in tags.iter().enumerate() {
            emission[i * k + tag] -= 1.0;
        }
        let mut transition = vec![0.0; k * k];
        for i in 0..self.len - 1 {
            for j in 0..k {
                for next in 0..k {
                    transition[j * k + next] += marginals.pairwise[(i * k + j) * k + next];
                }
            }
        }
        for w in tags.windows(2) {
            transition[w[0] * k + w[1]] -= 1.0;
        }
        Ok(NllGradient {
            emission,
            transition,
        })
    }

    fn forward(&self) -> Result<Vec<f64>, CrfError> {
        let k = self.num_tags;
        let t = self.len;
        let mut alpha = vec![NEG_INF; t * k];
        for j in 0..k {
            alpha[j] = if self.start_allowed[j] {
                self.emission(0, j)
            } else {
                NEG_INF
            };
        }
        for i in 1..t {
            for j in 0..k {
                let incoming = log_sum_exp(
                    (0..k).map(|prev| alpha[(i - 1) * k + prev] + self.transition(prev, j)),
                );
                alpha[i * k + j] = if is_forbidden(incoming) {
                    NEG_INF
                } else {
                    incoming + self.emission(i, j)
                };
            }
        }
        Ok(alpha)
    }
}

impl TagMarginals {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_tags(&self) -> usize {
        self.num_tags
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Probability of `tag` at position `i`.
    pub fn unary(&self, i: usize, tag: usize) -> f64 {
        self.unary[i * self.num_tags + tag]
    }

    /// Joint probability of `from` at position `i` and `to` at `i+1`.
    pub fn pairwise(&self, i: usize, from: usize, to: usize) -> f64 {
        self.pairwise[(i * self.num_tags + from) * self.num_tags + to]
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(NEG_INF, f64::max);
    if is_forbidden(max) {
        return NEG_INF;
    }
    let sum: f64 = values.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
