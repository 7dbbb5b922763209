//! Monte Carlo estimators.
//!
//! Trial `k` of an experiment with seed `s` uses the block key
//! `mix(derive(s, k))`, so results do not depend on how rayon splits the
//! trial range: workers only return integer counts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{binomial_sigma, clopper_pearson, CONFIDENCE};
use crate::channels::{Channel, PreparedInput};
use crate::codebook::{CodewordId, PrimitiveCodebook};
use crate::decoder::{DecodePath, DecoderParams};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::rng::{self, CoordinateStreams};

/// Bounds below this are not resolvable by any feasible trial count; the
/// comparison then amounts to "no failures observed".
pub const RESOLUTION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Resolved,
    ZeroFailuresExpected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `p̂ ≤ bound`, or the bound lies above the lower confidence limit.
    Consistent,
    Exceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub failures: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// 99% Clopper–Pearson interval.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bound: f64,
    pub verdict: Verdict,
    pub regime: Regime,
}

impl ErrorEstimate {
    pub fn from_counts(failures: u64, trials: u64, bound: f64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::NoTrials);
        }
        let p_hat = failures as f64 / trials as f64;
        let (ci_lo, ci_hi) = clopper_pearson(failures, trials, CONFIDENCE);
        let verdict = if p_hat <= bound || bound >= ci_lo {
            Verdict::Consistent
        } else {
            Verdict::Exceeded
        };
        let regime = if bound < RESOLUTION_FLOOR {
            Regime::ZeroFailuresExpected
        } else {
            Regime::Resolved
        };
        Ok(Self {
            failures,
            trials,
            p_hat,
            ci_lo,
            ci_hi,
            bound,
            verdict,
            regime,
        })
    }

    pub fn consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }

    /// `p̂ ≤ bound + k·σ` with `σ` the binomial standard deviation of the
    /// estimator at the bound.
    pub fn within_sigmas(&self, k: f64) -> bool {
        self.p_hat <= self.bound + k * binomial_sigma(self.bound, self.trials)
    }
}

/// Trials per unit of parallel work.
const CHUNK: u64 = 1 << 12;

fn par_chunks(trials: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(move |c| (c * CHUNK, ((c + 1) * CHUNK).min(trials)))
}

#[inline]
fn trial_key(seed: u64, trial: u64) -> u64 {
    CoordinateStreams::block_key(rng::derive(seed, trial))
}

fn unit(direction: &[f64]) -> Result<Vec<f64>> {
    let len = norm(direction);
    if len == 0.0 {
        return Err(Error::ZeroDirection);
    }
    Ok(direction.iter().map(|x| x / len).collect())
}

/// Fraction of trials with `|⟨Z, e⟩| > t`, for each `t` in `ts`, sharing the
/// same noise draws across all radii.
pub fn concentration_sweep<C: Channel + ?Sized>(
    ch: &C,
    x: &[f64],
    direction: &[f64],
    ts: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<ErrorEstimate>> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    crate::geometry::check_dim(x.len(), direction.len())?;
    let prepared = ch.prepare(x)?;
    let e = unit(direction)?;
    let streams = CoordinateStreams::new(x.len());
    let counts = par_chunks(trials)
        .fold(
            || vec![0u64; ts.len()],
            |mut acc, (start, end)| {
                for k in start..end {
                    let z = prepared
                        .noise_projection(&streams, trial_key(seed, k), &e)
                        .abs();
                    for (c, &t) in acc.iter_mut().zip(ts) {
                        if z > t {
                            *c += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; ts.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    counts
        .into_iter()
        .zip(ts)
        .map(|(c, &t)| ErrorEstimate::from_counts(c, trials, ch.concentration_bound(t)))
        .collect()
}

/// Estimates `Pr{|⟨Z, direction/‖direction‖⟩| > t}` and compares it with the
/// channel's concentration bound.
pub fn concentration_experiment<C: Channel + ?Sized>(
    ch: &C,
    x: &[f64],
    direction: &[f64],
    t: f64,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    Ok(concentration_sweep(ch, x, direction, &[t], trials, seed)?.remove(0))
}

struct Candidate {
    path: DecodePath,
    input: PreparedInput,
}

fn candidates<C: Channel + ?Sized>(
    cb: &PrimitiveCodebook,
    ch: &C,
    ids: &[CodewordId],
) -> Result<Vec<Candidate>> {
    crate::geometry::check_dim(cb.n(), ch.input_box().n)?;
    ids.iter()
        .map(|id| {
            Ok(Candidate {
                path: DecodePath::new(cb, id)?,
                input: ch.prepare(&cb.codeword_vector(id)?)?,
            })
        })
        .collect()
}

fn count_trials<F>(n: usize, trials: u64, failed: F) -> u64
where
    F: Fn(&mut [f64], u64) -> bool + Sync,
{
    par_chunks(trials)
        .map_init(
            || vec![0.0; n],
            |buf, (start, end)| (start..end).map(|k| u64::from(failed(buf, k))).sum::<u64>(),
        )
        .sum()
}

/// Missed identification: transmit the codeword of an id and test the same
/// id. Trial `k` uses `ids[k mod |ids|]`. The bound is `L·λ` with `λ` the
/// channel's concentration bound at the decoder radius.
pub fn estimate_missed_id<C: Channel + ?Sized>(
    cb: &PrimitiveCodebook,
    ch: &C,
    params: &DecoderParams,
    ids: &[CodewordId],
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    if ids.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    let cands = candidates(cb, ch, ids)?;
    let streams = CoordinateStreams::new(cb.n());
    let t = params.t;
    let misses = count_trials(cb.n(), trials, |y, k| {
        let c = &cands[(k % cands.len() as u64) as usize];
        c.input.sample_into(&streams, trial_key(seed, k), y);
        !c.path.accepts(y, t)
    });
    let bound = cb.layers() as f64 * ch.concentration_bound(t);
    ErrorEstimate::from_counts(misses, trials, bound)
}

/// How the (tested, transmitted) pair is chosen in
/// [`estimate_false_id`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSampling {
    /// A fresh ordered pair of distinct ids per trial.
    Random,
    /// Always the pair with the smallest projective separation.
    AdversarialMinSep,
    /// Test the first id against transmissions of the second.
    Fixed(CodewordId, CodewordId),
}

/// The `(tested, transmitted)` pair with the smallest projective separation
/// among `ids`.
pub fn adversarial_pair(
    cb: &PrimitiveCodebook,
    ids: &[CodewordId],
) -> Result<(CodewordId, CodewordId)> {
    Ok(cb.separation_among(ids, None)?.argmin)
}

/// False identification: transmit codeword `j`, test id `i ≠ j`. The bound
/// is `λ`.
pub fn estimate_false_id<C: Channel + ?Sized>(
    cb: &PrimitiveCodebook,
    ch: &C,
    params: &DecoderParams,
    ids: &[CodewordId],
    sampling: &PairSampling,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let t = params.t;
    let bound = ch.concentration_bound(t);
    let streams = CoordinateStreams::new(cb.n());
    let fixed = match sampling {
        PairSampling::Fixed(i, j) => {
            if i == j {
                return Err(Error::SameIdPair(i.to_string()));
            }
            Some((i.clone(), j.clone()))
        }
        PairSampling::AdversarialMinSep => {
            if ids.len() < 2 {
                return Err(Error::TooFewWords(ids.len()));
            }
            Some(adversarial_pair(cb, ids)?)
        }
        PairSampling::Random => None,
    };

    let accepts = match fixed {
        Some((tested, sent)) => {
            let path = DecodePath::new(cb, &tested)?;
            let input = candidates(cb, ch, std::slice::from_ref(&sent))?
                .remove(0)
                .input;
            count_trials(cb.n(), trials, |y, k| {
                input.sample_into(&streams, trial_key(seed, k), y);
                path.accepts(y, t)
            })
        }
        None => {
            if ids.len() < 2 {
                return Err(Error::TooFewWords(ids.len()));
            }
            let cands = candidates(cb, ch, ids)?;
            let m = cands.len();
            count_trials(cb.n(), trials, |y, k| {
                let trial_seed = rng::derive(seed, k);
                let mut pick = rng::LetterStream::new(rng::derive(trial_seed, 1));
                let i = pick.random_range(0..m);
                let mut j = pick.random_range(0..m - 1);
                if j >= i {
                    j += 1;
                }
                cands[j]
                    .input
                    .sample_into(&streams, CoordinateStreams::block_key(trial_seed), y);
                cands[i].path.accepts(y, t)
            })
        }
    };
    ErrorEstimate::from_counts(accepts, trials, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{ChannelModel, Noiseless};
    use crate::codebook::{CodebookParams, InputBox};

    #[test]
    fn vacuous_bound_at_zero_radius() {
        let ch = ChannelModel::bernoulli(10);
        let est = concentration_experiment(&ch, &[0.5; 10], &[1.0; 10], 0.0, 1000, 1).unwrap();
        assert_eq!(est.bound, 2.0);
        assert!(est.consistent());
    }

    #[test]
    fn zero_trials_are_rejected() {
        let ch = ChannelModel::bernoulli(4);
        assert!(matches!(
            concentration_experiment(&ch, &[0.5; 4], &[1.0; 4], 1.0, 0, 1),
            Err(Error::NoTrials)
        ));
    }

    #[test]
    fn noiseless_stub_never_errs() {
        let n = 16;
        let cb = PrimitiveCodebook::build(CodebookParams::explicit(
            n,
            vec![0.4, 0.2],
            0.2,
            vec![3, 3],
            4,
        ))
        .unwrap();
        let ch = Noiseless {
            input_box: InputBox::unit(n),
        };
        let params = DecoderParams::custom(0.05).unwrap();
        let ids = cb.leaf_ids();
        let miss = estimate_missed_id(&cb, &ch, &params, &ids, 200, 3).unwrap();
        assert_eq!(miss.failures, 0);
        for s in [PairSampling::Random, PairSampling::AdversarialMinSep] {
            let fa = estimate_false_id(&cb, &ch, &params, &ids, &s, 200, 3).unwrap();
            assert_eq!(fa.failures, 0);
        }
        let same = PairSampling::Fixed(ids[0].clone(), ids[0].clone());
        assert!(matches!(
            estimate_false_id(&cb, &ch, &params, &ids, &same, 10, 0),
            Err(Error::SameIdPair(_))
        ));
        assert!(matches!(
            estimate_missed_id(&cb, &ch, &params, &[], 10, 0),
            Err(Error::EmptyCodebook)
        ));
        assert!(matches!(
            estimate_false_id(&cb, &ch, &params, &ids[..1], &PairSampling::Random, 10, 0),
            Err(Error::TooFewWords(1))
        ));
    }

    #[test]
    fn verdict_rule() {
        let e = ErrorEstimate::from_counts(3, 1000, 0.002).unwrap();
        assert!(e.p_hat > e.bound && e.consistent());
        let e = ErrorEstimate::from_counts(50, 1000, 0.002).unwrap();
        assert!(!e.consistent());
        let e = ErrorEstimate::from_counts(0, 1000, 1e-18).unwrap();
        assert_eq!(e.regime, Regime::ZeroFailuresExpected);
        assert!(e.consistent());
    }
}
