//! Memoryless channels with a box input constraint.
//!
//! Each output letter `y_i` is drawn from its own SplitMix64 stream keyed by
//! `(seed, i)` (see [`crate::rng`]), so a block transmission is a pure
//! function of `(x, seed)`.

mod poisson;
mod reduction;

pub use poisson::{PoissonLetter, Ptrs, INVERSION_LIMIT};
pub use reduction::{apply_reduction, poisson_to_bernoulli_reduction, ReductionSpec};

use serde::{Deserialize, Serialize};

use crate::codebook::InputBox;
use crate::error::{Error, Result};
use crate::rng::{unit_f64, CoordinateStreams, LetterStream};

/// Anything that can be driven by the estimators in [`crate::experiments`].
pub trait Channel: Sync {
    fn input_box(&self) -> InputBox;

    /// Checks `x` against the input box and precomputes per-letter state.
    fn prepare(&self, x: &[f64]) -> Result<PreparedInput>;

    /// Upper bound on `Pr{|⟨Z, e⟩| > t}` for a unit vector `e`.
    fn concentration_bound(&self, t: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    Bernoulli,
    RestrictedBernoulli { a: f64, b: f64 },
    Poisson { peak: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub input_box: InputBox,
}

impl ChannelModel {
    /// `B(1|x) = x` on `[0, 1]`.
    pub fn bernoulli(n: usize) -> Self {
        Self {
            kind: ChannelKind::Bernoulli,
            input_box: InputBox::unit(n),
        }
    }

    /// The Bernoulli channel with inputs restricted to `[a, b] ⊂ [0, 1]`.
    pub fn restricted_bernoulli(n: usize, a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "restricted Bernoulli needs 0 ≤ a < b ≤ 1, got [{a}, {b}]"
            )));
        }
        Ok(Self {
            kind: ChannelKind::RestrictedBernoulli { a, b },
            input_box: InputBox::new(a, b, n)?,
        })
    }

    /// Poisson counts `P_x(y) = e^{−x} x^y / y!` with peak constraint `x ≤ A`.
    pub fn poisson(n: usize, peak: f64) -> Result<Self> {
        if !(peak.is_finite() && peak > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "peak A = {peak} must be positive"
            )));
        }
        Ok(Self {
            kind: ChannelKind::Poisson { peak },
            input_box: InputBox::new(0.0, peak, n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.input_box.n
    }

    /// One block transmission.
    pub fn transmit(&self, x: &[f64], seed: u64) -> Result<Vec<f64>> {
        let prepared = self.prepare(x)?;
        let streams = CoordinateStreams::new(x.len());
        let mut y = vec![0.0; x.len()];
        prepared.sample_into(&streams, CoordinateStreams::block_key(seed), &mut y);
        Ok(y)
    }
}

/// Hoeffding: `Pr{|⟨Z, e⟩| > t} ≤ 2 exp(−2t²)` for letters in `[0, 1]`.
pub fn hoeffding_bound(t: f64) -> f64 {
    2.0 * (-2.0 * t * t).exp()
}

/// Chernoff bound for Poisson noise with peak `A`:
/// `2 exp(−(3/2)t + (9/4)A)`.
pub fn poisson_concentration_bound(t: f64, peak: f64) -> f64 {
    2.0 * (-1.5 * t + 2.25 * peak).exp()
}

impl Channel for ChannelModel {
    fn input_box(&self) -> InputBox {
        self.input_box
    }

    fn prepare(&self, x: &[f64]) -> Result<PreparedInput> {
        self.input_box.check(x)?;
        let letters = match self.kind {
            ChannelKind::Bernoulli | ChannelKind::RestrictedBernoulli { .. } => Letters::Bernoulli,
            ChannelKind::Poisson { .. } => {
                Letters::Poisson(x.iter().map(|&l| PoissonLetter::new(l)).collect())
            }
        };
        Ok(PreparedInput {
            x: x.to_vec(),
            letters,
        })
    }

    fn concentration_bound(&self, t: f64) -> f64 {
        match self.kind {
            ChannelKind::Bernoulli | ChannelKind::RestrictedBernoulli { .. } => hoeffding_bound(t),
            ChannelKind::Poisson { peak } => poisson_concentration_bound(t, peak),
        }
    }
}

/// A channel that outputs its input unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noiseless {
    pub input_box: InputBox,
}

impl Channel for Noiseless {
    fn input_box(&self) -> InputBox {
        self.input_box
    }

    fn prepare(&self, x: &[f64]) -> Result<PreparedInput> {
        self.input_box.check(x)?;
        Ok(PreparedInput {
            x: x.to_vec(),
            letters: Letters::Fixed,
        })
    }

    fn concentration_bound(&self, _t: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone)]
enum Letters {
    Bernoulli,
    Poisson(Vec<PoissonLetter>),
    Fixed,
}

/// A channel input with per-letter sampler state, ready for repeated
/// transmissions.
#[derive(Debug, Clone)]
pub struct PreparedInput {
    x: Vec<f64>,
    letters: Letters,
}

impl PreparedInput {
    pub fn input(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Writes one channel output into `out`.
    pub fn sample_into(&self, streams: &CoordinateStreams, block_key: u64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.x.len());
        let keys = streams.keys();
        match &self.letters {
            Letters::Bernoulli => {
                for ((y, &x), &k) in out.iter_mut().zip(&self.x).zip(keys) {
                    let u = unit_f64(&mut LetterStream::new(block_key ^ k));
                    *y = if u < x { 1.0 } else { 0.0 };
                }
            }
            Letters::Poisson(letters) => {
                for ((y, letter), &k) in out.iter_mut().zip(letters.iter()).zip(keys) {
                    *y = letter.sample(&mut LetterStream::new(block_key ^ k)) as f64;
                }
            }
            Letters::Fixed => out.copy_from_slice(&self.x),
        }
    }

    /// `⟨y − x, e⟩` for one channel output, without materializing `y`.
    pub fn noise_projection(&self, streams: &CoordinateStreams, block_key: u64, e: &[f64]) -> f64 {
        debug_assert_eq!(e.len(), self.x.len());
        let keys = streams.keys();
        match &self.letters {
            Letters::Bernoulli => {
                let mut acc = 0.0;
                for ((&x, &w), &k) in self.x.iter().zip(e).zip(keys) {
                    let u = unit_f64(&mut LetterStream::new(block_key ^ k));
                    acc += if u < x { (1.0 - x) * w } else { -x * w };
                }
                acc
            }
            Letters::Poisson(letters) => {
                let mut acc = 0.0;
                for (((&x, &w), letter), &k) in self.x.iter().zip(e).zip(letters.iter()).zip(keys) {
                    let y = letter.sample(&mut LetterStream::new(block_key ^ k)) as f64;
                    acc += (y - x) * w;
                }
                acc
            }
            Letters::Fixed => 0.0,
        }
    }
}

/// `z = y − x`
pub fn noise_of(y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    crate::geometry::check_dim(x.len(), y.len())?;
    Ok(y.iter().zip(x).map(|(a, b)| a - b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_bernoulli_inputs_are_deterministic() {
        let ch = ChannelModel::bernoulli(50);
        assert_eq!(ch.transmit(&[0.0; 50], 3).unwrap(), vec![0.0; 50]);
        assert_eq!(ch.transmit(&[1.0; 50], 3).unwrap(), vec![1.0; 50]);
    }

    #[test]
    fn transmit_checks_box() {
        let ch = ChannelModel::restricted_bernoulli(3, 0.2, 0.8).unwrap();
        assert!(matches!(
            ch.transmit(&[0.5, 0.1, 0.5], 0),
            Err(Error::InputOutOfBox { index: 1, .. })
        ));
        let p = ChannelModel::poisson(2, 1.0).unwrap();
        assert!(p.transmit(&[1.0, 1.5], 0).is_err());
        assert!(ChannelModel::poisson(2, 0.0).is_err());
        assert!(ChannelModel::restricted_bernoulli(2, 0.8, 0.2).is_err());
    }

    #[test]
    fn noise_arithmetic() {
        assert_eq!(noise_of(&[1.0], &[0.25]).unwrap(), vec![0.75]);
        assert_eq!(noise_of(&[5.0], &[2.0]).unwrap(), vec![3.0]);
        assert_eq!(noise_of(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
        assert!(noise_of(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn projection_matches_materialized_output() {
        let n = 64;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).fract()).collect();
        let e: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64 - 5.0) / 10.0).collect();
        let streams = CoordinateStreams::new(n);
        for ch in [
            ChannelModel::bernoulli(n),
            ChannelModel::poisson(n, 1.0).unwrap(),
        ] {
            let prepared = ch.prepare(&x).unwrap();
            for seed in 0..20u64 {
                let key = CoordinateStreams::block_key(seed);
                let mut y = vec![0.0; n];
                prepared.sample_into(&streams, key, &mut y);
                let z = noise_of(&y, &x).unwrap();
                let direct: f64 = z.iter().zip(&e).map(|(a, b)| a * b).sum();
                assert!((direct - prepared.noise_projection(&streams, key, &e)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_stub_echoes() {
        let ch = Noiseless {
            input_box: InputBox::unit(3),
        };
        let p = ch.prepare(&[0.1, 0.2, 0.3]).unwrap();
        let streams = CoordinateStreams::new(3);
        let mut y = vec![0.0; 3];
        p.sample_into(&streams, 9, &mut y);
        assert_eq!(y, vec![0.1, 0.2, 0.3]);
    }
}
