//! Poisson variates from a per-coordinate SplitMix64 stream.

use rand::RngCore;
use statrs::function::gamma::ln_gamma;

use crate::rng::unit_f64;

/// Intensities up to this value use sequential-search inversion.
pub const INVERSION_LIMIT: f64 = 30.0;

const BRANCHLESS_LEN: usize = 32;

/// Per-letter sampler with the intensity-dependent constants precomputed.
#[derive(Debug, Clone)]
pub enum PoissonLetter {
    /// Sequential search of `u` against the running CDF
    /// `Σ_{j≤k} e^{−λ}λ^j/j!`, tabulated once per letter.
    Inversion {
        cdf: Box<[f64]>,
    },
    Ptrs(Ptrs),
}

impl PoissonLetter {
    pub fn new(lam: f64) -> Self {
        if lam <= INVERSION_LIMIT {
            Self::Inversion {
                cdf: inversion_table(lam),
            }
        } else {
            Self::Ptrs(Ptrs::new(lam))
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut impl RngCore) -> u64 {
        match self {
            Self::Inversion { cdf } => {
                let u = unit_f64(rng);
                if cdf.len() <= BRANCHLESS_LEN {
                    // the CDF is monotone, so counting entries ≤ u equals the
                    // search index; a fixed-length count avoids mispredicts
                    cdf.iter().map(|&c| (u >= c) as u64).sum()
                } else {
                    let mut k = 0;
                    while k < cdf.len() && u >= cdf[k] {
                        k += 1;
                    }
                    k as u64
                }
            }
            Self::Ptrs(p) => p.sample(rng),
        }
    }
}

/// Running CDF up to the point where it stops growing in double precision.
/// A uniform beyond the last entry maps to the table length.
fn inversion_table(lam: f64) -> Box<[f64]> {
    let mut p = (-lam).exp();
    let mut cdf = p;
    let mut out = vec![cdf];
    let mut k = 0u64;
    loop {
        k += 1;
        p *= lam / k as f64;
        let next = cdf + p;
        if p == 0.0 || (next == cdf && k as f64 > lam) {
            break;
        }
        cdf = next;
        out.push(cdf);
    }
    out.into_boxed_slice()
}

/// Hörmann's transformed rejection with squeeze (PTRS), for `λ ≥ 10`.
#[derive(Debug, Clone, Copy)]
pub struct Ptrs {
    lam: f64,
    log_lam: f64,
    a: f64,
    b: f64,
    log_inv_alpha: f64,
    vr: f64,
}

impl Ptrs {
    pub fn new(lam: f64) -> Self {
        let b = 0.931 + 2.53 * lam.sqrt();
        Self {
            lam,
            log_lam: lam.ln(),
            a: -0.059 + 0.02483 * b,
            b,
            log_inv_alpha: (1.1239 + 1.1328 / (b - 3.4)).ln(),
            vr: 0.9277 - 3.6224 / (b - 2.0),
        }
    }

    pub fn sample(&self, rng: &mut impl RngCore) -> u64 {
        loop {
            let u = unit_f64(rng) - 0.5;
            let v = unit_f64(rng);
            let us = 0.5 - u.abs();
            let k = ((2.0 * self.a / us + self.b) * u + self.lam + 0.43).floor();
            if us >= 0.07 && v <= self.vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + self.log_inv_alpha - (self.a / (us * us) + self.b).ln();
            let rhs = -self.lam + k * self.log_lam - ln_gamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_xoshiro::SplitMix64;

    fn moments(lam: f64, draws: usize) -> (f64, f64) {
        let letter = PoissonLetter::new(lam);
        let mut rng = SplitMix64::seed_from_u64(lam.to_bits());
        let xs: Vec<f64> = (0..draws).map(|_| letter.sample(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        (mean, var)
    }

    #[test]
    fn table_matches_pmf() {
        let cdf = inversion_table(2.0);
        assert!(matches!(
            PoissonLetter::new(2.0),
            PoissonLetter::Inversion { .. }
        ));
        assert!((cdf[0] - (-2f64).exp()).abs() < 1e-16);
        assert!((cdf[2] - 5.0 * (-2f64).exp()).abs() < 1e-15);
        assert!(*cdf.last().unwrap() > 1.0 - 1e-15);
    }

    #[test]
    fn zero_intensity_is_deterministic() {
        let letter = PoissonLetter::new(0.0);
        let mut rng = SplitMix64::seed_from_u64(1);
        assert!((0..1000).all(|_| letter.sample(&mut rng) == 0));
    }

    #[test]
    fn moments_match_on_both_branches() {
        let draws = 200_000;
        for lam in [0.3, 2.0, 12.0, 45.0, 400.0] {
            let (mean, var) = moments(lam, draws);
            let se_mean = (lam / draws as f64).sqrt();
            // Var of the sample variance ≈ (μ₄ − σ⁴)/N = (λ + 2λ²)/N
            let se_var = ((lam + 2.0 * lam * lam) / draws as f64).sqrt();
            assert!((mean - lam).abs() < 4.0 * se_mean, "lam {lam}: mean {mean}");
            assert!((var - lam).abs() < 4.0 * se_var, "lam {lam}: var {var}");
        }
    }

    #[test]
    fn ptrs_probability_mass_near_mode() {
        let lam = 50.0;
        let letter = PoissonLetter::new(lam);
        assert!(matches!(letter, PoissonLetter::Ptrs(_)));
        let mut rng = SplitMix64::seed_from_u64(3);
        let draws = 400_000;
        let hits = (0..draws).filter(|_| letter.sample(&mut rng) == 50).count();
        let p = (-lam + 50.0 * lam.ln() - ln_gamma(51.0)).exp();
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!(((hits as f64 / draws as f64) - p).abs() < 4.0 * se);
    }
}
