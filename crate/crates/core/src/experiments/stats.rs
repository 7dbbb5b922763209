//! Binomial confidence intervals and tests.

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};
use statrs::function::beta::inv_beta_reg;

/// Confidence level of every interval reported by the estimators.
pub const CONFIDENCE: f64 = 0.99;

/// Exact (Clopper–Pearson) two-sided interval for `k` successes in `n`.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "need 0 ≤ k ≤ n, n > 0");
    let alpha = 1.0 - confidence;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else if k == n {
        (alpha / 2.0).powf(1.0 / nf)
    } else {
        inv_beta_reg(kf, nf - kf + 1.0, alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else if k == 0 {
        1.0 - (alpha / 2.0).powf(1.0 / nf)
    } else {
        inv_beta_reg(kf + 1.0, nf - kf, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// `√(p(1−p)/n)` with `p` clamped to `[0, 1]`.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Two-sided p-value of observing `k` successes in `n` Bernoulli(`p`)
/// trials: twice the smaller tail, capped at 1.
pub fn binomial_test_two_sided(k: u64, n: u64, p: f64) -> f64 {
    let dist = Binomial::new(p, n).expect("valid binomial parameters");
    let lower = dist.cdf(k);
    let upper = if k == 0 { 1.0 } else { dist.sf(k - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}

/// Pearson chi-square test that two samples (`k1` of `n1`, `k2` of `n2`)
/// share one success probability. Returns the p-value (1 degree of freedom).
pub fn chi_square_two_sample(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    let (k1, n1, k2, n2) = (k1 as f64, n1 as f64, k2 as f64, n2 as f64);
    let pooled = (k1 + k2) / (n1 + n2);
    if pooled == 0.0 || pooled == 1.0 {
        return 1.0;
    }
    let cells = [
        (k1, n1 * pooled),
        (n1 - k1, n1 * (1.0 - pooled)),
        (k2, n2 * pooled),
        (n2 - k2, n2 * (1.0 - pooled)),
    ];
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    ChiSquared::new(1.0)
        .expect("one degree of freedom")
        .sf(stat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_edges() {
        let (lo, hi) = clopper_pearson(0, 100, 0.99);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.005f64.powf(0.01))).abs() < 1e-15);
        let (lo, hi) = clopper_pearson(100, 100, 0.99);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.9);
    }

    #[test]
    fn clopper_pearson_reference_value() {
        // Beta(5, 96) 0.5% and Beta(6, 95) 99.5% quantiles
        let (lo, hi) = clopper_pearson(5, 100, 0.99);
        assert!((lo - 0.010_940_333_584_790_029).abs() < 1e-9, "{lo}");
        assert!((hi - 0.135_144_682_535_623_5).abs() < 1e-9, "{hi}");
    }

    #[test]
    fn binomial_test_symmetric_case() {
        // X ~ Bin(10, ½), k = 2: P(X ≤ 2) = 56/1024
        let p = binomial_test_two_sided(2, 10, 0.5);
        assert!((p - 112.0 / 1024.0).abs() < 1e-12);
        assert!(binomial_test_two_sided(5, 10, 0.5) >= 1.0 - 1e-12);
    }

    #[test]
    fn chi_square_detects_difference() {
        assert!(chi_square_two_sample(500, 1000, 505, 1000) > 0.5);
        assert!(chi_square_two_sample(500, 1000, 600, 1000) < 1e-4);
    }
}
