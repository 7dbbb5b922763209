//! Closed-form error and rate expressions.
//!
//! Logarithms inside construction parameters and error bounds are natural;
//! rates are in bits.

use serde::{Deserialize, Serialize};

use crate::codebook::CodebookParams;
use crate::geometry::min_separation_angle;

pub use crate::channels::{hoeffding_bound, poisson_concentration_bound};

/// Poisson code error `λ = exp((3A/2)(3/2 − ln n))`.
pub fn poisson_code_lambda(n: usize, peak: f64) -> f64 {
    (1.5 * peak * (1.5 - (n as f64).ln())).exp()
}

/// `λ = 2^{−nE}`.
pub fn rr_lambda(n: usize, e: f64) -> f64 {
    (-(n as f64) * e).exp2()
}

/// Packing lower bound on `log₂ N_ℓ`: `(n − ℓ + 1)/2 · log₂(2r_ℓ/d)`,
/// with `layer` 1-based.
pub fn prop4_log_size(n: usize, layer: usize, radius: f64, d: f64) -> f64 {
    (n + 1 - layer) as f64 / 2.0 * (2.0 * radius / d).log2()
}

/// `½ Σ_{ℓ≤L} (1 − δ)/2^ℓ`
pub fn linearithmic_rate_bound(delta: f64, layers: usize) -> f64 {
    0.5 * (1..=layers)
        .map(|l| (1.0 - delta) / 2f64.powi(l as i32))
        .sum::<f64>()
}

/// `η(L) = 1 − Σ_{ℓ≤L} 2^{−ℓ}`
pub fn eta(layers: usize) -> f64 {
    1.0 - (1..=layers).map(|l| 2f64.powi(-(l as i32))).sum::<f64>()
}

/// Closed-form rate-reliability radius
/// `r_ℓ = (t/6L)·(n^{1−δ}/(t/6L)²)^{1/2^ℓ}` (1-based `layer`).
pub fn rr_radius_closed_form(n: usize, delta: f64, t: f64, layers: usize, layer: usize) -> f64 {
    let c = t / (6.0 * layers as f64);
    c * ((n as f64).powf(1.0 - delta) / (c * c)).powf(2f64.powi(-(layer as i32)))
}

/// `(1 − η(L))/2 · log₂(1/E − δ ln n)`; `None` where the argument of the
/// logarithm is not positive.
pub fn rr_lower_bound(n: usize, delta: f64, e: f64, layers: usize) -> Option<f64> {
    let arg = 1.0 / e - delta * (n as f64).ln();
    (arg > 0.0).then(|| (1.0 - eta(layers)) / 2.0 * arg.log2())
}

/// Converse `(1 + η)·log₂(2/√(1 − e^{−E/2}))`.
pub fn rr_converse(e: f64, eta_slack: f64) -> f64 {
    (1.0 + eta_slack) * (2.0 / (1.0 - (-e / 2.0).exp()).sqrt()).log2()
}

/// Largest exponent admitted by the rate-reliability construction,
/// `1/(δ ln n)`.
pub fn rr_exponent_limit(n: usize, delta: f64) -> f64 {
    1.0 / (delta * (n as f64).ln())
}

/// Evaluated bounds for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCatalog {
    pub n: usize,
    pub layers: usize,
    pub delta: f64,
    /// Decoder acceptance radius.
    pub t: f64,
    pub d: f64,
    pub radii: Vec<f64>,
    pub lambda: f64,
    /// `L·λ`, the missed-identification bound.
    pub lambda1: f64,
    /// `λ`, the false-identification bound.
    pub lambda2: f64,
    /// Minimum sibling angle per layer; `None` where `d > 2r_ℓ`.
    pub theta: Vec<Option<f64>>,
    /// `√(2Ld)`
    pub delta_bound: f64,
    pub prop4_log_n: Vec<f64>,
    pub linearithmic_rate_bound: f64,
    pub e: Option<f64>,
    /// `E − log₂(L)/n`
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub eta_l: f64,
}

impl BoundCatalog {
    /// Catalog for the given parameters, decoder radius `t` and per-layer
    /// error `λ`.
    pub fn new(params: &CodebookParams, t: f64, lambda: f64, e: Option<f64>) -> Self {
        let layers = params.layers();
        let d = params.min_proj_dist;
        Self {
            n: params.n,
            layers,
            delta: params.delta,
            t,
            d,
            radii: params.radii.clone(),
            lambda,
            lambda1: layers as f64 * lambda,
            lambda2: lambda,
            theta: params
                .radii
                .iter()
                .map(|&r| min_separation_angle(r, d).ok())
                .collect(),
            delta_bound: (2.0 * layers as f64 * d).sqrt(),
            prop4_log_n: params
                .radii
                .iter()
                .enumerate()
                .map(|(l, &r)| prop4_log_size(params.n, l + 1, r, d))
                .collect(),
            linearithmic_rate_bound: linearithmic_rate_bound(params.delta, layers),
            e,
            e1: e.map(|e| e - (layers as f64).log2() / params.n as f64),
            e2: e,
            eta_l: eta(layers),
        }
    }

    /// `λ = 2 exp(−2t²)`.
    pub fn bernoulli(params: &CodebookParams, t: f64) -> Self {
        Self::new(params, t, hoeffding_bound(t), None)
    }

    /// `t = A ln n`, `λ = exp((3A/2)(3/2 − ln n))`.
    pub fn poisson(params: &CodebookParams, peak: f64) -> Self {
        let t = peak * (params.n as f64).ln();
        Self::new(params, t, poisson_code_lambda(params.n, peak), None)
    }

    /// `t = √(nE)`, `λ = 2^{−nE}`.
    pub fn rate_reliability(params: &CodebookParams, e: f64) -> Self {
        let t = (params.n as f64 * e).sqrt();
        Self::new(params, t, rr_lambda(params.n, e), Some(e))
    }

    /// Total of the per-layer packing bounds, `Σ_ℓ log₂ N_ℓ`.
    pub fn prop4_total(&self) -> f64 {
        self.prop4_log_n.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert!((linearithmic_rate_bound(0.2, 2) - 0.3).abs() < 1e-15);
        assert_eq!(eta(1), 0.5);
        assert_eq!(eta(3), 0.125);
        assert!((rr_converse(0.001, 0.0) - 6.4832).abs() < 1e-3);
        assert_eq!(hoeffding_bound(0.0), 2.0);
        assert!((hoeffding_bound(2.0) - 2.0 * (-8f64).exp()).abs() < 1e-18);
        assert!((poisson_concentration_bound(10.0, 1.0) - 2.0 * (-12.75f64).exp()).abs() < 1e-18);
        assert_eq!(rr_lambda(10, 0.1), 0.5);
    }

    #[test]
    fn rr_closed_form_first_layer() {
        let r1 = rr_radius_closed_form(256, 0.2, 3.0, 2, 1);
        assert!((r1 - 256f64.powf(0.4)).abs() < 1e-12);
    }

    #[test]
    fn rr_per_layer_error_is_below_lambda() {
        // 2e^{−2nE} ≤ 2^{−nE} once nE ≥ ln 2 / (2 − ln 2)
        for ne in [0.6f64, 1.0, 5.0, 50.0] {
            assert!(2.0 * (-2.0 * ne).exp() <= (-ne).exp2());
        }
    }
}
