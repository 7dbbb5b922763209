use serde::{Deserialize, Serialize};

use super::bounds::{self, BoundCatalog};
use crate::codebook::{CodebookParams, ExpurgationReport, PrimitiveCodebook};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n: usize,
    pub layers: usize,
    pub n_retained: usize,
    /// `log₂ N / n`
    pub linear_rate: f64,
    /// `log₂ N / (n log₂ n)`
    pub linearithmic_rate: f64,
    /// Packing lower bound `Σ_ℓ (n − ℓ + 1)/2 · log₂(2r_ℓ/d)` on `log₂ N_P`.
    pub theoretical_primitive_log_n: f64,
    pub e: Option<f64>,
    /// Main term of the achievability bound, `(1 − η(L))/2 · log₂(1/E − δ ln n)`.
    pub rr_lower_bound: Option<f64>,
    /// Converse `log₂(2/√(1 − e^{−E/2}))` evaluated with `η = 0`.
    pub rr_upper_bound: Option<f64>,
}

pub fn rate_report(
    cb: &PrimitiveCodebook,
    expurgation: &ExpurgationReport,
    e: Option<f64>,
) -> Result<RateReport> {
    if expurgation.retained == 0 {
        return Err(Error::EmptyCodebook);
    }
    let p = cb.params();
    let n = p.n as f64;
    let linear_rate = (expurgation.retained as f64).log2() / n;
    let catalog = BoundCatalog::new(p, 0.0, 0.0, e);
    Ok(RateReport {
        n: p.n,
        layers: p.layers(),
        n_retained: expurgation.retained,
        linear_rate,
        linearithmic_rate: linear_rate / n.log2(),
        theoretical_primitive_log_n: catalog.prop4_total(),
        e,
        rr_lower_bound: e.and_then(|e| bounds::rr_lower_bound(p.n, p.delta, e, p.layers())),
        rr_upper_bound: e.map(|e| bounds::rr_converse(e, 0.0)),
    })
}

/// Builds the rate-reliability codebook for exponent `E`:
/// `t = √(nE)`, `d = 3t`, `r₁ = n^{(1−δ)/2}`, `r_{ℓ+1} = √(t·r_ℓ/6L)`.
pub fn rr_build(
    n: usize,
    layers: usize,
    delta: f64,
    e: f64,
    branching: Vec<usize>,
    seed: u64,
) -> Result<(PrimitiveCodebook, BoundCatalog)> {
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent E = {e} must be positive"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} must lie in (0, 1)"
        )));
    }
    let limit = bounds::rr_exponent_limit(n, delta);
    if e >= limit {
        return Err(Error::RegimeViolation { exponent: e, limit });
    }
    if branching.len() != layers {
        return Err(Error::InvalidParameter(format!(
            "{layers} layers but {} branching factors",
            branching.len()
        )));
    }
    let params = CodebookParams::rate_reliability(n, delta, e, branching, seed);
    let catalog = BoundCatalog::rate_reliability(&params, e);
    Ok((PrimitiveCodebook::build(params)?, catalog))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_word_has_zero_rate() {
        let cb = PrimitiveCodebook::build(CodebookParams::separated(8, 1.0, vec![1], 0)).unwrap();
        let r = rate_report(&cb, &ExpurgationReport::unexpurgated(1), None).unwrap();
        assert_eq!(r.linear_rate, 0.0);
        assert_eq!(r.linearithmic_rate, 0.0);
        let mut empty = ExpurgationReport::unexpurgated(1);
        empty.retained = 0;
        assert!(matches!(
            rate_report(&cb, &empty, None),
            Err(Error::EmptyCodebook)
        ));
    }

    #[test]
    fn regime_is_enforced() {
        let limit = bounds::rr_exponent_limit(256, 0.2);
        assert!(matches!(
            rr_build(256, 2, 0.2, limit, vec![2, 2], 0),
            Err(Error::RegimeViolation { .. })
        ));
        assert!(matches!(
            rr_build(256, 2, 0.2, 2.0 * limit, vec![2, 2], 0),
            Err(Error::RegimeViolation { .. })
        ));
    }
}
