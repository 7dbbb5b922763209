use crate::error::{Error, Result};

/// Post-processing that turns a channel into a restricted Bernoulli one.
///
/// Feeding input `x` and applying `post_process` to each output letter gives
/// a Bernoulli letter with parameter `induced_param(x)`; over the input box
/// that parameter sweeps `interval`.
#[derive(Debug, Clone, Copy)]
pub struct ReductionSpec {
    pub post_process: fn(f64) -> u8,
    pub induced_param: fn(f64) -> f64,
    pub interval: (f64, f64),
}

fn is_zero(y: f64) -> u8 {
    u8::from(y == 0.0)
}

fn exp_neg(x: f64) -> f64 {
    (-x).exp()
}

/// Poisson with peak `A` plus `V(y) = 1{y = 0}`: a Bernoulli letter with
/// parameter `e^{−x}`, covering `[e^{−A}, 1]`.
pub fn poisson_to_bernoulli_reduction(peak: f64) -> Result<ReductionSpec> {
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "peak A = {peak} must be positive"
        )));
    }
    Ok(ReductionSpec {
        post_process: is_zero,
        induced_param: exp_neg,
        interval: ((-peak).exp(), 1.0),
    })
}

pub fn apply_reduction(spec: &ReductionSpec, raw_y: &[f64]) -> Vec<u8> {
    raw_y.iter().map(|&y| (spec.post_process)(y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_and_map() {
        let spec = poisson_to_bernoulli_reduction(1.0).unwrap();
        assert!((spec.interval.0 - 0.36787944117144233).abs() < 1e-15);
        assert_eq!(spec.interval.1, 1.0);
        assert_eq!((spec.induced_param)(0.0), 1.0);
        assert_eq!(apply_reduction(&spec, &[0.0, 3.0, 0.0]), vec![1, 0, 1]);
        assert_eq!(apply_reduction(&spec, &[0.0; 4]), vec![1; 4]);
        assert!(poisson_to_bernoulli_reduction(-1.0).is_err());
    }
}
