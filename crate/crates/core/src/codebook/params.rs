use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the layer radii and the projective distance `d` were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMode {
    /// `r_ℓ = n^{(1−δ)/2^ℓ}`, `d = 3 ln n`.
    Capacity,
    /// `d = 3t`, innermost radius `r_L = d`, outer radii from
    /// `r_ℓ = 6L·r_{ℓ+1}²/t`.
    Separated,
    /// `t = √(nE)`, `d = 3t`, `r₁ = n^{(1−δ)/2}`, `r_{ℓ+1} = √(t·r_ℓ/6L)`.
    RateReliability,
    /// Radii and `d` supplied by the caller.
    Explicit,
}

impl RadiusMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Capacity => "capacity",
            Self::Separated => "separated",
            Self::RateReliability => "rate_reliability",
            Self::Explicit => "explicit",
        }
    }
}

impl std::str::FromStr for RadiusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "capacity" => Ok(Self::Capacity),
            "separated" => Ok(Self::Separated),
            "rate_reliability" | "rate-reliability" | "rr" => Ok(Self::RateReliability),
            "explicit" => Ok(Self::Explicit),
            other => Err(Error::InvalidParameter(format!(
                "unknown radius mode `{other}`"
            ))),
        }
    }
}

/// Construction parameters of a primitive codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookParams {
    pub n: usize,
    pub delta: f64,
    /// `r_1 > r_2 > … > r_L`.
    pub radii: Vec<f64>,
    /// The projective distance `d`.
    pub min_proj_dist: f64,
    /// `N_1, …, N_L`.
    pub branching: Vec<usize>,
    pub seed: u64,
    pub mode: RadiusMode,
}

/// `r_ℓ = n^{(1−δ)/2^ℓ}` for `ℓ = 1..=layers`.
pub fn capacity_radii(n: usize, delta: f64, layers: usize) -> Vec<f64> {
    let n = n as f64;
    (1..=layers)
        .map(|l| n.powf((1.0 - delta) / 2f64.powi(l as i32)))
        .collect()
}

/// Radii of the separated schedule for acceptance radius `t`.
pub fn separated_radii(t: f64, layers: usize) -> Vec<f64> {
    let big_l = layers as f64;
    let mut radii = vec![3.0 * t; layers];
    for l in (0..layers.saturating_sub(1)).rev() {
        radii[l] = 6.0 * big_l * radii[l + 1] * radii[l + 1] / t;
    }
    radii
}

/// Radii of the rate-reliability schedule by iterating
/// `r_{ℓ+1} = √(t·r_ℓ / 6L)` from `r₁ = n^{(1−δ)/2}`.
pub fn rr_radii(n: usize, delta: f64, t: f64, layers: usize) -> Vec<f64> {
    let c = t / (6.0 * layers as f64);
    let mut radii = Vec::with_capacity(layers);
    let mut r = (n as f64).powf((1.0 - delta) / 2.0);
    for _ in 0..layers {
        radii.push(r);
        r = (c * r).sqrt();
    }
    radii
}

impl CodebookParams {
    pub fn capacity(n: usize, delta: f64, branching: Vec<usize>, seed: u64) -> Self {
        Self {
            n,
            delta,
            radii: capacity_radii(n, delta, branching.len()),
            min_proj_dist: 3.0 * (n as f64).ln(),
            branching,
            seed,
            mode: RadiusMode::Capacity,
        }
    }

    /// Separated schedule for decoder radius `t`: every distinct pair ends
    /// up at projective distance at least `2t` at its first differing layer.
    pub fn separated(n: usize, t: f64, branching: Vec<usize>, seed: u64) -> Self {
        Self {
            n,
            delta: 0.0,
            radii: separated_radii(t, branching.len()),
            min_proj_dist: 3.0 * t,
            branching,
            seed,
            mode: RadiusMode::Separated,
        }
    }

    pub fn rate_reliability(
        n: usize,
        delta: f64,
        e: f64,
        branching: Vec<usize>,
        seed: u64,
    ) -> Self {
        let t = (n as f64 * e).sqrt();
        Self {
            n,
            delta,
            radii: rr_radii(n, delta, t, branching.len()),
            min_proj_dist: 3.0 * t,
            branching,
            seed,
            mode: RadiusMode::RateReliability,
        }
    }

    pub fn explicit(
        n: usize,
        radii: Vec<f64>,
        min_proj_dist: f64,
        branching: Vec<usize>,
        seed: u64,
    ) -> Self {
        Self {
            n,
            delta: 0.0,
            radii,
            min_proj_dist,
            branching,
            seed,
            mode: RadiusMode::Explicit,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn layers(&self) -> usize {
        self.radii.len()
    }

    /// `Π N_ℓ`
    pub fn leaf_count(&self) -> usize {
        self.branching.iter().product()
    }

    /// `√(Σ r_ℓ²)`, the distance of every codeword from the center.
    pub fn outer_radius(&self) -> f64 {
        self.radii.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let layers = self.layers();
        if layers == 0 {
            return Err(Error::InvalidParameter(
                "at least one layer is required".into(),
            ));
        }
        if self.branching.len() != layers {
            return Err(Error::InvalidParameter(format!(
                "{} radii but {} branching factors",
                layers,
                self.branching.len()
            )));
        }
        if layers >= self.n {
            return Err(Error::DimensionUnderflow { layers, n: self.n });
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must lie in [0, 1)",
                self.delta
            )));
        }
        if self.branching.contains(&0) {
            return Err(Error::InvalidParameter(
                "branching factors must be positive".into(),
            ));
        }
        if !(self.min_proj_dist.is_finite() && self.min_proj_dist > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "projective distance d = {} must be positive",
                self.min_proj_dist
            )));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidParameter(
                "radii must be positive and finite".into(),
            ));
        }
        if self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "radii must be strictly decreasing, got {:?}",
                self.radii
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_radii_values() {
        let r = capacity_radii(256, 0.2, 2);
        assert!((r[0] - 256f64.powf(0.4)).abs() < 1e-12);
        assert!((r[1] - 256f64.powf(0.2)).abs() < 1e-12);
    }

    #[test]
    fn separated_schedule_follows_recursion() {
        let t = 64f64.ln();
        let r = separated_radii(t, 3);
        assert_eq!(r[2], 3.0 * t);
        for l in 0..2 {
            let next = (t * r[l] / 18.0).sqrt();
            assert!((next - r[l + 1]).abs() <= 1e-12 * r[l + 1]);
        }
    }

    #[test]
    fn validation() {
        let ok = CodebookParams::separated(32, 2.0, vec![4, 4], 0);
        ok.validate().unwrap();
        let deep = CodebookParams::separated(3, 1.0, vec![2, 2, 2], 0);
        assert!(matches!(
            deep.validate(),
            Err(Error::DimensionUnderflow { .. })
        ));
        let flat = CodebookParams::explicit(8, vec![2.0, 2.0], 1.0, vec![2, 2], 0);
        assert!(flat.validate().is_err());
        let mismatched = CodebookParams::explicit(8, vec![2.0], 1.0, vec![2, 2], 0);
        assert!(mismatched.validate().is_err());
    }

    #[test]
    fn mode_round_trips_through_str() {
        for m in [
            RadiusMode::Capacity,
            RadiusMode::Separated,
            RadiusMode::RateReliability,
            RadiusMode::Explicit,
        ] {
            assert_eq!(m.as_str().parse::<RadiusMode>().unwrap(), m);
        }
    }
}
