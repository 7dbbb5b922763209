//! The layered projection decoder.
//!
//! To test whether `y` carries codeword `s^L`, layer ℓ projects `y` onto the
//! line through the parent center `o_{s^{ℓ−1}}` along `v_{s_{ℓ−1}→s_ℓ}` and
//! measures the distance to `o_{s^ℓ}`; with `e` the unit direction this is
//! `|⟨y − o_{s^{ℓ−1}}, e⟩ − r_ℓ|`. The id is accepted iff every layer's
//! distance is at most `t`. Evaluation stops at the first failing layer.

use serde::{Deserialize, Serialize};

use crate::codebook::{CodewordId, PrimitiveCodebook};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMode {
    /// `t = ln n`
    Capacity,
    /// `t = A ln n`
    Poisson,
    /// `t = √(nE)`
    RateReliability,
    Custom,
}

/// Per-layer acceptance radius. The acceptance region is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderParams {
    pub t: f64,
    pub mode: DecoderMode,
}

impl DecoderParams {
    pub fn capacity(n: usize) -> Self {
        Self {
            t: (n as f64).ln(),
            mode: DecoderMode::Capacity,
        }
    }

    pub fn poisson(n: usize, peak: f64) -> Self {
        Self {
            t: peak * (n as f64).ln(),
            mode: DecoderMode::Poisson,
        }
    }

    pub fn rate_reliability(n: usize, e: f64) -> Self {
        Self {
            t: (n as f64 * e).sqrt(),
            mode: DecoderMode::RateReliability,
        }
    }

    pub fn custom(t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "acceptance radius t = {t} must be positive"
            )));
        }
        Ok(Self {
            t,
            mode: DecoderMode::Custom,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerOutcome {
    pub pass: bool,
    pub distance: f64,
}

/// One layer test: `|⟨y − parent, direction/‖direction‖⟩ − ‖direction‖| ≤ t`.
pub fn layer_test(
    y: &[f64],
    parent_center: &[f64],
    direction: &[f64],
    t: f64,
) -> Result<LayerOutcome> {
    crate::geometry::check_dim(direction.len(), y.len())?;
    crate::geometry::check_dim(direction.len(), parent_center.len())?;
    let r = norm(direction);
    if r == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let coef: f64 = y
        .iter()
        .zip(parent_center)
        .zip(direction)
        .map(|((a, p), v)| (a - p) * v)
        .sum::<f64>()
        / r;
    let distance = (coef - r).abs();
    Ok(LayerOutcome {
        pass: distance <= t,
        distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub accepted: bool,
    /// 1-based layer of the first failed test.
    pub failed_layer: Option<usize>,
    /// Distances of the layers evaluated so far.
    pub per_layer_distance: Vec<f64>,
}

/// The per-layer data of one id, precomputed for repeated testing.
#[derive(Debug, Clone)]
pub struct DecodePath {
    id: CodewordId,
    parents: Vec<Vec<f64>>,
    units: Vec<Vec<f64>>,
    radii: Vec<f64>,
}

impl DecodePath {
    pub fn new(cb: &PrimitiveCodebook, id: &CodewordId) -> Result<Self> {
        cb.leaf_index(id)?;
        let dirs = cb.path_directions(id.indices())?;
        let mut parent = cb.center().to_vec();
        let mut parents = Vec::with_capacity(dirs.len());
        let mut units = Vec::with_capacity(dirs.len());
        let mut radii = Vec::with_capacity(dirs.len());
        for v in dirs {
            let r = norm(v);
            parents.push(parent.clone());
            units.push(v.iter().map(|x| x / r).collect());
            radii.push(r);
            parent.iter_mut().zip(v).for_each(|(p, x)| *p += x);
        }
        Ok(Self {
            id: id.clone(),
            parents,
            units,
            radii,
        })
    }

    pub fn id(&self) -> &CodewordId {
        &self.id
    }

    #[inline]
    fn distance(&self, y: &[f64], l: usize) -> f64 {
        let coef: f64 = y
            .iter()
            .zip(&self.parents[l])
            .zip(&self.units[l])
            .map(|((a, p), e)| (a - p) * e)
            .sum();
        (coef - self.radii[l]).abs()
    }

    /// Fast accept/reject without recording distances.
    #[inline]
    pub fn accepts(&self, y: &[f64], t: f64) -> bool {
        (0..self.units.len()).all(|l| self.distance(y, l) <= t)
    }

    pub fn decide(&self, y: &[f64], t: f64) -> Decision {
        let mut per_layer_distance = Vec::with_capacity(self.units.len());
        for l in 0..self.units.len() {
            let d = self.distance(y, l);
            per_layer_distance.push(d);
            if d > t {
                return Decision {
                    accepted: false,
                    failed_layer: Some(l + 1),
                    per_layer_distance,
                };
            }
        }
        Decision {
            accepted: true,
            failed_layer: None,
            per_layer_distance,
        }
    }
}

/// Runs the layer tests of `id` on `y`, stopping at the first failure.
pub fn identify(
    y: &[f64],
    cb: &PrimitiveCodebook,
    id: &CodewordId,
    params: &DecoderParams,
) -> Result<Decision> {
    crate::geometry::check_dim(cb.n(), y.len())?;
    Ok(DecodePath::new(cb, id)?.decide(y, params.t))
}

/// `‖Π_v(y − parent) − v‖` with full vector arithmetic; a cross-check for
/// the scalar form used by [`layer_test`].
pub fn layer_distance_full(y: &[f64], parent_center: &[f64], direction: &[f64]) -> Result<f64> {
    let r2 = dot(direction, direction);
    if r2 == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let rel: Vec<f64> = y.iter().zip(parent_center).map(|(a, b)| a - b).collect();
    let c = dot(&rel, direction) / r2;
    Ok(direction
        .iter()
        .map(|v| (c * v - v).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::CodebookParams;

    #[test]
    fn layer_test_examples() {
        let parent = [1.0, 2.0, 3.0];
        let v = [0.0, 3.0, 4.0];
        let at_center = [1.0, 5.0, 7.0];
        let o = layer_test(&at_center, &parent, &v, 0.5).unwrap();
        assert!(o.pass && o.distance < 1e-12);

        let t = 0.75;
        let edge = [1.0, 5.0 + 0.6 * t, 7.0 + 0.8 * t];
        let o = layer_test(&edge, &parent, &v, t).unwrap();
        assert!((o.distance - t).abs() < 1e-12);
        let exact = layer_test(&[0.0, 0.0, 0.0], &[0.0, 0.0, -1.0], &[0.0, 0.0, 2.0], 1.0).unwrap();
        assert_eq!(exact.distance, 1.0);
        assert!(exact.pass);

        assert!(matches!(
            layer_test(&at_center, &parent, &[0.0; 3], 1.0),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn scalar_and_full_forms_agree() {
        let y = [0.3, -1.2, 4.0, 0.5];
        let p = [0.1, 0.1, 0.1, 0.1];
        let v = [1.0, -2.0, 0.5, 3.0];
        let a = layer_test(&y, &p, &v, 1.0).unwrap().distance;
        let b = layer_distance_full(&y, &p, &v).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn noiseless_self_and_cross_identification() {
        let n = 32;
        let t = (n as f64).ln();
        let cb = PrimitiveCodebook::build(CodebookParams::separated(n, t, vec![4, 4], 2)).unwrap();
        let params = DecoderParams::capacity(n);
        let ids = cb.leaf_ids();
        for id in &ids {
            let w = cb.codeword_vector(id).unwrap();
            let d = identify(&w, &cb, id, &params).unwrap();
            assert!(d.accepted);
            assert!(d.per_layer_distance.iter().all(|x| x.abs() < 1e-9));
        }
        let other = cb.codeword_vector(&ids[1]).unwrap();
        let d = identify(&other, &cb, &ids[0], &params).unwrap();
        assert!(!d.accepted);
        assert_eq!(d.failed_layer, Some(2));
        assert_eq!(d.per_layer_distance.len(), 2);
        let far = cb.codeword_vector(&ids[15]).unwrap();
        assert_eq!(
            identify(&far, &cb, &ids[0], &params).unwrap().failed_layer,
            Some(1)
        );
        assert!(identify(&far, &cb, &CodewordId::new(vec![5, 1]), &params).is_err());
    }
}
