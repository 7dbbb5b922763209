use super::{check_dim, ArrangementSpec, Subspace, SEPARATION_RTOL, TOL_RADIUS};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};
use crate::rng;

/// Outcome of checking the projective separation condition on a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub ok: bool,
    /// Minimum of `‖Π_{u_k} u_j − u_k‖` over ordered distinct pairs;
    /// `+∞` for fewer than two points.
    pub min_sep: f64,
    /// `(j, k)` realizing `min_sep` when the check fails.
    pub violating_pair: Option<(usize, usize)>,
}

/// Places `spec.count` points `base + r·u` on the sphere of radius
/// `spec.radius` inside `sub`, pairwise at projective distance at least
/// `spec.min_proj_dist` (measured relative to the subspace base point).
///
/// Candidates are tried in a fixed order: first the vertices `±f₁, ±f₂, …`
/// of a random orthonormal frame of the subspace, then uniform points on the
/// sphere. A candidate is kept when it clears every point kept so far.
/// Fails with [`Error::PlacementExhausted`] once `spec.max_attempts`
/// consecutive candidates are rejected.
pub fn generate_angle_dense(
    sub: &Subspace,
    spec: &ArrangementSpec,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let dirs = arrange_directions(sub, spec, seed)?;
    let base = sub.base_point();
    Ok(dirs
        .into_iter()
        .map(|u| {
            base.iter()
                .zip(&u)
                .map(|(b, x)| b + spec.radius * x)
                .collect()
        })
        .collect())
}

/// Unit directions of an angle-dense arrangement; see [`generate_angle_dense`].
pub(crate) fn arrange_directions(
    sub: &Subspace,
    spec: &ArrangementSpec,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if sub.dim() < 2 {
        return Err(Error::InvalidParameter(format!(
            "arrangements need a subspace of dimension at least 2, got {}",
            sub.dim()
        )));
    }
    // r (1 − cos φ) ≥ d  ⇔  cos φ ≤ 1 − d/r
    let max_cos = 1.0 - spec.min_proj_dist * (1.0 - SEPARATION_RTOL) / spec.radius;
    let mut rng = rng::seeded(seed);
    let mut frame: Vec<Vec<f64>> = Vec::new();
    let mut structured = 0usize;
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(spec.count);
    let mut attempts = 0usize;

    while kept.len() < spec.count {
        if attempts == spec.max_attempts {
            return Err(Error::PlacementExhausted {
                placed: kept.len(),
                requested: spec.count,
                max_attempts: spec.max_attempts,
            });
        }
        attempts += 1;
        let candidate = if structured < 2 * sub.dim() {
            let axis = structured / 2;
            if axis == frame.len() {
                let f = sub.sample_unit_orthogonal_to(&frame, &mut rng);
                frame.push(f);
            }
            let sign = if structured % 2 == 0 { 1.0 } else { -1.0 };
            structured += 1;
            frame[axis].iter().map(|x| sign * x).collect()
        } else {
            sub.sample_unit(&mut rng)
        };
        if kept.iter().all(|w| dot(&candidate, w) <= max_cos) {
            kept.push(candidate);
            attempts = 0;
        }
    }
    Ok(kept)
}

/// Checks that `points` lie on a common sphere around `center` and that
/// every ordered pair satisfies `‖Π_{u_k} u_j − u_k‖ ≥ d`, with
/// `u = point − center`.
pub fn verify_angle_dense(center: &[f64], points: &[Vec<f64>], d: f64) -> Result<SeparationReport> {
    let rel: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            check_dim(center.len(), p.len())?;
            Ok(sub(p, center))
        })
        .collect::<Result<_>>()?;
    if let Some(first) = rel.first() {
        let radius = norm(first);
        if radius == 0.0 {
            return Err(Error::ZeroDirection);
        }
        for (index, u) in rel.iter().enumerate() {
            let found = norm(u);
            if (found - radius).abs() > TOL_RADIUS * radius {
                return Err(Error::RadiusMismatch {
                    index,
                    found,
                    expected: radius,
                });
            }
        }
    }

    let mut min_sep = f64::INFINITY;
    let mut argmin = None;
    for (k, uk) in rel.iter().enumerate() {
        let uk_sq = dot(uk, uk);
        for (j, uj) in rel.iter().enumerate() {
            if j == k {
                continue;
            }
            let c = dot(uj, uk) / uk_sq;
            let sep = uk.iter().map(|x| (c * x - x).powi(2)).sum::<f64>().sqrt();
            if sep < min_sep {
                min_sep = sep;
                argmin = Some((j, k));
            }
        }
    }
    let ok = min_sep >= d * (1.0 - SEPARATION_RTOL);
    Ok(SeparationReport {
        ok,
        min_sep,
        violating_pair: if ok { None } else { argmin },
    })
}
