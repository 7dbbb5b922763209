//! High-dimensional vector geometry: projections onto lines, the
//! projective-distance/angle correspondence, sphere arrangements inside affine
//! subspaces, and Haar-random rotations.
//!
//! Vectors are plain `&[f64]` / `Vec<f64>`; dimensions are checked at the
//! public boundary and reported as [`Error::DimMismatch`].

mod arrangement;
mod rotation;

pub(crate) use arrangement::arrange_directions;
pub use arrangement::{generate_angle_dense, verify_angle_dense, SeparationReport};
pub use rotation::{haar_rotation, Rotation};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, orthogonalize};

/// Orthonormality tolerance for subspace bases and path directions.
pub const TOL_ORTH: f64 = 1e-10;
/// Relative tolerance for "lies on the sphere of radius r".
pub const TOL_RADIUS: f64 = 1e-9;
/// Relative slack when comparing a projective separation against `d`.
///
/// Structured arrangements (square, cross-polytope) hit the threshold
/// exactly in real arithmetic and miss it by an ulp in floating point.
pub const SEPARATION_RTOL: f64 = 1e-12;
/// Per-point attempt budget for greedy placement.
pub const DEFAULT_MAX_ATTEMPTS: usize = 1_000_000;

/// Scalar and norm of the orthogonal projection of `z` onto `span(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// `⟨z, v/‖v‖⟩`
    pub coefficient: f64,
    /// `|coefficient|`, the length of the projected vector.
    pub norm: f64,
}

pub fn project_onto(z: &[f64], v: &[f64]) -> Result<Projection> {
    check_dim(v.len(), z.len())?;
    let v_norm = norm(v);
    if v_norm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let coefficient = dot(z, v) / v_norm;
    Ok(Projection {
        coefficient,
        norm: coefficient.abs(),
    })
}

/// Smallest angle `θ` with `r (1 − cos θ) = d`, i.e. `2 asin(√(d / 2r))`.
///
/// Two points on a sphere of radius `r` whose angle is at least this far
/// apart have projective distance at least `d`.
pub fn min_separation_angle(radius: f64, min_proj_dist: f64) -> Result<f64> {
    if !(radius > 0.0 && min_proj_dist > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius ({radius}) and projective distance ({min_proj_dist}) must be positive"
        )));
    }
    let ratio = min_proj_dist / (2.0 * radius);
    if ratio > 1.0 + SEPARATION_RTOL {
        return Err(Error::Infeasible {
            radius,
            min_proj_dist,
        });
    }
    Ok(2.0 * ratio.min(1.0).sqrt().asin())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, found })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Span {
    /// Explicit orthonormal basis.
    Basis(Vec<Vec<f64>>),
    /// Orthogonal complement of the span of these orthonormal vectors.
    ComplementOf(Vec<Vec<f64>>),
}

/// An affine subspace `base_point + span(...)` of `ℝⁿ`.
///
/// The span is stored either as an explicit orthonormal basis or as the
/// orthogonal complement of a (short) list of orthonormal vectors. Codebook
/// layers use the second form: the complement of `ℓ − 1` path directions has
/// dimension `n − ℓ + 1` and materializing it would cost `O(n²)` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    base_point: Vec<f64>,
    span: Span,
}

impl Subspace {
    /// Subspace spanned by an explicit orthonormal basis.
    pub fn new(base_point: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self> {
        check_orthonormal(base_point.len(), &basis)?;
        Ok(Self {
            base_point,
            span: Span::Basis(basis),
        })
    }

    /// The whole ambient space, anchored at `base_point`.
    pub fn full(base_point: Vec<f64>) -> Self {
        Self {
            base_point,
            span: Span::ComplementOf(Vec::new()),
        }
    }

    /// `span(excluded)^⊥`, anchored at `base_point`.
    pub fn orthogonal_complement(base_point: Vec<f64>, excluded: Vec<Vec<f64>>) -> Result<Self> {
        check_orthonormal(base_point.len(), &excluded)?;
        Ok(Self {
            base_point,
            span: Span::ComplementOf(excluded),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.base_point.len()
    }

    pub fn dim(&self) -> usize {
        match &self.span {
            Span::Basis(b) => b.len(),
            Span::ComplementOf(ex) => self.ambient_dim() - ex.len(),
        }
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    /// An explicit orthonormal basis of the span.
    ///
    /// For complement subspaces this runs Gram–Schmidt over the standard
    /// basis, `O(n³)`; intended for inspection and tests.
    pub fn basis(&self) -> Vec<Vec<f64>> {
        match &self.span {
            Span::Basis(b) => b.clone(),
            Span::ComplementOf(ex) => {
                let n = self.ambient_dim();
                let mut acc: Vec<Vec<f64>> = ex.clone();
                let mut out = Vec::with_capacity(self.dim());
                for i in 0..n {
                    if out.len() == self.dim() {
                        break;
                    }
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    orthogonalize(&mut v, &acc);
                    let len = norm(&v);
                    if len > 1e-6 {
                        v.iter_mut().for_each(|x| *x /= len);
                        acc.push(v.clone());
                        out.push(v);
                    }
                }
                out
            }
        }
    }

    /// Whether `v` (a direction, not a point) lies in the span.
    pub fn contains_direction(&self, v: &[f64]) -> bool {
        let len = norm(v);
        if len == 0.0 {
            return true;
        }
        match &self.span {
            Span::ComplementOf(ex) => ex.iter().all(|e| (dot(e, v) / len).abs() <= TOL_ORTH),
            Span::Basis(b) => {
                let mut r = v.to_vec();
                orthogonalize(&mut r, b);
                norm(&r) / len <= TOL_ORTH
            }
        }
    }

    /// A uniformly random unit vector of the span.
    pub(crate) fn sample_unit<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let mut v = match &self.span {
                Span::Basis(b) => {
                    let mut v = vec![0.0; self.ambient_dim()];
                    for e in b {
                        let g: f64 = rng.sample(StandardNormal);
                        crate::linalg::axpy(g, e, &mut v);
                    }
                    v
                }
                Span::ComplementOf(ex) => {
                    let mut v: Vec<f64> = (0..self.ambient_dim())
                        .map(|_| rng.sample(StandardNormal))
                        .collect();
                    orthogonalize(&mut v, ex);
                    v
                }
            };
            let len = norm(&v);
            if len > 1e-12 {
                v.iter_mut().for_each(|x| *x /= len);
                return v;
            }
        }
    }

    /// A uniformly random unit vector of the span orthogonal to `others`
    /// (which must already lie in the span and be orthonormal).
    pub(crate) fn sample_unit_orthogonal_to<R: Rng>(
        &self,
        others: &[Vec<f64>],
        rng: &mut R,
    ) -> Vec<f64> {
        loop {
            let mut v = self.sample_unit(rng);
            orthogonalize(&mut v, others);
            if let Span::ComplementOf(ex) = &self.span {
                orthogonalize(&mut v, ex);
            }
            let len = norm(&v);
            if len > 1e-6 {
                v.iter_mut().for_each(|x| *x /= len);
                return v;
            }
        }
    }
}

fn check_orthonormal(n: usize, vectors: &[Vec<f64>]) -> Result<()> {
    if vectors.len() > n {
        return Err(Error::InvalidParameter(format!(
            "{} basis vectors in {n} dimensions",
            vectors.len()
        )));
    }
    for (i, a) in vectors.iter().enumerate() {
        check_dim(n, a.len())?;
        if (norm(a) - 1.0).abs() > TOL_ORTH {
            return Err(Error::InvalidParameter(format!(
                "basis vector {i} has norm {}",
                norm(a)
            )));
        }
        for (j, b) in vectors.iter().enumerate().skip(i + 1) {
            let c = dot(a, b);
            if c.abs() > TOL_ORTH {
                return Err(Error::InvalidParameter(format!(
                    "basis vectors {i} and {j} have inner product {c}"
                )));
            }
        }
    }
    Ok(())
}

/// Sphere arrangement request: `count` points at radius `radius` whose
/// pairwise projective distance is at least `min_proj_dist`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrangementSpec {
    pub radius: f64,
    pub min_proj_dist: f64,
    pub count: usize,
    pub max_attempts: usize,
}

impl ArrangementSpec {
    pub fn new(radius: f64, min_proj_dist: f64, count: usize) -> Self {
        Self {
            radius,
            min_proj_dist,
            count,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn with_max_attempts(mut self, max_attempts: usize) -> Self {
        self.max_attempts = max_attempts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 || self.max_attempts == 0 {
            return Err(Error::InvalidParameter(
                "arrangement count and max_attempts must be positive".into(),
            ));
        }
        min_separation_angle(self.radius, self.min_proj_dist).map(|_| ())
    }
}
