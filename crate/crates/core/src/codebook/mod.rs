//! The nested multi-layer spherical codebook.
//!
//! Layer 1 places `N_1` points on a sphere of radius `r_1` around the
//! center. Each layer-ℓ point `o_{s^ℓ}` spawns `N_{ℓ+1}` children on a sphere
//! of radius `r_{ℓ+1}` inside the orthogonal complement of the directions
//! that led to it. Codewords are the leaves:
//! `o_{s^L} = center + Σ_ℓ v_{s_{ℓ−1}→s_ℓ}`.

mod expurgate;
mod json;
mod params;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use expurgate::{expurgate, expurgate_best, Expurgation, ExpurgationReport, InputBox};
pub use json::{CodebookDocument, NodeRecord, ParamsRecord, SCHEMA_VERSION};
pub use params::{capacity_radii, rr_radii, separated_radii, CodebookParams, RadiusMode};

use crate::error::{Error, Result};
use crate::geometry::{arrange_directions, ArrangementSpec, Rotation, Subspace};
use crate::linalg::{dot, norm};
use crate::rng;

/// Leaf name `(s_1, …, s_L)`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CodewordId(pub Vec<usize>);

impl CodewordId {
    pub fn new(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based layer of the first differing index, if any.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .position(|(a, b)| a != b)
            .map(|p| p + 1)
    }
}

impl fmt::Display for CodewordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

impl std::str::FromStr for CodewordId {
    type Err = Error;

    /// Accepts `1,3,2`, `(1,3,2)` or `1.3.2`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        inner
            .split([',', '.'])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::UnknownId(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(CodewordId)
    }
}

/// A primitive codebook: the full tree of direction vectors.
///
/// `directions[ℓ]` holds the layer-(ℓ+1) vectors `v_{s_ℓ→s_{ℓ+1}}` (length
/// `r_{ℓ+1}`) for every node of that layer, in mixed-radix order: the
/// children of layer-ℓ node `p` sit at `p·N_{ℓ+1} .. (p+1)·N_{ℓ+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveCodebook {
    params: CodebookParams,
    center: Vec<f64>,
    directions: Vec<Vec<Vec<f64>>>,
}

/// Minimum projective separation over leaf pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationSummary {
    pub min_sep: f64,
    /// `d − √(2Ld)`.
    pub bound: f64,
    /// `(own, other)`: testing `own` against the codeword of `other`
    /// realizes `min_sep`.
    pub argmin: (CodewordId, CodewordId),
    pub pairs_checked: usize,
    pub exhaustive: bool,
}

/// Leaf count up to which separation is checked over all ordered pairs.
pub const EXHAUSTIVE_LEAF_LIMIT: usize = 1_000;
/// Pairs drawn when the codebook is too large for the exhaustive check.
pub const DEFAULT_SAMPLED_PAIRS: usize = 10_000;

impl PrimitiveCodebook {
    /// Builds the codebook around `(½, …, ½)`, the center of the unit cube.
    pub fn build(params: CodebookParams) -> Result<Self> {
        let center = vec![0.5; params.n];
        Self::build_at(params, center)
    }

    /// Builds the codebook around an arbitrary center.
    ///
    /// Each node's child arrangement is drawn with its own derived seed, so
    /// the result depends only on `params` (seed included) and `center`.
    pub fn build_at(params: CodebookParams, center: Vec<f64>) -> Result<Self> {
        params.validate()?;
        crate::geometry::check_dim(params.n, center.len())?;
        let layers = params.layers();
        let mut directions: Vec<Vec<Vec<f64>>> = Vec::with_capacity(layers);
        // unit path directions of every node of the previous layer
        let mut parent_paths: Vec<Vec<Vec<f64>>> = vec![Vec::new()];

        for l in 0..layers {
            let spec =
                ArrangementSpec::new(params.radii[l], params.min_proj_dist, params.branching[l]);
            let mut layer = Vec::with_capacity(parent_paths.len() * params.branching[l]);
            let mut paths = Vec::with_capacity(layer.capacity());
            for (p, ancestors) in parent_paths.iter().enumerate() {
                let sub = Subspace::orthogonal_complement(center.clone(), ancestors.clone())?;
                let seed = rng::derive_path(params.seed, &[l as u64, p as u64]);
                for u in arrange_directions(&sub, &spec, seed)? {
                    layer.push(u.iter().map(|x| x * params.radii[l]).collect());
                    let mut path = ancestors.clone();
                    path.push(u);
                    paths.push(path);
                }
            }
            directions.push(layer);
            parent_paths = paths;
        }
        Ok(Self {
            params,
            center,
            directions,
        })
    }

    /// Reassembles a codebook from stored parts, checking the tree shape,
    /// the radii and the path orthogonality.
    pub fn from_parts(
        params: CodebookParams,
        center: Vec<f64>,
        directions: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        params.validate()?;
        crate::geometry::check_dim(params.n, center.len())?;
        if directions.len() != params.layers() {
            return Err(Error::Schema(format!(
                "{} direction layers for {} radii",
                directions.len(),
                params.layers()
            )));
        }
        let mut expected = 1usize;
        for (l, layer) in directions.iter().enumerate() {
            expected *= params.branching[l];
            if layer.len() != expected {
                return Err(Error::Schema(format!(
                    "layer {} has {} nodes, expected {expected}",
                    l + 1,
                    layer.len()
                )));
            }
            for v in layer {
                crate::geometry::check_dim(params.n, v.len())?;
            }
        }
        let cb = Self {
            params,
            center,
            directions,
        };
        let report = cb.check_invariants();
        if let Some(msg) = report.first_failure() {
            return Err(Error::Schema(msg));
        }
        Ok(cb)
    }

    pub fn params(&self) -> &CodebookParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn layers(&self) -> usize {
        self.params.layers()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn leaf_count(&self) -> usize {
        self.params.leaf_count()
    }

    /// Direction vectors of every layer, in mixed-radix node order.
    pub fn directions(&self) -> &[Vec<Vec<f64>>] {
        &self.directions
    }

    /// All leaf ids in lexicographic order.
    pub fn leaf_ids(&self) -> Vec<CodewordId> {
        (0..self.leaf_count()).map(|i| self.id_of_leaf(i)).collect()
    }

    /// The id of the leaf at mixed-radix position `index`.
    pub fn id_of_leaf(&self, mut index: usize) -> CodewordId {
        let mut out = vec![0; self.layers()];
        for l in (0..self.layers()).rev() {
            out[l] = index % self.params.branching[l] + 1;
            index /= self.params.branching[l];
        }
        CodewordId(out)
    }

    /// Node positions along the path of a (possibly partial) id.
    fn node_indices(&self, prefix: &[usize]) -> Result<Vec<usize>> {
        if prefix.len() > self.layers() {
            return Err(Error::UnknownId(CodewordId(prefix.to_vec()).to_string()));
        }
        let mut pos = 0usize;
        let mut out = Vec::with_capacity(prefix.len());
        for (l, &s) in prefix.iter().enumerate() {
            if s == 0 || s > self.params.branching[l] {
                return Err(Error::UnknownId(CodewordId(prefix.to_vec()).to_string()));
            }
            pos = pos * self.params.branching[l] + (s - 1);
            out.push(pos);
        }
        Ok(out)
    }

    /// Mixed-radix position of a full id.
    pub fn leaf_index(&self, id: &CodewordId) -> Result<usize> {
        if id.len() != self.layers() {
            return Err(Error::UnknownId(id.to_string()));
        }
        Ok(*self
            .node_indices(&id.0)?
            .last()
            .expect("at least one layer"))
    }

    /// The direction vectors `v_1, …, v_k` along a prefix.
    pub fn path_directions(&self, prefix: &[usize]) -> Result<Vec<&[f64]>> {
        let nodes = self.node_indices(prefix)?;
        Ok(nodes
            .iter()
            .enumerate()
            .map(|(l, &p)| self.directions[l][p].as_slice())
            .collect())
    }

    /// `o_{s^k} = center + Σ_{ℓ≤k} v_ℓ`; the empty prefix gives the center.
    pub fn node_center(&self, prefix: &[usize]) -> Result<Vec<f64>> {
        let mut out = self.center.clone();
        for v in self.path_directions(prefix)? {
            for (o, x) in out.iter_mut().zip(v) {
                *o += x;
            }
        }
        Ok(out)
    }

    pub fn codeword_vector(&self, id: &CodewordId) -> Result<Vec<f64>> {
        if id.len() != self.layers() {
            return Err(Error::UnknownId(id.to_string()));
        }
        self.node_center(&id.0)
    }

    /// The subspace in which the children of node `prefix` were placed:
    /// the complement of the unit path directions, anchored at the node.
    pub fn complement(&self, prefix: &[usize]) -> Result<Subspace> {
        let units = self
            .path_directions(prefix)?
            .into_iter()
            .map(|v| {
                let r = norm(v);
                v.iter().map(|x| x / r).collect()
            })
            .collect();
        Subspace::orthogonal_complement(self.node_center(prefix)?, units)
    }

    /// Sibling points (children of `prefix`) as absolute vectors.
    pub fn children(&self, prefix: &[usize]) -> Result<Vec<Vec<f64>>> {
        if prefix.len() >= self.layers() {
            return Ok(Vec::new());
        }
        let parent = self.node_center(prefix)?;
        let l = prefix.len();
        let base = self.node_indices(prefix)?.last().copied().unwrap_or(0);
        let k = self.params.branching[l];
        Ok(self.directions[l][base * k..(base + 1) * k]
            .iter()
            .map(|v| parent.iter().zip(v).map(|(a, b)| a + b).collect())
            .collect())
    }

    /// All internal-node prefixes (including the root), layer by layer.
    pub fn internal_prefixes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for l in 0..self.layers().saturating_sub(1) {
            let mut next = Vec::new();
            for p in &frontier {
                for s in 1..=self.params.branching[l] {
                    let mut q = p.clone();
                    q.push(s);
                    next.push(q);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Rotates every direction vector by `rotation` about the center.
    pub fn rotate(&self, rotation: &Rotation) -> Result<Self> {
        crate::geometry::check_dim(self.n(), rotation.dim())?;
        let directions = self
            .directions
            .iter()
            .map(|layer| layer.iter().map(|v| rotation.apply(v)).collect())
            .collect();
        Ok(Self {
            params: self.params.clone(),
            center: self.center.clone(),
            directions,
        })
    }

    /// Scales every direction vector (and therefore every radius and `d`)
    /// by `scale` and moves the center to `new_center`.
    pub fn affine_map(&self, scale: f64, new_center: Vec<f64>) -> Result<Self> {
        crate::geometry::check_dim(self.n(), new_center.len())?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale {scale} must be positive"
            )));
        }
        let mut params = self.params.clone();
        params.radii.iter_mut().for_each(|r| *r *= scale);
        params.min_proj_dist *= scale;
        let directions = self
            .directions
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|v| v.iter().map(|x| x * scale).collect())
                    .collect()
            })
            .collect();
        Ok(Self {
            params,
            center: new_center,
            directions,
        })
    }

    /// Projective distance used by the decoder when `own` is tested against
    /// the codeword of `other`, at their first differing layer `ℓ`:
    /// `‖Π_{v_ℓ}(o_other − o_{s^{ℓ−1}}) − v_ℓ‖`.
    pub fn projective_distance(&self, own: &CodewordId, other: &CodewordId) -> Result<f64> {
        let a = self.leaf_index(own)?;
        let b = self.leaf_index(other)?;
        if a == b {
            return Err(Error::SameIdPair(own.to_string()));
        }
        let own_path = self.path_directions(&own.0)?;
        let other_path = self.path_directions(&other.0)?;
        let l = own.first_difference(other).expect("distinct ids") - 1;
        Ok(self.layer_distance(own_path[l], &other_path[l..], l))
    }

    fn layer_distance(&self, v: &[f64], other_tail: &[&[f64]], l: usize) -> f64 {
        let r = self.params.radii[l];
        let len = norm(v);
        let coef: f64 = other_tail.iter().map(|w| dot(w, v)).sum::<f64>() / len;
        (coef - r).abs()
    }

    /// Minimum projective separation over ordered pairs of distinct leaves.
    ///
    /// With `sample_pairs = None` all pairs are checked when the codebook
    /// has at most [`EXHAUSTIVE_LEAF_LIMIT`] leaves, otherwise
    /// [`DEFAULT_SAMPLED_PAIRS`] random pairs are drawn.
    pub fn pairwise_projective_separation(
        &self,
        sample_pairs: Option<usize>,
    ) -> Result<SeparationSummary> {
        let all: Vec<usize> = (0..self.leaf_count()).collect();
        self.separation_over(&all, sample_pairs, self.params.seed)
    }

    /// Like [`pairwise_projective_separation`](Self::pairwise_projective_separation)
    /// but restricted to a subset of leaves (e.g. those that survive
    /// expurgation).
    pub fn separation_among(
        &self,
        ids: &[CodewordId],
        sample_pairs: Option<usize>,
    ) -> Result<SeparationSummary> {
        let leaves = ids
            .iter()
            .map(|id| self.leaf_index(id))
            .collect::<Result<Vec<_>>>()?;
        self.separation_over(&leaves, sample_pairs, self.params.seed)
    }

    fn separation_over(
        &self,
        leaves: &[usize],
        sample_pairs: Option<usize>,
        seed: u64,
    ) -> Result<SeparationSummary> {
        if leaves.len() < 2 {
            return Err(Error::TooFewWords(leaves.len()));
        }
        let ids: Vec<CodewordId> = leaves.iter().map(|&i| self.id_of_leaf(i)).collect();
        let paths: Vec<Vec<&[f64]>> = ids
            .iter()
            .map(|id| self.path_directions(&id.0))
            .collect::<Result<_>>()?;

        let mut best = (f64::INFINITY, 0usize, 1usize);
        let visit = |i: usize, j: usize, best: &mut (f64, usize, usize)| {
            let l = ids[i].first_difference(&ids[j]).expect("distinct leaves") - 1;
            let sep = self.layer_distance(paths[i][l], &paths[j][l..], l);
            if sep < best.0 {
                *best = (sep, i, j);
            }
        };

        let exhaustive = match sample_pairs {
            None => leaves.len() <= EXHAUSTIVE_LEAF_LIMIT,
            Some(_) => false,
        };
        let mut pairs_checked = 0usize;
        if exhaustive {
            for i in 0..ids.len() {
                for j in 0..ids.len() {
                    if i != j {
                        visit(i, j, &mut best);
                        pairs_checked += 1;
                    }
                }
            }
        } else {
            use rand::Rng;
            let count = sample_pairs.unwrap_or(DEFAULT_SAMPLED_PAIRS);
            let mut r = rng::seeded(rng::derive(seed, 0x5e9a));
            for _ in 0..count {
                let i = r.random_range(0..ids.len());
                let mut j = r.random_range(0..ids.len() - 1);
                if j >= i {
                    j += 1;
                }
                visit(i, j, &mut best);
                pairs_checked += 1;
            }
        }
        let d = self.params.min_proj_dist;
        Ok(SeparationSummary {
            min_sep: best.0,
            bound: d - (2.0 * self.layers() as f64 * d).sqrt(),
            argmin: (ids[best.1].clone(), ids[best.2].clone()),
            pairs_checked,
            exhaustive,
        })
    }

    /// Structural checks: radii, path orthogonality, sibling separation.
    pub fn check_invariants(&self) -> InvariantReport {
        let mut report = InvariantReport::default();
        let tol_r = crate::geometry::TOL_RADIUS;
        for (l, layer) in self.directions.iter().enumerate() {
            let r = self.params.radii[l];
            for v in layer {
                let dev = (norm(v) - r).abs() / r;
                report.max_radius_deviation = report.max_radius_deviation.max(dev);
            }
        }
        for i in 0..self.leaf_count() {
            let id = self.id_of_leaf(i);
            let path = self.path_directions(&id.0).expect("valid leaf");
            for a in 0..path.len() {
                for b in a + 1..path.len() {
                    let c = dot(path[a], path[b]) / (norm(path[a]) * norm(path[b]));
                    report.max_path_inner_product = report.max_path_inner_product.max(c.abs());
                }
            }
        }
        // siblings are checked on their direction vectors: relative to the
        // parent they are exact, while absolute points carry the rounding
        // of the (possibly huge) outer radii
        let origin = vec![0.0; self.n()];
        for (l, layer) in self.directions.iter().enumerate() {
            let k = self.params.branching[l];
            if k < 2 {
                continue;
            }
            for kids in layer.chunks(k) {
                match crate::geometry::verify_angle_dense(&origin, kids, self.params.min_proj_dist)
                {
                    Ok(r) => {
                        report.min_sibling_separation =
                            report.min_sibling_separation.min(r.min_sep);
                        if !r.ok {
                            report.sibling_failures += 1;
                        }
                    }
                    Err(_) => report.sibling_failures += 1,
                }
            }
        }
        report.radius_ok = report.max_radius_deviation <= tol_r;
        report.orthogonality_ok = report.max_path_inner_product <= crate::geometry::TOL_ORTH;
        report
    }
}

/// Result of [`PrimitiveCodebook::check_invariants`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    /// Largest `|‖v‖ − r_ℓ| / r_ℓ` over all direction vectors.
    pub max_radius_deviation: f64,
    /// Largest `|⟨u_a, u_b⟩|` between unit directions on a common path.
    pub max_path_inner_product: f64,
    pub min_sibling_separation: f64,
    pub sibling_failures: usize,
    pub radius_ok: bool,
    pub orthogonality_ok: bool,
}

impl Default for InvariantReport {
    fn default() -> Self {
        Self {
            max_radius_deviation: 0.0,
            max_path_inner_product: 0.0,
            min_sibling_separation: f64::INFINITY,
            sibling_failures: 0,
            radius_ok: true,
            orthogonality_ok: true,
        }
    }
}

impl InvariantReport {
    pub fn ok(&self) -> bool {
        self.radius_ok && self.orthogonality_ok && self.sibling_failures == 0
    }

    pub fn first_failure(&self) -> Option<String> {
        if !self.radius_ok {
            Some(format!(
                "direction length deviates from its radius by {:e} (relative)",
                self.max_radius_deviation
            ))
        } else if !self.orthogonality_ok {
            Some(format!(
                "path directions have inner product {:e}",
                self.max_path_inner_product
            ))
        } else if self.sibling_failures > 0 {
            Some(format!(
                "{} sibling arrangements violate the projective distance",
                self.sibling_failures
            ))
        } else {
            None
        }
    }
}
