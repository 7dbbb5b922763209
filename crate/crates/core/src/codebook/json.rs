//! On-disk codebook format.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "params": {"n": 16, "L": 2, "delta": 0.2, "radii": [..], "d": 1.0,
//!              "branching": [4, 4], "seed": 7, "mode": "separated"},
//!   "center": [..],
//!   "nodes": [{"id_path": [1], "direction": [..]}, {"id_path": [1, 1], ..}, ..]
//! }
//! ```
//!
//! Nodes are listed layer by layer in mixed-radix order. `serde_json`
//! prints `f64` in shortest round-trip form, so save → load reproduces every
//! direction vector bit for bit. Complements and layer centers are
//! recomputed on load.

use serde::{Deserialize, Serialize};

use super::{CodebookParams, CodewordId, PrimitiveCodebook, RadiusMode};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub delta: f64,
    pub radii: Vec<f64>,
    pub d: f64,
    pub branching: Vec<usize>,
    pub seed: u64,
    pub mode: RadiusMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id_path: Vec<usize>,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookDocument {
    pub schema_version: u32,
    pub params: ParamsRecord,
    pub center: Vec<f64>,
    pub nodes: Vec<NodeRecord>,
}

impl From<&PrimitiveCodebook> for CodebookDocument {
    fn from(cb: &PrimitiveCodebook) -> Self {
        let p = cb.params();
        let mut nodes = Vec::new();
        for (l, layer) in cb.directions().iter().enumerate() {
            for (pos, v) in layer.iter().enumerate() {
                let mut path = vec![0; l + 1];
                let mut rest = pos;
                for k in (0..=l).rev() {
                    path[k] = rest % p.branching[k] + 1;
                    rest /= p.branching[k];
                }
                nodes.push(NodeRecord {
                    id_path: path,
                    direction: v.clone(),
                });
            }
        }
        Self {
            schema_version: SCHEMA_VERSION,
            params: ParamsRecord {
                n: p.n,
                layers: p.layers(),
                delta: p.delta,
                radii: p.radii.clone(),
                d: p.min_proj_dist,
                branching: p.branching.clone(),
                seed: p.seed,
                mode: p.mode,
            },
            center: cb.center().to_vec(),
            nodes,
        }
    }
}

impl CodebookDocument {
    pub fn into_codebook(self) -> Result<PrimitiveCodebook> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = self.params;
        if p.layers != p.radii.len() || p.layers != p.branching.len() {
            return Err(Error::Schema(format!(
                "L = {} disagrees with {} radii / {} branching factors",
                p.layers,
                p.radii.len(),
                p.branching.len()
            )));
        }
        let params = CodebookParams {
            n: p.n,
            delta: p.delta,
            radii: p.radii,
            min_proj_dist: p.d,
            branching: p.branching,
            seed: p.seed,
            mode: p.mode,
        };
        params.validate()?;

        let mut directions: Vec<Vec<Option<Vec<f64>>>> = Vec::with_capacity(params.layers());
        let mut width = 1usize;
        for &b in &params.branching {
            width = width
                .checked_mul(b)
                .ok_or_else(|| Error::Schema("tree too large".into()))?;
            directions.push(vec![None; width]);
        }
        for node in self.nodes {
            let l = node.id_path.len();
            if l == 0 || l > params.layers() {
                return Err(Error::Schema(format!("bad id_path {:?}", node.id_path)));
            }
            let mut pos = 0usize;
            for (k, &s) in node.id_path.iter().enumerate() {
                if s == 0 || s > params.branching[k] {
                    return Err(Error::Schema(format!(
                        "id_path {} out of range",
                        CodewordId(node.id_path.clone())
                    )));
                }
                pos = pos * params.branching[k] + (s - 1);
            }
            let slot = &mut directions[l - 1][pos];
            if slot.is_some() {
                return Err(Error::Schema(format!(
                    "duplicate node {}",
                    CodewordId(node.id_path.clone())
                )));
            }
            *slot = Some(node.direction);
        }
        let directions = directions
            .into_iter()
            .enumerate()
            .map(|(l, layer)| {
                layer
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Schema(format!("layer {} is incomplete", l + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        PrimitiveCodebook::from_parts(params, self.center, directions)
    }
}

impl PrimitiveCodebook {
    pub fn to_document(&self) -> CodebookDocument {
        CodebookDocument::from(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<CodebookDocument>(s)?.into_codebook()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let cb =
            PrimitiveCodebook::build(CodebookParams::separated(20, 20f64.ln(), vec![3, 2, 2], 13))
                .unwrap();
        let back = PrimitiveCodebook::from_json(&cb.to_json().unwrap()).unwrap();
        assert_eq!(back, cb);
    }

    #[test]
    fn tampered_documents_are_rejected() {
        let cb =
            PrimitiveCodebook::build(CodebookParams::separated(8, 1.0, vec![2, 2], 1)).unwrap();
        let mut doc = cb.to_document();
        doc.nodes.pop();
        assert!(matches!(doc.into_codebook(), Err(Error::Schema(_))));

        let mut doc = cb.to_document();
        doc.nodes[0].direction.iter_mut().for_each(|x| *x *= 1.01);
        assert!(doc.into_codebook().is_err());

        let mut doc = cb.to_document();
        doc.schema_version = 9;
        assert!(doc.into_codebook().is_err());
    }
}
