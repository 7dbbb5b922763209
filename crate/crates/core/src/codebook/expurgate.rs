use serde::{Deserialize, Serialize};

use super::{CodewordId, PrimitiveCodebook};
use crate::error::{Error, Result};
use crate::geometry::haar_rotation;

/// The cube `[lo, hi]^n` of admissible channel inputs. Both ends are
/// included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputBox {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl InputBox {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "input box needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            n,
        }
    }

    pub fn side(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    #[inline]
    pub fn contains_letter(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| self.contains_letter(v))
    }

    /// Errors with the first offending coordinate.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        crate::geometry::check_dim(self.n, x.len())?;
        match x.iter().position(|&v| !self.contains_letter(v)) {
            None => Ok(()),
            Some(index) => Err(Error::InputOutOfBox {
                index,
                value: x[index],
                lo: self.lo,
                hi: self.hi,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpurgationReport {
    /// `N_P`
    pub total: usize,
    /// `N`
    pub retained: usize,
    pub fraction_out: f64,
    pub rotation_seed: u64,
    pub rotated: bool,
}

impl ExpurgationReport {
    /// Report for a codebook used as-is (every word kept, no rotation).
    pub fn unexpurgated(total: usize) -> Self {
        Self {
            total,
            retained: total,
            fraction_out: 0.0,
            rotation_seed: 0,
            rotated: false,
        }
    }

    pub fn out(&self) -> usize {
        self.total - self.retained
    }
}

/// A (possibly rotated) codebook together with the ids that fit the box.
#[derive(Debug, Clone)]
pub struct Expurgation {
    pub codebook: PrimitiveCodebook,
    pub retained: Vec<CodewordId>,
    pub report: ExpurgationReport,
}

/// Optionally rotates the codebook about its center by a Haar rotation,
/// then keeps the ids whose codeword lies in `input_box`.
pub fn expurgate(
    cb: &PrimitiveCodebook,
    input_box: &InputBox,
    rotation_seed: u64,
    use_rotation: bool,
) -> Result<Expurgation> {
    crate::geometry::check_dim(cb.n(), input_box.n)?;
    let codebook = if use_rotation {
        cb.rotate(&haar_rotation(cb.n(), rotation_seed))?
    } else {
        cb.clone()
    };
    Ok(retain(codebook, input_box, rotation_seed, use_rotation))
}

/// Tries every seed in `rotation_seeds` and keeps the rotation that retains
/// the most codewords (the first one on ties).
pub fn expurgate_best(
    cb: &PrimitiveCodebook,
    input_box: &InputBox,
    rotation_seeds: &[u64],
) -> Result<Expurgation> {
    let mut best: Option<Expurgation> = None;
    for &seed in rotation_seeds {
        let e = expurgate(cb, input_box, seed, true)?;
        if best
            .as_ref()
            .map_or(true, |b| e.report.retained > b.report.retained)
        {
            best = Some(e);
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no rotation seeds given".into()))
}

fn retain(
    codebook: PrimitiveCodebook,
    input_box: &InputBox,
    seed: u64,
    rotated: bool,
) -> Expurgation {
    let retained: Vec<CodewordId> = codebook
        .leaf_ids()
        .into_iter()
        .filter(|id| {
            let w = codebook.codeword_vector(id).expect("leaf id");
            input_box.contains(&w)
        })
        .collect();
    let total = codebook.leaf_count();
    let report = ExpurgationReport {
        total,
        retained: retained.len(),
        fraction_out: (total - retained.len()) as f64 / total as f64,
        rotation_seed: seed,
        rotated,
    };
    Expurgation {
        codebook,
        retained,
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::CodebookParams;

    fn small() -> PrimitiveCodebook {
        PrimitiveCodebook::build(CodebookParams::explicit(
            16,
            vec![0.6, 0.3],
            0.3,
            vec![4, 4],
            2,
        ))
        .unwrap()
    }

    #[test]
    fn big_box_keeps_everything() {
        let cb = small();
        let r = cb.params().outer_radius();
        let b = InputBox::new(0.5 - r - 1.0, 0.5 + r + 1.0, 16).unwrap();
        let e = expurgate(&cb, &b, 4, true).unwrap();
        assert_eq!(e.report.retained, 16);
        assert_eq!(e.report.fraction_out, 0.0);
    }

    #[test]
    fn retained_words_lie_in_unit_cube() {
        let cb = small();
        let e = expurgate(&cb, &InputBox::unit(16), 9, true).unwrap();
        assert_eq!(e.report.retained + e.report.out(), e.report.total);
        for id in &e.retained {
            let w = e.codebook.codeword_vector(id).unwrap();
            assert!(w.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn boundary_is_closed() {
        let b = InputBox::unit(2);
        assert!(b.contains(&[0.0, 1.0]));
        assert!(matches!(
            b.check(&[0.5, 1.0 + 1e-15]),
            Err(Error::InputOutOfBox { index: 1, .. })
        ));
    }

    #[test]
    fn best_of_seeds_is_at_least_each() {
        let cb = small();
        let b = InputBox::new(0.2, 0.8, 16).unwrap();
        let best = expurgate_best(&cb, &b, &[1, 2, 3]).unwrap();
        for s in [1, 2, 3] {
            assert!(best.report.retained >= expurgate(&cb, &b, s, true).unwrap().report.retained);
        }
    }
}
