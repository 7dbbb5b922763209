use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng;

/// An orthogonal `n × n` transform with determinant +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

/// Samples a Haar-uniform rotation of `SO(n)`.
///
/// A matrix of independent standard normals is QR-factorized; each column of
/// `Q` is multiplied by the sign of the matching diagonal entry of `R`
/// (which makes the law Haar on `O(n)`), and the first column is negated
/// when the determinant comes out −1.
///
/// # Panics
///
/// If `n == 0`.
pub fn haar_rotation(n: usize, seed: u64) -> Rotation {
    assert!(n > 0, "rotation dimension must be positive");
    let mut rng = rng::seeded(seed);
    let gaussian = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.clone().lu().determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Rotation { matrix: q }
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    /// `Q x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(x);
        (&self.matrix * v).as_slice().to_vec()
    }

    /// `c + Q (x − c)`
    pub fn apply_about(&self, center: &[f64], x: &[f64]) -> Vec<f64> {
        let rel: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
        self.apply(&rel)
            .into_iter()
            .zip(center)
            .map(|(a, b)| a + b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn orthogonal_with_unit_determinant() {
        for (n, seed) in [(1, 0), (2, 1), (5, 2), (17, 3)] {
            let q = haar_rotation(n, seed);
            let qtq = q.matrix().transpose() * q.matrix();
            for i in 0..n {
                for j in 0..n {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq[(i, j)] - expected).abs() < 1e-10);
                }
            }
            assert!((q.matrix().clone().lu().determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn isometry_and_determinism() {
        let q = haar_rotation(9, 77);
        let x: Vec<f64> = (0..9).map(|i| (i as f64).sin() * 3.0).collect();
        let y = q.apply(&x);
        assert!((norm(&y) - norm(&x)).abs() <= 1e-9 * norm(&x));
        assert_eq!(q, haar_rotation(9, 77));
        assert_ne!(q, haar_rotation(9, 78));
    }

    #[test]
    fn inverse_undoes_rotation_about_center() {
        let q = haar_rotation(4, 5);
        let c = [0.5; 4];
        let x = [0.1, 0.9, 0.3, 0.7];
        let back = q.inverse().apply_about(&c, &q.apply_about(&c, &x));
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
