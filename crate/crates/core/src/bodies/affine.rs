use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Invertible affine map `x ↦ linear·x + shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    linear: DMatrix<f64>,
    shift: DVector<f64>,
}

impl AffineMap {
    pub fn new(linear: DMatrix<f64>, shift: DVector<f64>) -> Result<Self> {
        let n = linear.nrows();
        if linear.ncols() != n {
            return Err(GeomError::InvalidBody(format!(
                "affine map needs a square linear part, got {}x{}",
                n,
                linear.ncols()
            )));
        }
        if shift.len() != n {
            return Err(GeomError::DimensionMismatch { expected: n, got: shift.len() });
        }
        let det = linear.determinant();
        if !det.is_finite() || det == 0.0 {
            return Err(GeomError::InvalidBody("affine map is singular".into()));
        }
        Ok(Self { linear, shift })
    }

    pub fn linear_only(linear: DMatrix<f64>) -> Result<Self> {
        let n = linear.nrows();
        Self::new(linear, DVector::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self { linear: DMatrix::identity(n, n), shift: DVector::zeros(n) }
    }

    pub fn translation(shift: DVector<f64>) -> Self {
        let n = shift.len();
        Self { linear: DMatrix::identity(n, n), shift }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    pub fn det(&self) -> f64 {
        self.linear.determinant()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.shift
    }

    pub fn apply_linear(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x
    }

    pub fn inverse(&self) -> Self {
        let inv = self
            .linear
            .clone()
            .try_inverse()
            .expect("affine map linear part is invertible by construction");
        let shift = -(&inv * &self.shift);
        Self { linear: inv, shift }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &AffineMap) -> Self {
        Self {
            linear: &self.linear * &other.linear,
            shift: &self.linear * &other.shift + &self.shift,
        }
    }

    /// The linear part with a zero shift.
    pub fn without_shift(&self) -> Self {
        Self { linear: self.linear.clone(), shift: DVector::zeros(self.dim()) }
    }

    /// Whether the linear part is `alpha·I` for some `alpha > 0`; returns alpha.
    pub fn uniform_scale(&self) -> Option<f64> {
        let n = self.dim();
        let alpha = self.linear[(0, 0)];
        if alpha <= 0.0 {
            return None;
        }
        let tol = 1e-12 * alpha;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { alpha } else { 0.0 };
                if (self.linear[(i, j)] - want).abs() > tol {
                    return None;
                }
            }
        }
        Some(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_with_inverse_is_identity() {
        let l = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.5, 3.0, -1.0, 0.0, 0.2, 1.5]);
        let s = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let m = AffineMap::new(l, s).unwrap();
        let id = m.compose(&m.inverse());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id.linear()[(i, j)] - want).abs() < 1e-10);
            }
            assert!(id.shift()[i].abs() < 1e-10);
        }
    }

    #[test]
    fn singular_rejected() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(AffineMap::linear_only(l).is_err());
    }

    #[test]
    fn uniform_scale_detection() {
        let m = AffineMap::linear_only(DMatrix::identity(3, 3) * 2.5).unwrap();
        assert_eq!(m.uniform_scale(), Some(2.5));
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert_eq!(AffineMap::linear_only(l).unwrap().uniform_scale(), None);
    }
}
