use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric matrix of dimension 1 or 2, stored by its upper triangle so that
/// symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    xx: f64,
    xy: f64,
    yy: f64,
}

impl SymMatrix {
    pub fn scalar(value: f64) -> Self {
        SymMatrix { dim: 1, xx: value, xy: 0.0, yy: 0.0 }
    }

    pub fn new2(xx: f64, xy: f64, yy: f64) -> Self {
        SymMatrix { dim: 2, xx, xy, yy }
    }

    pub fn zero(dim: usize) -> Self {
        SymMatrix { dim, xx: 0.0, xy: 0.0, yy: 0.0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(dim, 1.0, 1.0)
    }

    pub fn diag(dim: usize, a: f64, b: f64) -> Self {
        match dim {
            1 => Self::scalar(a),
            _ => Self::new2(a, 0.0, b),
        }
    }

    /// Builds from full row storage; rejects asymmetric input (exact comparison).
    pub fn from_rows(dim: usize, rows: [[f64; 2]; 2]) -> Result<Self> {
        match dim {
            1 => Ok(Self::scalar(rows[0][0])),
            2 => {
                if rows[0][1] != rows[1][0] {
                    return Err(Error::NotSymmetric(rows[0][1], rows[1][0]));
                }
                Ok(Self::new2(rows[0][0], rows[0][1], rows[1][1]))
            }
            _ => Err(Error::invalid("dim", format!("{dim} not in {{1, 2}}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.xx, self.xy], [self.xy, self.yy]]
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    pub fn trace(&self) -> f64 {
        match self.dim {
            1 => self.xx,
            _ => self.xx + self.yy,
        }
    }

    /// tr(A M) for symmetric A, M.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        match self.dim {
            1 => self.xx * other.xx,
            _ => self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy,
        }
    }

    pub fn frobenius(&self) -> f64 {
        match self.dim {
            1 => self.xx.abs(),
            _ => (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        SymMatrix { dim: self.dim, xx: s * self.xx, xy: s * self.xy, yy: s * self.yy }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        SymMatrix {
            dim: self.dim,
            xx: self.xx + other.xx,
            xy: self.xy + other.xy,
            yy: self.yy + other.yy,
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Outer product p ⊗ p of the first `dim` components.
    pub fn outer(dim: usize, p: [f64; 2]) -> Self {
        match dim {
            1 => Self::scalar(p[0] * p[0]),
            _ => Self::new2(p[0] * p[0], p[0] * p[1], p[1] * p[1]),
        }
    }

    /// Eigenvalues in closed form, ascending. In 1D only the first entry is meaningful.
    pub fn eigenvalues(&self) -> [f64; 2] {
        match self.dim {
            1 => [self.xx, self.xx],
            _ => {
                let mean = 0.5 * (self.xx + self.yy);
                let radius = (0.5 * (self.xx - self.yy)).hypot(self.xy);
                [mean - radius, mean + radius]
            }
        }
    }

    /// Eigenvalues as a slice of length `dim`.
    pub fn spectrum(&self) -> Vec<f64> {
        let e = self.eigenvalues();
        e[..self.dim].to_vec()
    }

    /// Q diag(d) Qᵀ with Q the rotation by `angle` (2D) or identity (1D).
    pub fn from_spectral(dim: usize, angle: f64, d: [f64; 2]) -> Self {
        match dim {
            1 => Self::scalar(d[0]),
            _ => {
                let (s, c) = angle.sin_cos();
                Self::new2(
                    c * c * d[0] + s * s * d[1],
                    c * s * (d[0] - d[1]),
                    s * s * d[0] + c * c * d[1],
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_asymmetric_rows() {
        assert!(matches!(
            SymMatrix::from_rows(2, [[1.0, 2.0], [2.5, 1.0]]),
            Err(Error::NotSymmetric(..))
        ));
        assert!(SymMatrix::from_rows(2, [[1.0, 2.0], [2.0, 1.0]]).is_ok());
    }

    #[test]
    fn eigenvalues_of_spectral_construction() {
        let m = SymMatrix::from_spectral(2, 0.7, [-1.5, 3.0]);
        let e = m.eigenvalues();
        assert_relative_eq!(e[0], -1.5, epsilon = 1e-12);
        assert_relative_eq!(e[1], 3.0, epsilon = 1e-12);
        assert_relative_eq!(m.trace(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn trace_product_matches_full_multiplication() {
        let a = SymMatrix::new2(1.0, 0.3, 2.0);
        let m = SymMatrix::new2(-0.5, 4.0, 0.25);
        let (ar, mr) = (a.rows(), m.rows());
        let mut tr = 0.0;
        for i in 0..2 {
            for k in 0..2 {
                tr += ar[i][k] * mr[k][i];
            }
        }
        assert_relative_eq!(a.trace_product(&m), tr, epsilon = 1e-14);
    }
}
