//! Symmetric tridiagonal systems.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length");
        SymTridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// `self - shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        SymTridiagonal {
            diag: self.diag.iter().map(|d| d - shift).collect(),
            off: self.off.clone(),
        }
    }

    /// Thomas algorithm without pivoting; fails on a vanishing pivot.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.off[i - 1] * c[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::NumericFault(format!("zero pivot at row {i}")));
            }
            c[i] = if i + 1 < n { self.off[i] / pivot } else { 0.0 };
            let prev = if i > 0 { self.off[i - 1] * d[i - 1] } else { 0.0 };
            d[i] = (rhs[i] - prev) / pivot;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_laplacian() {
        let n = 50;
        let m = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = m.mul(&x);
        let y = m.solve(&b).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn singular_pivot_is_reported() {
        let m = SymTridiagonal::new(vec![0.0, 1.0], vec![1.0]);
        assert!(m.solve(&[1.0, 1.0]).is_err());
    }
}
