//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals. `lower[0]` and `upper[n - 1]`
/// are ignored.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Solves `A x = rhs` by forward elimination and back substitution.
    /// No pivoting: intended for the diagonally dominant systems produced by
    /// conservative diffusion stencils.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidArgument("tridiagonal dimension mismatch".into()));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut beta = self.diag[0];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::SingularSystem("zero pivot in row 0".into()));
        }
        c[0] = self.upper[0] / beta;
        d[0] = rhs[0] / beta;
        for i in 1..n {
            beta = self.diag[i] - self.lower[i] * c[i - 1];
            if beta == 0.0 || !beta.is_finite() {
                return Err(Error::SingularSystem(format!("zero pivot in row {i}")));
            }
            c[i] = self.upper[i] / beta;
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / beta;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(x)
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}
