//! Dense symmetric positive-definite solves for the Newton step.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SquareMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    /// Copies the upper triangle into the lower one.
    pub fn symmetrize_from_upper(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                self.data[i * self.n + j] = self.data[j * self.n + i];
            }
        }
    }

    /// In-place Cholesky factorization (lower triangle holds L).
    /// Returns false when the matrix is not numerically positive definite.
    pub fn cholesky(&mut self) -> bool {
        let n = self.n;
        for j in 0..n {
            let mut diag = self.at(j, j);
            for k in 0..j {
                let l = self.at(j, k);
                diag -= l * l;
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return false;
            }
            let diag = sqrt(diag);
            self.data[j * n + j] = diag;
            for i in (j + 1)..n {
                let mut s = self.at(i, j);
                let (ri, rj) = (i * n, j * n);
                for k in 0..j {
                    s -= self.data[ri + k] * self.data[rj + k];
                }
                self.data[ri + j] = s / diag;
            }
        }
        true
    }

    /// Solves L Lᵀ x = b after [`SquareMatrix::cholesky`].
    pub fn cholesky_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.at(i, k) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.at(k, i) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        y
    }
}
