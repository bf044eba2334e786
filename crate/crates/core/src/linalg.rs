//! Dense row-major matrices and the few factorizations the samplers need.

use alloc::vec;
use alloc::vec::Vec;
// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Lower-triangular Cholesky factor. Returns `None` when a pivot is not
    /// strictly positive.
    pub fn cholesky(&self) -> Option<Matrix> {
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l[(i, i)] = sum.sqrt();
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        Some(l)
    }

    /// Cholesky factor, retrying once with a `1e-12` ridge on the diagonal
    /// when rounding has made the matrix numerically indefinite.
    pub fn cholesky_with_ridge(&self) -> Result<Matrix> {
        if let Some(l) = self.cholesky() {
            return Ok(l);
        }
        let mut ridged = self.clone();
        for i in 0..self.rows {
            ridged[(i, i)] += 1e-12;
        }
        ridged
            .cholesky()
            .ok_or_else(|| Error::InvalidData("covariance is not positive definite".into()))
    }

    /// `self * v` for a lower-triangular `self`, writing into `out`.
    pub fn lower_mul_into(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.rows {
            let row = self.row(i);
            out[i] = row[..=i].iter().zip(&v[..=i]).map(|(a, b)| a * b).sum();
        }
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Largest eigenvalue of `X'X / n` for a row-major `n x p` matrix, by power
/// iteration. Used for Lipschitz step sizes.
pub fn gram_spectral_norm(x: &[f64], n: usize, p: usize) -> f64 {
    if n == 0 || p == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (p as f64).sqrt(); p];
    let mut xv = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..100 {
        for i in 0..n {
            xv[i] = crate::math::dot(&x[i * p..(i + 1) * p], &v);
        }
        let mut w = vec![0.0; p];
        for i in 0..n {
            let row = &x[i * p..(i + 1) * p];
            for (wj, xij) in w.iter_mut().zip(row) {
                *wj += xv[i] * xij;
            }
        }
        let nw = crate::math::norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw / n as f64;
        for (vj, wj) in v.iter_mut().zip(&w) {
            *vj = wj / nw;
        }
        if (next - lambda).abs() <= 1e-10 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}
