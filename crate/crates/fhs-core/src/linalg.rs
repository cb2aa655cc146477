//! Dense symmetric matrices and Cholesky solves.
//!
//! The Gram matrix of the weighted energy inner product is symmetric
//! positive definite on the free nodes; one factorization per solve is
//! shared by every gradient evaluation. Storage is by columns of the lower
//! triangle (`cols[j][i - j] = A[i][j]`, `i >= j`), which keeps the
//! factorization's inner loops and both triangular substitutions on
//! contiguous slices. The trailing update is embarrassingly parallel over
//! columns; each entry has a single writer, so sequential and parallel
//! runs give bitwise-identical factors.

use crate::error::{FhsError, Result};
use crate::exec::ExecMode;

/// Symmetric matrix, lower triangle stored by columns.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    n: usize,
    cols: Vec<Vec<f64>>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        let cols = (0..n).map(|j| vec![0.0; n - j]).collect();
        Self { n, cols }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sets `A[i][j] = A[j][i] = v`; requires `i >= j`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i >= j && i < self.n);
        self.cols[j][i - j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i >= j && i < self.n);
        self.cols[j][i - j] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.cols[lo][hi - lo]
    }

    /// Symmetric matrix-vector product (for verification).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let col = &self.cols[j];
            y[j] += col[0] * x[j];
            for (off, &a) in col.iter().enumerate().skip(1) {
                let i = j + off;
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        y
    }

    /// In-place lower Cholesky factorization `A = L L'`.
    pub fn cholesky(mut self, mode: ExecMode) -> Result<CholeskyFactor> {
        let n = self.n;
        for k in 0..n {
            let diag = self.cols[k][0];
            if !(diag > 0.0) {
                return Err(FhsError::SolveFailure(format!(
                    "matrix is not positive definite at pivot {k} (value {diag:.3e})"
                )));
            }
            let lkk = diag.sqrt();
            let inv = 1.0 / lkk;
            for v in self.cols[k].iter_mut() {
                *v *= inv;
            }
            self.cols[k][0] = lkk;

            let (head, tail) = self.cols.split_at_mut(k + 1);
            let ck = &head[k];
            let update_column = |j: usize, col: &mut Vec<f64>| {
                let f = ck[j - k];
                if f != 0.0 {
                    for (off, v) in col.iter_mut().enumerate() {
                        *v -= f * ck[j - k + off];
                    }
                }
            };
            // column strips keep the task granularity coarse; the
            // per-step fork-join only pays for itself on wide trailing
            // blocks (the kernel is bandwidth-bound), hence the large
            // engagement threshold
            #[cfg(feature = "parallel")]
            if mode.is_parallel() && tail.len() >= 3072 {
                use rayon::prelude::*;
                let strip = (tail.len() / (4 * rayon::current_num_threads().max(1))).max(64);
                tail.par_chunks_mut(strip).enumerate().for_each(|(ci, chunk)| {
                    for (jj, col) in chunk.iter_mut().enumerate() {
                        update_column(k + 1 + ci * strip + jj, col);
                    }
                });
                continue;
            }
            let _ = mode;
            for (jj, col) in tail.iter_mut().enumerate() {
                update_column(k + 1 + jj, col);
            }
        }
        Ok(CholeskyFactor {
            n,
            cols: self.cols,
        })
    }
}

/// Lower-triangular Cholesky factor.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    cols: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place (`A = L L'`).
    pub fn solve_in_place(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        // L y = b
        for k in 0..self.n {
            let col = &self.cols[k];
            b[k] /= col[0];
            let bk = b[k];
            for (off, &l) in col.iter().enumerate().skip(1) {
                b[k + off] -= l * bk;
            }
        }
        // L' x = y
        for k in (0..self.n).rev() {
            let col = &self.cols[k];
            let mut acc = b[k];
            for (off, &l) in col.iter().enumerate().skip(1) {
                acc -= l * b[k + off];
            }
            b[k] = acc / col[0];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
