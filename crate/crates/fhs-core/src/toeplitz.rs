//! FFT-accelerated triangular Toeplitz products.
//!
//! A lower-triangular Toeplitz matrix with first column `c` acts as the
//! causal convolution `y_i = sum_{k<=i} c_k x_{i-k}`; its transpose is the
//! anti-causal correlation `y_i = sum_{k<=n-1-i} c_k x_{i+k}`. Both are
//! evaluated in O(N log N) by zero-padded circular convolution.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct ToeplitzConv {
    n: usize,
    padded: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// FFT of the zero-padded first column.
    spectrum: Vec<Complex64>,
}

impl ToeplitzConv {
    pub fn new(column: &[f64]) -> Self {
        let n = column.len();
        let padded = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(padded);
        let inv = planner.plan_fft_inverse(padded);
        let mut spectrum: Vec<Complex64> = column
            .iter()
            .map(|&c| Complex64::new(c, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(padded)
            .collect();
        fwd.process(&mut spectrum);
        Self {
            n,
            padded,
            fwd,
            inv,
            spectrum,
        }
    }


    /// Causal product `y_i = sum_{k=0}^{i} c_k x_{i-k}` (lower-triangular).
    pub fn apply_lower(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let mut buf: Vec<Complex64> = x
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(self.padded)
            .collect();
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.padded as f64;
        for (yi, b) in y.iter_mut().zip(&buf[..self.n]) {
            *yi = b.re * scale;
        }
    }

    /// Transposed product `y_i = sum_{k=0}^{n-1-i} c_k x_{i+k}`
    /// (upper-triangular). Same kernel applied to the reversed input.
    pub fn apply_upper(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        self.apply_lower(&rev, y);
        y[..self.n].reverse();
    }
}

/// Direct O(N^2) causal product, for verification and small grids.
pub fn apply_lower_direct(column: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..=i {
            acc += column[k] * x[i - k];
        }
        y[i] = acc;
    }
}

/// Direct O(N^2) transposed product.
pub fn apply_upper_direct(column: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..n - i {
            acc += column[k] * x[i + k];
        }
        y[i] = acc;
    }
}
