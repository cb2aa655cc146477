//! Discrete one-sided fractional derivatives on uniform grids.
//!
//! The left derivative of order `a` is discretized by the Grunwald-Letnikov
//! scheme with zero extension outside the grid,
//!
//! ```text
//! (D_left u)_i = h^{-a} sum_{k=0}^{i} w_k u_{i-k},
//! w_0 = 1,  w_k = w_{k-1} (1 - (a + 1) / k),
//! ```
//!
//! which is first-order accurate for `a` in (0, 1). The right derivative
//! mirrors the summation toward the right boundary; as matrices, the two
//! are exact transposes, so the discrete integration-by-parts identity
//! holds to machine precision. The composed operator appearing in the
//! Euler-Lagrange equation is represented by the symmetric form
//! `A = h D_left' D_left`, the exact gradient of the discrete energy.
//!
//! [`fourier_seminorm`] provides an independent spectral route to the same
//! quantity for well-decayed functions: the squared seminorm is the
//! frequency-domain integral of `|w|^{2a} |u_hat|^2 / (2 pi)`.

use crate::error::{FhsError, Result};
use crate::grid::{Grid1D, GridFunction};
use crate::linalg::SymMatrix;
use crate::toeplitz::{apply_lower_direct, apply_upper_direct, ToeplitzConv};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Grids at or above this size route Toeplitz products through the FFT.
const FFT_THRESHOLD: usize = 128;

/// Relative boundary-decay tolerance for spectral norms.
pub const DECAY_TOLERANCE: f64 = 1e-6;

/// Fractional order `alpha`.
///
/// Operators accept any `alpha` in (0, 1]; the solver additionally requires
/// `alpha > 1/2` (see [`FracOrder::require_solver_range`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    alpha: f64,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
            return Err(FhsError::InvalidOrder {
                alpha,
                reason: "operators need alpha in (0, 1]",
            });
        }
        Ok(Self { alpha })
    }

    pub fn alpha(self) -> f64 {
        self.alpha
    }

    /// The variational problem is posed for `alpha` in (1/2, 1).
    pub fn require_solver_range(self) -> Result<Self> {
        if self.alpha > 0.5 && self.alpha < 1.0 {
            Ok(self)
        } else {
            Err(FhsError::InvalidOrder {
                alpha: self.alpha,
                reason: "the solver needs alpha in (1/2, 1)",
            })
        }
    }
}

/// Unscaled Grunwald-Letnikov coefficients `[w_0, ..., w_count]`.
///
/// `w_k = (-1)^k binomial(alpha, k)`; computed by the stable recurrence
/// `w_k = w_{k-1} (1 - (alpha + 1) / k)`.
pub fn gl_weights(order: FracOrder, count: usize) -> Vec<f64> {
    let alpha = order.alpha();
    let mut w = Vec::with_capacity(count + 1);
    w.push(1.0);
    for k in 1..=count {
        let prev = w[k - 1];
        w.push(prev * (1.0 - (alpha + 1.0) / k as f64));
    }
    w
}

/// Which side the one-sided derivative is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpSide {
    /// Summation reaches back to the left boundary (causal).
    Left,
    /// Summation reaches forward to the right boundary (anti-causal).
    Right,
}

/// Triangular Toeplitz realization of a one-sided fractional derivative on
/// a fixed grid. The stored column is already scaled by `h^{-alpha}`.
pub struct FracOpMatrix {
    order: FracOrder,
    grid: Grid1D,
    side: OpSide,
    weights: Vec<f64>,
    conv: ToeplitzConv,
}

impl FracOpMatrix {
    pub fn new(order: FracOrder, grid: Grid1D, side: OpSide) -> Self {
        let scale = grid.h().powf(-order.alpha());
        let mut weights = gl_weights(order, grid.len() - 1);
        for w in &mut weights {
            *w *= scale;
        }
        let conv = ToeplitzConv::new(&weights);
        Self {
            order,
            grid,
            side,
            weights,
            conv,
        }
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn side(&self) -> OpSide {
        self.side
    }

    /// Scaled coefficient column; `weights[0] = h^{-alpha}`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the operator to one component stored contiguously.
    pub fn apply_component(&self, x: &[f64], y: &mut [f64]) {
        let fft = self.grid.len() >= FFT_THRESHOLD;
        match (self.side, fft) {
            (OpSide::Left, true) => self.conv.apply_lower(x, y),
            (OpSide::Right, true) => self.conv.apply_upper(x, y),
            (OpSide::Left, false) => apply_lower_direct(&self.weights, x, y),
            (OpSide::Right, false) => apply_upper_direct(&self.weights, x, y),
        }
    }

    /// Like [`Self::apply_component`] but always O(N^2); the FFT route must
    /// agree with this one.
    pub fn apply_component_direct(&self, x: &[f64], y: &mut [f64]) {
        match self.side {
            OpSide::Left => apply_lower_direct(&self.weights, x, y),
            OpSide::Right => apply_upper_direct(&self.weights, x, y),
        }
    }

    /// Operator applied componentwise to a grid function.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.grid() != &self.grid {
            return Err(FhsError::GridMismatch);
        }
        let n = self.grid.len();
        let nc = u.n_components();
        let mut out = vec![0.0; n * nc];
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        for c in 0..nc {
            for i in 0..n {
                x[i] = u.values()[i * nc + c];
            }
            self.apply_component(&x, &mut y);
            for i in 0..n {
                out[i * nc + c] = y[i];
            }
        }
        GridFunction::from_values(self.grid.clone(), nc, out)
    }
}

/// Left fractional derivative of `u` on its own grid.
pub fn left_frac_derivative(u: &GridFunction, order: FracOrder) -> Result<GridFunction> {
    FracOpMatrix::new(order, u.grid().clone(), OpSide::Left).apply(u)
}

/// Right fractional derivative; the exact transpose of the left one.
pub fn right_frac_derivative(u: &GridFunction, order: FracOrder) -> Result<GridFunction> {
    FracOpMatrix::new(order, u.grid().clone(), OpSide::Right).apply(u)
}

/// The symmetric positive semi-definite form `A = h D_left' D_left`, so
/// that `u' A u` approximates the squared fractional Dirichlet seminorm.
pub struct FracStiffness {
    left: FracOpMatrix,
}

impl FracStiffness {
    pub fn new(order: FracOrder, grid: Grid1D) -> Self {
        Self {
            left: FracOpMatrix::new(order, grid, OpSide::Left),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.left.grid()
    }

    pub fn order(&self) -> FracOrder {
        self.left.order()
    }

    /// `A x` for one component (`x` contiguous of grid length).
    pub fn apply_component(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let mut mid = vec![0.0; n];
        self.left.apply_component(x, &mut mid);
        let fft = n >= FFT_THRESHOLD;
        if fft {
            self.left.conv.apply_upper(&mid, out);
        } else {
            apply_upper_direct(&self.left.weights, &mid, out);
        }
        let h = self.grid().h();
        for v in out.iter_mut() {
            *v *= h;
        }
    }

    /// `A u` applied componentwise to interleaved values.
    pub fn apply_flat(&self, values: &[f64], n_components: usize) -> Vec<f64> {
        let n = self.grid().len();
        debug_assert_eq!(values.len(), n * n_components);
        let mut out = vec![0.0; values.len()];
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        for c in 0..n_components {
            for i in 0..n {
                x[i] = values[i * n_components + c];
            }
            self.apply_component(&x, &mut y);
            for i in 0..n {
                out[i * n_components + c] = y[i];
            }
        }
        out
    }

    /// `u' A v = h <D_left u, D_left v>` for interleaved values.
    pub fn inner_flat(&self, u: &[f64], v: &[f64], n_components: usize) -> f64 {
        let n = self.grid().len();
        let h = self.grid().h();
        let mut x = vec![0.0; n];
        let mut du = vec![0.0; n];
        let mut dv = vec![0.0; n];
        let mut acc = 0.0;
        for c in 0..n_components {
            for i in 0..n {
                x[i] = u[i * n_components + c];
            }
            self.left.apply_component(&x, &mut du);
            if std::ptr::eq(u, v) {
                acc += du.iter().map(|d| d * d).sum::<f64>();
            } else {
                for i in 0..n {
                    x[i] = v[i * n_components + c];
                }
                self.left.apply_component(&x, &mut dv);
                acc += du.iter().zip(&dv).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        h * acc
    }

    /// `u' A u` (the discrete squared seminorm).
    pub fn energy_flat(&self, u: &[f64], n_components: usize) -> f64 {
        self.inner_flat(u, u, n_components)
    }

    pub fn quadratic_form(&self, u: &GridFunction) -> Result<f64> {
        if u.grid() != self.grid() {
            return Err(FhsError::GridMismatch);
        }
        Ok(self.energy_flat(u.values(), u.n_components()))
    }

    /// Dense scalar assembly of `A` (one component). Entries along each
    /// diagonal satisfy `A[i, j] = A[i+1, j+1] + s w_{n-1-i} w_{n-1-j}`
    /// with `s = h^{1-2a}`, filled from the bottom-right corner in O(N^2).
    pub fn assemble_dense(&self) -> SymMatrix {
        let n = self.grid().len();
        let h = self.grid().h();
        let alpha = self.order().alpha();
        let scale = h.powf(1.0 - 2.0 * alpha);
        let w = gl_weights(self.order(), n - 1);
        let mut m = SymMatrix::zeros(n);
        for d in 0..n {
            // C(i, i+d) = sum_{m >= i+d} w_{m-i} w_{m-i-d}, seeded at the
            // last row where only m = n-1 contributes.
            let mut acc = w[d];
            m.set(n - 1, n - 1 - d, scale * acc);
            for i in (0..n - 1 - d).rev() {
                acc += w[n - 1 - i] * w[n - 1 - i - d];
                m.set(i + d, i, scale * acc);
            }
        }
        m
    }
}

/// Discrete fractional Sobolev seminorm through the Fourier side:
/// `( sum_k |w_k|^{2a} |u_hat_k|^2 / P )^{1/2}` on the periodified grid of
/// period `P = N h`, with `u_hat_k = h sum_j u_j e^{-2 pi i j k / N}`.
///
/// Errors with [`FhsError::NonDecaying`] when the boundary values exceed
/// `DECAY_TOLERANCE` relative to the peak, since periodification is then
/// unreliable.
pub fn fourier_seminorm(u: &GridFunction, order: FracOrder) -> Result<f64> {
    fourier_seminorm_sq(u, order).map(f64::sqrt)
}

/// Squared version of [`fourier_seminorm`].
pub fn fourier_seminorm_sq(u: &GridFunction, order: FracOrder) -> Result<f64> {
    let peak = u.max_magnitude();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let edge = u.boundary_magnitude();
    if edge > DECAY_TOLERANCE * peak {
        return Err(FhsError::NonDecaying {
            magnitude: edge,
            tolerance: DECAY_TOLERANCE,
        });
    }

    let n = u.grid().len();
    let nc = u.n_components();
    let h = u.grid().h();
    let period = n as f64 * h;
    let two_alpha = 2.0 * order.alpha();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut spec_sq = vec![0.0; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..nc {
        for i in 0..n {
            buf[i] = Complex64::new(u.values()[i * nc + c], 0.0);
        }
        fft.process(&mut buf);
        for (s, b) in spec_sq.iter_mut().zip(&buf) {
            *s += (h * b.norm()).powi(2);
        }
    }

    let mut acc = 0.0;
    for (k, s) in spec_sq.iter().enumerate() {
        // signed frequency index, |k| <= n/2
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let omega = 2.0 * PI * signed / period;
        if omega != 0.0 {
            acc += omega.abs().powf(two_alpha) * s;
        }
    }
    Ok(acc / period)
}

/// Discrete L2 norm squared on the periodified grid (rectangle rule), the
/// alpha = 0 companion of [`fourier_seminorm_sq`].
pub fn rectangle_l2_sq(u: &GridFunction) -> f64 {
    let h = u.grid().h();
    h * u.values().iter().map(|v| v * v).sum::<f64>()
}
