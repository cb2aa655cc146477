//! Fibering maps, Nehari projection, and minimization of the reduced
//! functional on the unit sphere of the weighted energy space.
//!
//! For a direction `u != 0` the fibering map `h(s) = I(s u)` rises
//! quadratically from zero (the potential is sublinear at the origin) and
//! eventually falls (superquadratic growth), and under strict fibering
//! monotonicity `h'` changes sign exactly once, at the unique ray maximum
//! `s_u`. Projecting any direction to `m(u) = s_u u / ||u||` lands on the
//! Nehari manifold `{ <I'(u), u> = 0 }`, which contains every nontrivial
//! critical point; the ground state is its energy minimizer. The reduced
//! functional `Phi(w) = I(m(w))` on the unit sphere is minimized by
//! Riemannian gradient descent: Sobolev (Riesz) gradients in the weighted
//! inner product, tangential projection, normalization retraction, and
//! Armijo backtracking.

use crate::error::{FhsError, Result};
use crate::exec::ExecMode;
use crate::fracops::{FracOrder, FracStiffness};
use crate::grid::{Grid1D, GridFunction};
use crate::linalg::{CholeskyFactor, SymMatrix};
use crate::potentials::{PotentialSpec, WeightSpec};

/// Options for the fibering root-find and the sphere descent.
#[derive(Debug, Clone)]
pub struct OptimizerOptions {
    /// Absolute tolerance on the full Sobolev gradient norm at the
    /// projected point.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Armijo backtracking: initial step, shrink factor, slope fraction.
    pub step_init: f64,
    pub step_shrink: f64,
    pub armijo_c1: f64,
    /// Step underflow threshold; reaching it is a diagnosed failure.
    pub step_min: f64,
    /// `|h'(s_u)| <= fibering_tol * ||u||^2` at the accepted root.
    pub fibering_tol: f64,
    pub fibering_max_expansions: usize,
    pub fibering_max_iters: usize,
    /// Record per-iteration `(Phi, |grad Phi|, step)` lines.
    pub keep_log: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-7,
            max_iters: 10_000,
            step_init: 1.0,
            step_shrink: 0.5,
            armijo_c1: 1e-4,
            step_min: 1e-16,
            fibering_tol: 1e-10,
            fibering_max_expansions: 200,
            fibering_max_iters: 200,
            keep_log: false,
        }
    }
}

/// The unique ray maximizer found by [`DiscreteEnergy::fibering_sigma`].
#[derive(Debug, Clone)]
pub struct FiberingResult {
    pub sigma: f64,
    /// `h(sigma) = I(sigma u)`.
    pub value: f64,
    /// `|h'(sigma)|` at the accepted root.
    pub derivative_residual: f64,
    /// Sign-change bracket containing `sigma`.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// A point on the Nehari manifold with its certificates.
#[derive(Debug, Clone)]
pub struct NehariPoint {
    pub point: GridFunction,
    pub energy: f64,
    /// `|<I'(point), point>|`.
    pub nehari_residual: f64,
    /// `||point||` in the weighted energy norm.
    pub x_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    StepUnderflow,
}

/// One line of the optimizer log.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub phi: f64,
    pub grad_phi_norm: f64,
    pub step: f64,
}

/// Result of [`DiscreteEnergy::minimize_reduced`].
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub nehari: NehariPoint,
    /// Full (unprojected) Sobolev gradient norm at the returned point.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub log: Vec<IterationRecord>,
}

/// The discrete energy functional
///
/// ```text
/// I(u) = 1/2 u' A u + lambda/2 sum_i w_i (L_i u_i, u_i) - sum_i w_i W(t_i, u_i)
/// ```
///
/// on a fixed grid with a fixed free-node mask (pinned nodes carry zero),
/// together with the Cholesky factor of the Gram matrix `(A + lambda M)`
/// on the free dofs used for Sobolev gradients.
pub struct DiscreteEnergy {
    grid: Grid1D,
    n_components: usize,
    stiffness: FracStiffness,
    lambda: f64,
    potential: PotentialSpec,
    /// Trapezoid weights per node.
    quad: Vec<f64>,
    /// `L(t_i)` flattened row-major, `nc * nc` per node.
    weight_blocks: Vec<f64>,
    /// Flat dof mask (`node * nc + component`).
    free: Vec<bool>,
    free_dofs: Vec<usize>,
    gram: CholeskyFactor,
}

impl DiscreteEnergy {
    /// Assembles the functional and factors the Gram matrix on the free
    /// dofs. `lambda = 0` gives the unweighted (boundary value) branch.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        grid: Grid1D,
        n_components: usize,
        order: FracOrder,
        lambda: f64,
        potential: PotentialSpec,
        weight: &WeightSpec,
        free: Vec<bool>,
        mode: ExecMode,
    ) -> Result<Self> {
        let n = grid.len();
        if free.len() != n * n_components {
            return Err(FhsError::InvalidConfig(
                "free-dof mask length does not match grid".into(),
            ));
        }
        if weight.n_components() != n_components {
            return Err(FhsError::InvalidConfig(format!(
                "weight dimension {} does not match problem dimension {}",
                weight.n_components(),
                n_components
            )));
        }
        let stiffness = FracStiffness::new(order, grid.clone());
        let quad = grid.trapezoid_weights();

        let block_len = n_components * n_components;
        let mut weight_blocks = vec![0.0; n * block_len];
        for (i, t) in grid.nodes().enumerate() {
            weight.eval_matrix_into(t, &mut weight_blocks[i * block_len..(i + 1) * block_len]);
        }

        let free_dofs: Vec<usize> = (0..free.len()).filter(|&k| free[k]).collect();
        if free_dofs.is_empty() {
            return Err(FhsError::InvalidConfig("no free degrees of freedom".into()));
        }

        // Gram matrix (A + lambda M) restricted to free dofs: the stiffness
        // acts componentwise, the weighted mass couples components within a
        // node.
        let dense_a = stiffness.assemble_dense();
        let m = free_dofs.len();
        let mut gram = SymMatrix::zeros(m);
        for (p, &dof_p) in free_dofs.iter().enumerate() {
            let (node_p, comp_p) = (dof_p / n_components, dof_p % n_components);
            for (q, &dof_q) in free_dofs.iter().enumerate().take(p + 1) {
                let (node_q, comp_q) = (dof_q / n_components, dof_q % n_components);
                let mut v = 0.0;
                if comp_p == comp_q {
                    v += dense_a.get(node_p, node_q);
                }
                if node_p == node_q && lambda != 0.0 {
                    v += lambda
                        * quad[node_p]
                        * weight_blocks[node_p * block_len + comp_p * n_components + comp_q];
                }
                if v != 0.0 {
                    gram.set(p, q, v);
                }
            }
        }
        let gram = gram.cholesky(mode)?;

        Ok(Self {
            grid,
            n_components,
            stiffness,
            lambda,
            potential,
            quad,
            weight_blocks,
            free,
            free_dofs,
            gram,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn free_mask(&self) -> &[bool] {
        &self.free
    }

    pub fn stiffness(&self) -> &FracStiffness {
        &self.stiffness
    }

    /// Zeroes the pinned dofs in place.
    pub fn project_free(&self, u: &mut [f64]) {
        for (v, &is_free) in u.iter_mut().zip(&self.free) {
            if !is_free {
                *v = 0.0;
            }
        }
    }

    /// `sum_i w_i (L_i u_i, u_i)` (without the lambda factor).
    pub fn mass_term(&self, u: &[f64]) -> f64 {
        let nc = self.n_components;
        let block_len = nc * nc;
        let mut acc = 0.0;
        for i in 0..self.grid.len() {
            let block = &self.weight_blocks[i * block_len..(i + 1) * block_len];
            let ui = &u[i * nc..(i + 1) * nc];
            let mut node = 0.0;
            for r in 0..nc {
                for c in 0..nc {
                    node += block[r * nc + c] * ui[r] * ui[c];
                }
            }
            acc += self.quad[i] * node;
        }
        acc
    }

    /// Trapezoid quadrature of `W(t, u)`.
    pub fn nonlinear_term(&self, u: &[f64]) -> f64 {
        let nc = self.n_components;
        let mut acc = 0.0;
        for (i, t) in self.grid.nodes().enumerate() {
            acc += self.quad[i] * self.potential.eval_w(t, &u[i * nc..(i + 1) * nc]);
        }
        acc
    }

    /// `||u||^2` in the weighted energy inner product.
    pub fn x_norm_sq(&self, u: &[f64]) -> f64 {
        self.stiffness.energy_flat(u, self.n_components) + self.lambda * self.mass_term(u)
    }

    /// Weighted energy inner product.
    pub fn x_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let nc = self.n_components;
        let block_len = nc * nc;
        let mut mass = 0.0;
        for i in 0..self.grid.len() {
            let block = &self.weight_blocks[i * block_len..(i + 1) * block_len];
            let ui = &u[i * nc..(i + 1) * nc];
            let vi = &v[i * nc..(i + 1) * nc];
            let mut node = 0.0;
            for r in 0..nc {
                for c in 0..nc {
                    node += block[r * nc + c] * ui[r] * vi[c];
                }
            }
            mass += self.quad[i] * node;
        }
        self.stiffness.inner_flat(u, v, nc) + self.lambda * mass
    }

    /// `I(u)`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        0.5 * self.x_norm_sq(u) - self.nonlinear_term(u)
    }

    /// Quadrature-weighted gradient vector of the potential term.
    pub fn weighted_potential_gradient(&self, u: &[f64]) -> Vec<f64> {
        let nc = self.n_components;
        let mut out = vec![0.0; u.len()];
        let mut g = vec![0.0; nc];
        for (i, t) in self.grid.nodes().enumerate() {
            self.potential
                .eval_grad_into(t, &u[i * nc..(i + 1) * nc], &mut g);
            for c in 0..nc {
                out[i * nc + c] = self.quad[i] * g[c];
            }
        }
        out
    }

    /// Dual residual `r = (A + lambda M) u - Omega grad W(u)` restricted to
    /// the free dofs (zero on pinned ones), plus the weighted potential
    /// gradient it was built from. `r . v = I'(u) v` for admissible `v`.
    pub fn residual(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nc = self.n_components;
        let block_len = nc * nc;
        let mut r = self.stiffness.apply_flat(u, nc);
        if self.lambda != 0.0 {
            for i in 0..self.grid.len() {
                let block = &self.weight_blocks[i * block_len..(i + 1) * block_len];
                let ui = &u[i * nc..(i + 1) * nc];
                for c in 0..nc {
                    let mut node = 0.0;
                    for k in 0..nc {
                        node += block[c * nc + k] * ui[k];
                    }
                    r[i * nc + c] += self.lambda * self.quad[i] * node;
                }
            }
        }
        let wg = self.weighted_potential_gradient(u);
        for (rv, g) in r.iter_mut().zip(&wg) {
            *rv -= g;
        }
        self.project_free(&mut r);
        (r, wg)
    }

    /// Sobolev gradient: the Riesz representative `g` of `I'(u)` in the
    /// weighted inner product, solving `<g, v> = I'(u) v` on the free dofs.
    /// Returns `(g, r)` with `r` the dual residual; `g . r = ||g||^2`.
    pub fn gradient(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (r, _) = self.residual(u);
        let g = self.riesz(&r);
        (g, r)
    }

    fn riesz(&self, dual: &[f64]) -> Vec<f64> {
        let mut compact: Vec<f64> = self.free_dofs.iter().map(|&k| dual[k]).collect();
        self.gram.solve_in_place(&mut compact);
        let mut g = vec![0.0; dual.len()];
        for (&k, &v) in self.free_dofs.iter().zip(&compact) {
            g[k] = v;
        }
        g
    }

    /// Dual norm of the Euler-Lagrange residual at `u`; coincides with the
    /// Sobolev gradient norm and vanishes exactly at discrete critical
    /// points.
    pub fn residual_dual_norm(&self, u: &[f64]) -> f64 {
        let (g, r) = self.gradient(u);
        dot(&g, &r).max(0.0).sqrt()
    }

    /// `h'(s) = s ||d||^2 - sum_i w_i (grad W(t_i, s d_i), d_i)` given
    /// `k = ||d||^2`.
    fn fibering_derivative(&self, d: &[f64], k: f64, s: f64, su: &mut [f64], scratch: &mut [f64]) -> f64 {
        let nc = self.n_components;
        let mut nonlinear = 0.0;
        for (i, t) in self.grid.nodes().enumerate() {
            let di = &d[i * nc..(i + 1) * nc];
            for (c, v) in su.iter_mut().enumerate() {
                *v = s * di[c];
            }
            nonlinear += self.quad[i] * self.potential.grad_dot(t, su, di, scratch);
        }
        s * k - nonlinear
    }

    /// Finds the unique positive root of `h'` along the ray through `d` by
    /// geometric bracket expansion and Brent's method. `guess` warm-starts
    /// the expansion.
    pub fn fibering_sigma(
        &self,
        d: &[f64],
        opts: &OptimizerOptions,
        guess: Option<f64>,
    ) -> Result<FiberingResult> {
        let k = self.x_norm_sq(d);
        if k <= 0.0 {
            return Err(FhsError::ZeroDirection);
        }
        let mut su = vec![0.0; self.n_components];
        let mut scratch = vec![0.0; self.n_components];
        let mut dphi = |s: f64| self.fibering_derivative(d, k, s, &mut su, &mut scratch);
        let tol = opts.fibering_tol * k;

        // bracket the sign change: h' > 0 near 0, < 0 for large s
        let mut s = guess.unwrap_or(1.0).max(1e-12);
        let mut expansions = 0;
        let mut value = dphi(s);
        let (lo, f_lo, hi, f_hi);
        if value > 0.0 {
            loop {
                let next = s * 2.0;
                let f_next = dphi(next);
                if f_next <= 0.0 {
                    (lo, f_lo, hi, f_hi) = (s, value, next, f_next);
                    break;
                }
                s = next;
                value = f_next;
                expansions += 1;
                if expansions >= opts.fibering_max_expansions {
                    return Err(FhsError::BracketFailure {
                        expansions,
                        sigma: s,
                        value,
                    });
                }
            }
        } else {
            loop {
                let next = s * 0.5;
                let f_next = dphi(next);
                if f_next > 0.0 {
                    (lo, f_lo, hi, f_hi) = (next, f_next, s, value);
                    break;
                }
                s = next;
                value = f_next;
                expansions += 1;
                if expansions >= opts.fibering_max_expansions {
                    return Err(FhsError::BracketFailure {
                        expansions,
                        sigma: s,
                        value,
                    });
                }
            }
        }
        let bracket = (lo, hi);

        // Brent root-finding on the bracket
        let mut a = lo;
        let mut b = hi;
        let mut fa = f_lo;
        let mut fb = f_hi;
        let mut c = a;
        let mut fc = fa;
        let mut d_step = b - a;
        let mut e_step = d_step;
        let mut iterations = 0;
        for _ in 0..opts.fibering_max_iters {
            iterations += 1;
            if fb.abs() <= tol {
                break;
            }
            if fb.signum() == fc.signum() {
                c = a;
                fc = fa;
                d_step = b - a;
                e_step = d_step;
            }
            if fc.abs() < fb.abs() {
                a = b;
                b = c;
                c = a;
                fa = fb;
                fb = fc;
                fc = fa;
            }
            let tol1 = 2.0 * f64::EPSILON * b.abs();
            let xm = 0.5 * (c - b);
            if xm.abs() <= tol1 {
                break;
            }
            if e_step.abs() >= tol1 && fa.abs() > fb.abs() {
                let ratio = fb / fa;
                let (mut p, mut q);
                if a == c {
                    p = 2.0 * xm * ratio;
                    q = 1.0 - ratio;
                } else {
                    let q0 = fa / fc;
                    let r0 = fb / fc;
                    p = ratio * (2.0 * xm * q0 * (q0 - r0) - (b - a) * (r0 - 1.0));
                    q = (q0 - 1.0) * (r0 - 1.0) * (ratio - 1.0);
                }
                if p > 0.0 {
                    q = -q;
                }
                p = p.abs();
                if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e_step * q).abs()) {
                    e_step = d_step;
                    d_step = p / q;
                } else {
                    d_step = xm;
                    e_step = d_step;
                }
            } else {
                d_step = xm;
                e_step = d_step;
            }
            a = b;
            fa = fb;
            b += if d_step.abs() > tol1 {
                d_step
            } else {
                tol1.copysign(xm)
            };
            fb = dphi(b);
        }

        let sigma = b;
        let derivative_residual = fb.abs();
        let mut sd = d.to_vec();
        for v in &mut sd {
            *v *= sigma;
        }
        let value = 0.5 * sigma * sigma * k - self.nonlinear_term(&sd);
        Ok(FiberingResult {
            sigma,
            value,
            derivative_residual,
            bracket,
            iterations,
        })
    }

    /// Normalizes `u`, applies the fibering map, and returns the projected
    /// Nehari point.
    pub fn nehari_project(&self, u: &[f64], opts: &OptimizerOptions) -> Result<NehariPoint> {
        let mut w = u.to_vec();
        self.project_free(&mut w);
        let k = self.x_norm_sq(&w);
        if k <= 0.0 {
            return Err(FhsError::ZeroDirection);
        }
        normalize(&mut w, k);
        let fib = self.fibering_sigma(&w, opts, None)?;
        let mut point = w;
        for v in &mut point {
            *v *= fib.sigma;
        }
        let nehari_residual = (fib.sigma * fib.derivative_residual).abs();
        let point = GridFunction::from_values(self.grid.clone(), self.n_components, point)?;
        Ok(NehariPoint {
            point,
            energy: fib.value,
            nehari_residual,
            x_norm: fib.sigma,
        })
    }

    /// Riemannian gradient descent for `Phi(w) = I(m(w))` on the unit
    /// sphere. Returns the Nehari point of the final iterate with its
    /// gradient norm; `converged` reflects the gradient tolerance, and a
    /// step underflow is reported as its own stop reason, never as success.
    pub fn minimize_reduced(
        &self,
        start: &[f64],
        opts: &OptimizerOptions,
    ) -> Result<MinimizeOutcome> {
        let mut w = start.to_vec();
        self.project_free(&mut w);
        let k0 = self.x_norm_sq(&w);
        if k0 <= 0.0 {
            return Err(FhsError::ZeroDirection);
        }
        normalize(&mut w, k0);

        let mut log = Vec::new();
        let mut sigma_guess: Option<f64> = None;
        let mut stop_reason = StopReason::MaxIterations;
        let mut iterations = 0;
        let mut trial = vec![0.0; w.len()];

        for iter in 0..opts.max_iters {
            iterations = iter;
            let fib = self.fibering_sigma(&w, opts, sigma_guess)?;
            let sigma = fib.sigma;
            sigma_guess = Some(sigma);
            let phi = fib.value;

            // Sobolev gradient at the projected point m = sigma w
            let m: Vec<f64> = w.iter().map(|v| v * sigma).collect();
            let (r, wg) = self.residual(&m);
            let g = self.riesz(&r);
            let grad_sq = dot(&g, &r).max(0.0);
            let grad_norm = grad_sq.sqrt();

            // radial component <g, w> via (A + lambda M) m = r + Omega grad W
            let c_rad = self
                .free_dofs
                .iter()
                .map(|&kk| g[kk] * (r[kk] + wg[kk]))
                .sum::<f64>()
                / sigma;
            let tan_sq = (grad_sq - c_rad * c_rad).max(0.0);
            let grad_phi_norm = sigma * tan_sq.sqrt();

            if grad_norm <= opts.grad_tol {
                if opts.keep_log {
                    log.push(IterationRecord {
                        iteration: iter,
                        phi,
                        grad_phi_norm,
                        step: 0.0,
                    });
                }
                stop_reason = StopReason::GradientTolerance;
                break;
            }

            // descent direction: minus the tangential gradient at w
            let dir: Vec<f64> = g
                .iter()
                .zip(&w)
                .map(|(gv, wv)| -(gv - c_rad * wv))
                .collect();
            let slope = sigma * tan_sq; // = -<Phi'(w), dir>

            let mut step = opts.step_init;
            let mut accepted = false;
            while step >= opts.step_min {
                for ((t, &wv), &dv) in trial.iter_mut().zip(&w).zip(&dir) {
                    *t = wv + step * dv;
                }
                let k_trial = self.x_norm_sq(&trial);
                if k_trial > 0.0 {
                    // the projected value is scale invariant, so the trial
                    // need not be normalized before fibering
                    let fib_trial = self.fibering_sigma(&trial, opts, sigma_guess)?;
                    if fib_trial.value <= phi - opts.armijo_c1 * step * slope {
                        if opts.keep_log {
                            log.push(IterationRecord {
                                iteration: iter,
                                phi: fib_trial.value,
                                grad_phi_norm,
                                step,
                            });
                        }
                        normalize(&mut trial, k_trial);
                        w.copy_from_slice(&trial);
                        sigma_guess = Some(fib_trial.sigma * k_trial.sqrt());
                        accepted = true;
                        break;
                    }
                }
                step *= opts.step_shrink;
            }
            if !accepted {
                stop_reason = StopReason::StepUnderflow;
                break;
            }
        }

        // final certificates at the current iterate
        let fib = self.fibering_sigma(&w, opts, sigma_guess)?;
        let mut m: Vec<f64> = w.iter().map(|v| v * fib.sigma).collect();
        self.canonicalize_sign(&mut m);
        let (g, r) = self.gradient(&m);
        let gradient_norm = dot(&g, &r).max(0.0).sqrt();
        let converged = gradient_norm <= opts.grad_tol;
        if converged {
            stop_reason = StopReason::GradientTolerance;
        }
        let nehari_residual = (fib.sigma * fib.derivative_residual).abs();
        let point = GridFunction::from_values(self.grid.clone(), self.n_components, m)?;
        Ok(MinimizeOutcome {
            nehari: NehariPoint {
                point,
                energy: fib.value,
                nehari_residual,
                x_norm: fib.sigma,
            },
            gradient_norm,
            iterations,
            converged,
            stop_reason,
            log,
        })
    }

    /// Ground states of even potentials come in sign pairs; pick the
    /// representative whose largest-magnitude node has a positive leading
    /// component, so results are reproducible across starts.
    fn canonicalize_sign(&self, u: &mut [f64]) {
        let nc = self.n_components;
        let n = self.grid.len();
        let mut best = (0usize, 0.0f64);
        for i in 0..n {
            let mag: f64 = u[i * nc..(i + 1) * nc].iter().map(|v| v * v).sum();
            if mag > best.1 {
                best = (i, mag);
            }
        }
        if best.1 == 0.0 {
            return;
        }
        let node: Vec<f64> = u[best.0 * nc..(best.0 + 1) * nc].to_vec();
        let lead = node.iter().find(|v| v.abs() > 0.0).copied().unwrap_or(1.0);
        if lead >= 0.0 {
            return;
        }
        let t = self.grid.node(best.0);
        if self.potential.is_even_at(t, &node, 1e-10) {
            for v in u.iter_mut() {
                *v = -*v;
            }
        }
    }
}

fn normalize(u: &mut [f64], norm_sq: f64) {
    let inv = 1.0 / norm_sq.sqrt();
    for v in u.iter_mut() {
        *v *= inv;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
