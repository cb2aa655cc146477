//! Problem assembly and end-to-end ground-state computation.
//!
//! Two problems share one code path. The truncated-line problem minimizes
//! the weighted energy over functions on `[-R, R]` vanishing at the
//! truncation boundary. The Dirichlet boundary value problem on the core
//! interval is the same discrete functional with the `lambda` term dropped
//! and the free nodes restricted to the interior of the core: its
//! candidates are a subset of the line problem's, and the two energies use
//! identical quadrature and stiffness sums, which is what makes the
//! ordering `c_lambda <= c_tilde` exact at the discrete level (any
//! core-supported candidate pays no weighted mass for any `lambda`).
//!
//! "Ground state" is certified operationally by multistart consensus:
//! independently seeded descents plus deterministic structured seeds (a
//! smooth core bump, optional warm starts), merged by `(energy, start
//! index)`.

use crate::error::{FhsError, Result};
use crate::exec::{self, ExecMode};
use crate::fracops::FracOrder;
use crate::gamma::gamma;
use crate::grid::{Grid1D, GridFunction};
use crate::nehari::{DiscreteEnergy, IterationRecord, MinimizeOutcome, OptimizerOptions};
use crate::potentials::{PotentialSpec, SamplePlan, WeightSpec};
use crate::spaces::EmbeddingEstimate;

/// Full specification of one solve.
#[derive(Clone)]
pub struct ProblemConfig {
    pub order: FracOrder,
    /// Weight multiplier; ignored by the boundary value branch.
    pub lambda: f64,
    /// Half-width `R` of the truncation window `[-R, R]`.
    pub truncation_radius: f64,
    pub n_nodes: usize,
    pub n_components: usize,
    pub potential: PotentialSpec,
    pub weight: WeightSpec,
    pub optimizer: OptimizerOptions,
    pub multistart_count: usize,
    pub seed: u64,
    pub exec_mode: ExecMode,
    /// Largest admissible `|u|` near the truncation boundary, relative to
    /// the peak; larger values mean `R` is too small. Fractional states
    /// carry algebraic tails, so the default monitor (1e-3) flags gross
    /// truncation only.
    pub boundary_tolerance: f64,
    /// Skip the hypothesis audit (used when the caller already ran it).
    pub skip_validation: bool,
}

impl ProblemConfig {
    pub fn line_grid(&self) -> Result<Grid1D> {
        Grid1D::new(-self.truncation_radius, self.truncation_radius, self.n_nodes)
    }

    /// Structural checks shared by both branches.
    pub fn validate(&self) -> Result<()> {
        self.order.require_solver_range()?;
        if self.n_components != self.weight.n_components() {
            return Err(FhsError::InvalidConfig(
                "problem and weight dimensions differ".into(),
            ));
        }
        if self.multistart_count == 0 {
            return Err(FhsError::InvalidConfig("multistart_count must be >= 1".into()));
        }
        let grid = self.line_grid()?;
        let (t_lo, t_hi) = self.weight.core();
        if !(-self.truncation_radius < t_lo && t_hi < self.truncation_radius) {
            return Err(FhsError::InvalidConfig(format!(
                "core interval [{t_lo}, {t_hi}] must lie strictly inside [-R, R] = [{}, {}]",
                -self.truncation_radius, self.truncation_radius
            )));
        }
        // the core endpoints must fall on mesh nodes so that support masks
        // and zero extension are exact
        let lo_idx = grid.index_of(t_lo).ok_or_else(|| {
            FhsError::InvalidConfig(format!(
                "core endpoint {t_lo} does not lie on a mesh node (h = {})",
                grid.h()
            ))
        })?;
        let hi_idx = grid.index_of(t_hi).ok_or_else(|| {
            FhsError::InvalidConfig(format!(
                "core endpoint {t_hi} does not lie on a mesh node (h = {})",
                grid.h()
            ))
        })?;
        if hi_idx - lo_idx + 1 < 64 {
            return Err(FhsError::InvalidConfig(format!(
                "grid resolves the core interval with only {} nodes (need >= 64)",
                hi_idx - lo_idx + 1
            )));
        }
        Ok(())
    }

    /// Free-dof mask for the truncated-line problem: interior nodes only.
    pub fn line_free_mask(&self, grid: &Grid1D) -> Vec<bool> {
        let n = grid.len();
        let nc = self.n_components;
        let mut free = vec![true; n * nc];
        for c in 0..nc {
            free[c] = false;
            free[(n - 1) * nc + c] = false;
        }
        free
    }

    /// Free-dof mask for the boundary value problem: the closed core
    /// interval, zero everywhere else. The boundary condition is carried
    /// by the zero extension seen by the nonlocal operator; the endpoint
    /// nodal values converge to zero under refinement. Pinning them
    /// instead would detach the problem from the large-lambda limit of the
    /// weighted functional, which cannot penalize the endpoint nodes
    /// (`L` vanishes on the closed core).
    pub fn bvp_free_mask(&self, grid: &Grid1D) -> Vec<bool> {
        let (t_lo, t_hi) = self.weight.core();
        let nc = self.n_components;
        let mut free = vec![false; grid.len() * nc];
        for (i, t) in grid.nodes().enumerate() {
            if t >= t_lo - 1e-12 && t <= t_hi + 1e-12 {
                for c in 0..nc {
                    free[i * nc + c] = true;
                }
            }
        }
        free
    }

    /// Assembles the line functional (weight active, boundary pinned).
    pub fn assemble_line(&self) -> Result<DiscreteEnergy> {
        let grid = self.line_grid()?;
        let free = self.line_free_mask(&grid);
        DiscreteEnergy::assemble(
            grid,
            self.n_components,
            self.order,
            self.lambda,
            self.potential.clone(),
            &self.weight,
            free,
            self.exec_mode,
        )
    }

    /// Assembles the boundary-value functional (`lambda = 0`, core mask).
    pub fn assemble_bvp(&self) -> Result<DiscreteEnergy> {
        let grid = self.line_grid()?;
        let free = self.bvp_free_mask(&grid);
        DiscreteEnergy::assemble(
            grid,
            self.n_components,
            self.order,
            0.0,
            self.potential.clone(),
            &self.weight,
            free,
            self.exec_mode,
        )
    }
}

/// Norm checks of the boundary value solution on the core window
/// `[0, L]`: the Poincare-type bound
/// `||u||_L2 <= L^a / Gamma(a+1) ||D_left^a u||_L2` and the sup bound
/// `|u|_inf <= L^{a-1/2} / (Gamma(a) (2a-1)^{1/2}) ||D_left^a u||_L2`.
#[derive(Debug, Clone)]
pub struct CoreWindowChecks {
    pub l2: f64,
    pub frac_deriv_l2: f64,
    pub sup: f64,
    pub poincare_bound: f64,
    pub sup_bound: f64,
    pub poincare_ok: bool,
    pub sup_ok: bool,
}

/// Converged minimizer with its certificates and diagnostics.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub u: GridFunction,
    pub energy: f64,
    /// Full Sobolev gradient norm at `u` (dual norm of the Euler-Lagrange
    /// residual).
    pub gradient_norm: f64,
    pub nehari_residual: f64,
    pub x_norm: f64,
    /// Largest magnitude over the outermost interior band of the window
    /// (the boundary nodes themselves are pinned to zero).
    pub boundary_magnitude: f64,
    /// Largest gap between converged multistart energies and the minimum.
    pub multistart_spread: f64,
    pub converged_runs: usize,
    pub total_runs: usize,
    pub iterations: usize,
    pub log: Vec<IterationRecord>,
    pub warnings: Vec<String>,
    /// Present for the boundary value branch.
    pub core_checks: Option<CoreWindowChecks>,
}

/// Smooth compactly supported bump inside the core interval: the classic
/// `exp(-1/(1-x^2))` profile over the middle 96% of the core, exactly zero
/// at every node outside. Used as a structured multistart seed and as the
/// reference direction for the lambda-free energy cap.
pub fn core_bump(grid: &Grid1D, core: (f64, f64), n_components: usize) -> Vec<f64> {
    let center = 0.5 * (core.0 + core.1);
    let half = 0.48 * (core.1 - core.0);
    let mut values = vec![0.0; grid.len() * n_components];
    for (i, t) in grid.nodes().enumerate() {
        let x = (t - center) / half;
        if x.abs() < 1.0 {
            values[i * n_components] = (-1.0 / (1.0 - x * x)).exp();
        }
    }
    values
}

/// Seeded random Gaussian start; the free mask is applied by the caller.
fn random_start(
    grid: &Grid1D,
    n_components: usize,
    window: (f64, f64),
    seed: u64,
    index: usize,
) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
        seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
    );
    let span = window.1 - window.0;
    let center = rng.random_range(window.0 + 0.1 * span..window.1 - 0.1 * span);
    let width = span * rng.random_range(0.03..0.3);
    let amplitude = rng.random_range(0.5..2.0);
    let mut values = vec![0.0; grid.len() * n_components];
    for (i, t) in grid.nodes().enumerate() {
        let x = (t - center) / width;
        values[i * n_components] = amplitude * (-x * x).exp();
    }
    if n_components > 1 {
        // distribute a fraction of the bump into the other components
        let mix = rng.random_range(0.0..0.5);
        for i in 0..grid.len() {
            for c in 1..n_components {
                values[i * n_components + c] = mix * values[i * n_components];
            }
        }
    }
    values
}

struct MultistartOutcome {
    best: MinimizeOutcome,
    spread: f64,
    converged_runs: usize,
    total_runs: usize,
}

/// Runs the descent from structured seeds plus `count` random bumps;
/// results merge deterministically by `(energy, start index)` regardless
/// of execution order.
fn multistart(
    model: &DiscreteEnergy,
    config: &ProblemConfig,
    window: (f64, f64),
    structured: &[Vec<f64>],
) -> Result<MultistartOutcome> {
    let grid = model.grid().clone();
    let total = structured.len() + config.multistart_count;
    let outcomes = exec::map_indexed(config.exec_mode, total, |i| {
        let start = if i < structured.len() {
            structured[i].clone()
        } else {
            random_start(
                &grid,
                config.n_components,
                window,
                config.seed,
                i - structured.len(),
            )
        };
        model.minimize_reduced(&start, &config.optimizer)
    });

    let mut best: Option<(usize, MinimizeOutcome)> = None;
    let mut converged_runs = 0;
    let mut energies = Vec::new();
    let mut first_error: Option<FhsError> = None;
    for (i, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok(out) if out.converged => {
                converged_runs += 1;
                energies.push(out.nehari.energy);
                let better = best
                    .as_ref()
                    .map(|(_, b)| out.nehari.energy < b.nehari.energy)
                    .unwrap_or(true);
                if better {
                    best = Some((i, out));
                }
            }
            Ok(_) => {}
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    let Some((_, best)) = best else {
        let detail = match first_error {
            Some(e) => format!("{total} starts, none converged; first failure: {e}"),
            None => format!("{total} starts, none reached the gradient tolerance"),
        };
        return Err(FhsError::NoConvergence(detail));
    };
    let e_min = best.nehari.energy;
    let spread = energies.iter().map(|e| e - e_min).fold(0.0f64, f64::max);
    Ok(MultistartOutcome {
        best,
        spread,
        converged_runs,
        total_runs: total,
    })
}

fn run_validation(config: &ProblemConfig, grid: &Grid1D) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    if config.skip_validation {
        return Ok(warnings);
    }
    let bound = crate::spaces::estimate_c_inf_with(config.order, 64, config.seed, config.exec_mode);
    let est = EmbeddingEstimate::for_weight(bound, &config.weight, grid)?;
    if est.measure_condition_holds() && config.lambda < est.lambda_threshold {
        warnings.push(format!(
            "lambda = {} is below the embedding threshold {:.4}; the weighted-norm \
             inequalities are not guaranteed",
            config.lambda, est.lambda_threshold
        ));
    }
    let (j_lo, j_hi) = config.weight.zero_set();
    let plan = SamplePlan::reference(j_lo - 1.0, j_hi + 1.0);
    let report = crate::potentials::validate_hypotheses(
        &config.potential,
        &config.weight,
        &plan,
        grid,
        &est,
        config.exec_mode,
    );
    if !report.passed() {
        return Err(FhsError::ValidationFailed(report.summary()));
    }
    for w in report.warnings() {
        warnings.push(format!("{}: {}", w.hypothesis, w.detail));
    }
    Ok(warnings)
}

/// Peak magnitude over the outermost interior band (about 1% of the grid,
/// at least 8 nodes, on each side); the pinned boundary nodes are exact
/// zeros and say nothing about truncation error.
fn near_edge_magnitude(u: &GridFunction) -> f64 {
    let n = u.grid().len();
    let band = (n / 100).clamp(8, n / 4);
    let mut worst = 0.0f64;
    for k in 0..=band {
        worst = worst.max(u.node_magnitude(k)).max(u.node_magnitude(n - 1 - k));
    }
    worst
}

fn finish(
    model: &DiscreteEnergy,
    config: &ProblemConfig,
    ms: MultistartOutcome,
    warnings: Vec<String>,
    core_checks: Option<CoreWindowChecks>,
) -> Result<GroundState> {
    let out = ms.best;
    let u = out.nehari.point;
    let boundary_magnitude = near_edge_magnitude(&u);
    let peak = u.max_magnitude();
    if boundary_magnitude > config.boundary_tolerance * peak.max(1e-300) {
        return Err(FhsError::NonDecaying {
            magnitude: boundary_magnitude,
            tolerance: config.boundary_tolerance,
        });
    }
    // consistency of the two residual routes at the solution
    debug_assert!({
        let direct = model.residual_dual_norm(u.values());
        (direct - out.gradient_norm).abs() <= 1e-9 * out.gradient_norm.max(1e-12)
    });
    let _ = model;
    Ok(GroundState {
        energy: out.nehari.energy,
        gradient_norm: out.gradient_norm,
        nehari_residual: out.nehari.nehari_residual,
        x_norm: out.nehari.x_norm,
        boundary_magnitude,
        multistart_spread: ms.spread,
        converged_runs: ms.converged_runs,
        total_runs: ms.total_runs,
        iterations: out.iterations,
        log: out.log,
        warnings,
        core_checks,
        u,
    })
}

/// Ground state of the truncated-line problem at `config.lambda`.
/// `warm_starts` are prepended to the multistart seeds.
pub fn solve_line_with(config: &ProblemConfig, warm_starts: &[Vec<f64>]) -> Result<GroundState> {
    config.validate()?;
    if !(config.lambda > 0.0) {
        return Err(FhsError::InvalidConfig(format!(
            "line problem needs lambda > 0, got {}",
            config.lambda
        )));
    }
    let grid = config.line_grid()?;
    let warnings = run_validation(config, &grid)?;
    let model = config.assemble_line()?;
    let mut structured = vec![core_bump(&grid, config.weight.core(), config.n_components)];
    structured.extend_from_slice(warm_starts);
    // Random bump centers cover the zero set of the weight and one extra
    // width on each side: above the embedding threshold the weighted term
    // penalizes mass elsewhere, so minimizers concentrate here. Far-field
    // starts only find high-energy localized states that the merge
    // discards at great iteration cost.
    let (j_lo, j_hi) = config.weight.zero_set();
    let j_width = j_hi - j_lo;
    let window = (
        (j_lo - j_width).max(grid.a() + 4.0 * grid.h()),
        (j_hi + j_width).min(grid.b() - 4.0 * grid.h()),
    );
    let ms = multistart(&model, config, window, &structured)?;
    finish(&model, config, ms, warnings, None)
}

pub fn solve_line(config: &ProblemConfig) -> Result<GroundState> {
    solve_line_with(config, &[])
}

/// Ground state of the Dirichlet boundary value problem on the core
/// interval (the line functional restricted to core-supported functions,
/// no weighted term).
pub fn solve_bvp(config: &ProblemConfig) -> Result<GroundState> {
    config.validate()?;
    let grid = config.line_grid()?;
    let warnings = run_validation(config, &grid)?;
    let model = config.assemble_bvp()?;
    let core = config.weight.core();
    let structured = vec![core_bump(&grid, core, config.n_components)];
    let ms = multistart(&model, config, core, &structured)?;
    let checks = core_window_checks(&model, ms.best.nehari.point.values(), config, core);
    finish(&model, config, ms, warnings, Some(checks))
}

/// Dual norm of the discrete Euler-Lagrange residual of `u`; zero exactly
/// at discrete critical points and equal to the Sobolev gradient norm.
pub fn strong_residual(model: &DiscreteEnergy, u: &GridFunction) -> Result<f64> {
    if u.grid() != model.grid() || u.n_components() != model.n_components() {
        return Err(FhsError::GridMismatch);
    }
    Ok(model.residual_dual_norm(u.values()))
}

fn core_window_checks(
    model: &DiscreteEnergy,
    u: &[f64],
    config: &ProblemConfig,
    core: (f64, f64),
) -> CoreWindowChecks {
    let grid = model.grid();
    let nc = config.n_components;
    let alpha = config.order.alpha();
    let len = core.1 - core.0;

    // left fractional derivative on the full grid; window sums with
    // trapezoid weights over the core
    let op =
        crate::fracops::FracOpMatrix::new(config.order, grid.clone(), crate::fracops::OpSide::Left);
    let gf = GridFunction::from_values(grid.clone(), nc, u.to_vec()).expect("solution is finite");
    let du = op.apply(&gf).expect("same grid");

    let lo = grid.index_of(core.0).expect("validated");
    let hi = grid.index_of(core.1).expect("validated");
    let h = grid.h();
    let mut l2_sq = 0.0;
    let mut frac_sq = 0.0;
    let mut sup = 0.0f64;
    for i in lo..=hi {
        let w = if i == lo || i == hi { 0.5 * h } else { h };
        let um = gf.node_magnitude(i);
        let dm = du.node_magnitude(i);
        l2_sq += w * um * um;
        frac_sq += w * dm * dm;
        sup = sup.max(um);
    }
    let l2 = l2_sq.sqrt();
    let frac_deriv_l2 = frac_sq.sqrt();
    let poincare_bound = len.powf(alpha) / gamma(alpha + 1.0) * frac_deriv_l2;
    let sup_bound =
        len.powf(alpha - 0.5) / (gamma(alpha) * (2.0 * alpha - 1.0).sqrt()) * frac_deriv_l2;
    CoreWindowChecks {
        l2,
        frac_deriv_l2,
        sup,
        poincare_bound,
        sup_bound,
        poincare_ok: l2 <= poincare_bound * (1.0 + 1e-9),
        sup_ok: sup <= sup_bound * (1.0 + 1e-9),
    }
}
