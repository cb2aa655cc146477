//! Potential and weight families, and numerical hypothesis validators.
//!
//! The variational theory needs a superquadratic potential `W(t, u)` with
//! gradient `grad W`, an Ambrosetti-Rabinowitz exponent `theta > 2`, and a
//! `t`-independent dominating function `Wbar`; and a continuous matrix
//! weight `L(t)` bounded below by `l(t) Id` whose lower-bound function
//! vanishes exactly on a finite interval `J` while `L` itself vanishes on a
//! core interval `T` inside `J`. Neither object is fixed analytically, so
//! this module provides a reference two-power potential and a ramp weight
//! that satisfy every hypothesis verifiably, plus a sampled validator for
//! user-supplied callables.

use crate::error::{FhsError, Result};
use crate::exec::{self, ExecMode};
use crate::grid::Grid1D;
use crate::spaces::EmbeddingEstimate;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type WFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type BarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;
type MatrixFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// The nonlinearity `W(t, u)` with its gradient, AR exponent, and
/// dominating function.
#[derive(Clone)]
pub struct PotentialSpec {
    w: Arc<WFn>,
    grad: Arc<GradFn>,
    theta: f64,
    w_bar: Arc<BarFn>,
    label: String,
}

impl PotentialSpec {
    /// Wraps user-supplied callables. No hypothesis is checked here; run
    /// [`validate_hypotheses`] to audit the result.
    pub fn custom(
        label: impl Into<String>,
        theta: f64,
        w: Arc<WFn>,
        grad: Arc<GradFn>,
        w_bar: Arc<BarFn>,
    ) -> Self {
        Self {
            w,
            grad,
            theta,
            w_bar,
            label: label.into(),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval_w(&self, t: f64, u: &[f64]) -> f64 {
        (self.w)(t, u)
    }

    pub fn eval_grad_into(&self, t: f64, u: &[f64], out: &mut [f64]) {
        (self.grad)(t, u, out)
    }

    pub fn eval_w_bar(&self, u: &[f64]) -> f64 {
        (self.w_bar)(u)
    }

    /// `(grad W(t, u), d)` without allocating; `scratch` has `u.len()` slots.
    pub fn grad_dot(&self, t: f64, u: &[f64], d: &[f64], scratch: &mut [f64]) -> f64 {
        (self.grad)(t, u, scratch);
        scratch.iter().zip(d).map(|(g, v)| g * v).sum()
    }

    /// Checks `W(t, -u) = W(t, u)` and `grad W(t, -u) = -grad W(t, u)` at
    /// one point; ground states of even potentials are sign-degenerate and
    /// may be sign-normalized.
    pub fn is_even_at(&self, t: f64, u: &[f64], tol: f64) -> bool {
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let w_plus = self.eval_w(t, u);
        let w_minus = self.eval_w(t, &neg);
        if (w_plus - w_minus).abs() > tol * w_plus.abs().max(1e-300) {
            return false;
        }
        let mut g_plus = vec![0.0; u.len()];
        let mut g_minus = vec![0.0; u.len()];
        self.eval_grad_into(t, u, &mut g_plus);
        self.eval_grad_into(t, &neg, &mut g_minus);
        let scale = g_plus.iter().map(|g| g.abs()).fold(1e-300, f64::max);
        g_plus
            .iter()
            .zip(&g_minus)
            .all(|(p, m)| (p + m).abs() <= tol * scale)
    }
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("label", &self.label)
            .field("theta", &self.theta)
            .finish()
    }
}

/// Bounded positive amplitude profile `a(t)` with certified bounds.
#[derive(Clone)]
pub struct AmplitudeProfile {
    f: Arc<ScalarFn>,
    a_min: f64,
    a_max: f64,
}

impl AmplitudeProfile {
    pub fn constant(a: f64) -> Result<Self> {
        Self::new(Arc::new(move |_| a), a, a)
    }

    pub fn new(f: Arc<ScalarFn>, a_min: f64, a_max: f64) -> Result<Self> {
        if !(a_min.is_finite() && a_max.is_finite() && 0.0 < a_min && a_min <= a_max) {
            return Err(FhsError::InvalidConfig(format!(
                "amplitude bounds must satisfy 0 < a_min <= a_max, got [{a_min}, {a_max}]"
            )));
        }
        Ok(Self { f, a_min, a_max })
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn a_min(&self) -> f64 {
        self.a_min
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }
}

/// Reference two-power potential
///
/// ```text
/// W(t, u) = a(t) ( |u|^th + th/(th+ep) |u|^{th+ep} ),
/// grad W  = a(t) th ( |u|^{th-2} + |u|^{th+ep-2} ) u,
/// ```
///
/// which satisfies the Ambrosetti-Rabinowitz condition with exponent `th`
/// (the surplus `(grad W, u) - th W = a th ep/(th+ep) |u|^{th+ep}` is
/// nonnegative), is sublinear at the origin for `th > 2`, is dominated by
/// a `t`-free envelope built from `a_max`, and has a strictly increasing
/// fibering ratio when `ep > 0` (constant when `ep = 0`).
pub fn builtin_potential(
    theta: f64,
    epsilon: f64,
    amplitude: AmplitudeProfile,
) -> Result<PotentialSpec> {
    if !(theta.is_finite() && theta > 2.0) {
        return Err(FhsError::InvalidConfig(format!(
            "potential exponent theta must exceed 2, got {theta}"
        )));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(FhsError::InvalidConfig(format!(
            "potential surplus exponent epsilon must be >= 0, got {epsilon}"
        )));
    }
    let mix = theta / (theta + epsilon);
    let a_max = amplitude.a_max();

    let amp_w = amplitude.clone();
    let w = Arc::new(move |t: f64, u: &[f64]| -> f64 {
        let r = norm(u);
        if r == 0.0 {
            return 0.0;
        }
        amp_w.eval(t) * (r.powf(theta) + mix * r.powf(theta + epsilon))
    });

    let amp_g = amplitude.clone();
    let grad = Arc::new(move |t: f64, u: &[f64], out: &mut [f64]| {
        let r = norm(u);
        if r == 0.0 {
            out.fill(0.0);
            return;
        }
        let factor = amp_g.eval(t) * theta * (r.powf(theta - 2.0) + r.powf(theta + epsilon - 2.0));
        for (o, v) in out.iter_mut().zip(u) {
            *o = factor * v;
        }
    });

    let w_bar = Arc::new(move |u: &[f64]| -> f64 {
        let r = norm(u);
        if r == 0.0 {
            return 0.0;
        }
        let value = r.powf(theta) + mix * r.powf(theta + epsilon);
        let grad_mag = theta * (r.powf(theta - 1.0) + r.powf(theta + epsilon - 1.0));
        a_max * (value + grad_mag)
    });

    Ok(PotentialSpec::custom(
        format!("two-power(theta={theta}, epsilon={epsilon})"),
        theta,
        w,
        grad,
        w_bar,
    ))
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Matrix weight `L(t)` with lower-bound function `l(t)`, threshold `c`,
/// zero interval `J = int(l^{-1}(0))`, and core interval `T` (closed)
/// inside `J` where `L` vanishes identically.
#[derive(Clone)]
pub struct WeightSpec {
    eval_l: Arc<ScalarFn>,
    eval_matrix: Arc<MatrixFn>,
    n_components: usize,
    c: f64,
    zero_set: (f64, f64),
    core: (f64, f64),
    sublevel_measure_closed_form: Option<f64>,
}

impl WeightSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        n_components: usize,
        c: f64,
        zero_set: (f64, f64),
        core: (f64, f64),
        eval_l: Arc<ScalarFn>,
        eval_matrix: Arc<MatrixFn>,
    ) -> Result<Self> {
        if n_components == 0 {
            return Err(FhsError::InvalidConfig("n_components must be >= 1".into()));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(FhsError::InvalidConfig(format!(
                "sublevel threshold c must be positive, got {c}"
            )));
        }
        if !(zero_set.0 < zero_set.1) {
            return Err(FhsError::InvalidConfig(format!(
                "zero set J = ({}, {}) is empty",
                zero_set.0, zero_set.1
            )));
        }
        if !(zero_set.0 < core.0 && core.0 < core.1 && core.1 < zero_set.1) {
            return Err(FhsError::InvalidConfig(format!(
                "core interval [{}, {}] must lie strictly inside J = ({}, {})",
                core.0, core.1, zero_set.0, zero_set.1
            )));
        }
        Ok(Self {
            eval_l,
            eval_matrix,
            n_components,
            c,
            zero_set,
            core,
            sublevel_measure_closed_form: None,
        })
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Open interval `J` on which `l` vanishes.
    pub fn zero_set(&self) -> (f64, f64) {
        self.zero_set
    }

    /// Closed core interval `T` on which the full matrix vanishes.
    pub fn core(&self) -> (f64, f64) {
        self.core
    }

    pub fn eval_l(&self, t: f64) -> f64 {
        (self.eval_l)(t)
    }

    /// Fills `out` (row-major, `n x n`) with `L(t)`.
    pub fn eval_matrix_into(&self, t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_components * self.n_components);
        (self.eval_matrix)(t, out)
    }

    /// `(L(t) u, u)` for a single node value.
    pub fn quadratic_form(&self, t: f64, u: &[f64], matrix_scratch: &mut [f64]) -> f64 {
        let n = self.n_components;
        self.eval_matrix_into(t, matrix_scratch);
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += matrix_scratch[i * n + j] * u[i] * u[j];
            }
        }
        acc
    }

    /// `meas{l < c}` by grid counting: `h` times the number of nodes with
    /// `l(t_i) < c`.
    pub fn sublevel_measure_on(&self, grid: &Grid1D) -> f64 {
        let count = grid.nodes().filter(|&t| self.eval_l(t) < self.c).count();
        grid.h() * count as f64
    }

    /// Closed-form `meas{l < c}` when the weight was built by
    /// [`builtin_weight`].
    pub fn sublevel_measure_closed_form(&self) -> Option<f64> {
        self.sublevel_measure_closed_form
    }
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec")
            .field("n_components", &self.n_components)
            .field("c", &self.c)
            .field("zero_set", &self.zero_set)
            .field("core", &self.core)
            .finish()
    }
}

/// Smooth monotone 0 -> 1 ramp with a closed-form inverse:
/// `s(x) = sin^2(pi x / 2)` for `x` in [0, 1], saturating at 1.
pub fn ramp_profile(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let s = (0.5 * PI * x).sin();
        s * s
    }
}

/// Inverse of [`ramp_profile`] on [0, 1]: `s^{-1}(y) = (2/pi) asin(sqrt y)`.
pub fn ramp_profile_inverse(y: f64) -> f64 {
    (2.0 / PI) * y.clamp(0.0, 1.0).sqrt().asin()
}

/// Reference weight family.
///
/// The lower-bound function ramps up with distance from `J`,
/// `l(t) = l_max s(dist(t, J) / ramp)`, so `l` vanishes exactly on the
/// closure of `J` and `meas{l < c} = |J| + 2 ramp s^{-1}(c / l_max)` in
/// closed form. The matrix is diagonal,
/// `L(t) = (l(t) + mu(t)) Id` with `mu(t) = l_max s(dist(t, T) / ramp)`
/// anchored on the core interval, so `L` vanishes exactly on `T` (closed)
/// and is positive elsewhere — in particular on `J \ T`, where only the
/// matrix (not `l`) penalizes mass. The lower bound `(L u, u) >= l |u|^2`
/// holds exactly since `mu >= 0`.
pub fn builtin_weight(
    n_components: usize,
    c: f64,
    l_max: f64,
    zero_set: (f64, f64),
    core: (f64, f64),
    ramp: f64,
) -> Result<WeightSpec> {
    if !(l_max.is_finite() && c.is_finite() && l_max > c && c > 0.0) {
        return Err(FhsError::InvalidConfig(format!(
            "weight levels must satisfy l_max > c > 0, got l_max = {l_max}, c = {c}"
        )));
    }
    if !(ramp.is_finite() && ramp > 0.0) {
        return Err(FhsError::InvalidConfig(format!(
            "ramp width must be positive, got {ramp}"
        )));
    }

    let dist = |t: f64, lo: f64, hi: f64| -> f64 { (lo - t).max(t - hi).max(0.0) };

    let (j_lo, j_hi) = zero_set;
    let l_fn = Arc::new(move |t: f64| l_max * ramp_profile(dist(t, j_lo, j_hi) / ramp));

    let (t_lo, t_hi) = core;
    let l_for_matrix = Arc::clone(&l_fn);
    let matrix_fn = Arc::new(move |t: f64, out: &mut [f64]| {
        let mu = l_max * ramp_profile(dist(t, t_lo, t_hi) / ramp);
        let diag = l_for_matrix(t) + mu;
        out.fill(0.0);
        for i in 0..n_components {
            out[i * n_components + i] = diag;
        }
    });

    let mut spec = WeightSpec::custom(n_components, c, zero_set, core, l_fn, matrix_fn)?;
    spec.sublevel_measure_closed_form =
        Some((j_hi - j_lo) + 2.0 * ramp * ramp_profile_inverse(c / l_max));
    Ok(spec)
}

/// The hypotheses audited by [`validate_hypotheses`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// `theta > 2` and `0 < theta W(t,u) <= (grad W(t,u), u)` for `u != 0`.
    ArCondition,
    /// `|grad W(t,u)| = o(|u|)` as `u -> 0`, uniformly in `t`.
    SublinearAtOrigin,
    /// `|W(t,u)| + |grad W(t,u)| <= Wbar(u)`.
    UniformDomination,
    /// `s -> (grad W(t, s q), q) / s^{theta-1}` strictly increasing.
    FiberingMonotonicity,
    /// `L(t)` symmetric with smallest eigenvalue `>= l(t) >= 0`.
    WeightLowerBound,
    /// `meas{l < c} < 1 / C_inf^2`.
    SublevelMeasure,
    /// `l` vanishes exactly on the closure of `J` and is positive outside.
    ZeroSetInterval,
    /// `L` vanishes identically on the closed core interval.
    CoreVanishing,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Hypothesis::ArCondition => "Ambrosetti-Rabinowitz condition",
            Hypothesis::SublinearAtOrigin => "gradient sublinear at the origin",
            Hypothesis::UniformDomination => "uniform domination by Wbar",
            Hypothesis::FiberingMonotonicity => "strict fibering monotonicity",
            Hypothesis::WeightLowerBound => "weight eigenvalue lower bound",
            Hypothesis::SublevelMeasure => "sublevel measure bound",
            Hypothesis::ZeroSetInterval => "zero set of l is the interval J",
            Hypothesis::CoreVanishing => "weight vanishes on the core interval",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Warning,
    Fail,
}

/// Concrete worst-violation sample point.
#[derive(Debug, Clone)]
pub struct Witness {
    pub t: f64,
    pub u: Vec<f64>,
    pub violation: f64,
}

#[derive(Debug, Clone)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub status: CheckStatus,
    pub detail: String,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Warning)
    }

    pub fn find(&self, h: Hypothesis) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == h)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Warning => "warning",
                CheckStatus::Fail => "FAIL",
            };
            out.push_str(&format!("{:<45} {:<8} {}\n", c.hypothesis.to_string(), status, c.detail));
        }
        out
    }
}

/// Sample lattice for the validator.
#[derive(Debug, Clone)]
pub struct SamplePlan {
    /// Time samples; should cover the zero set, the core, and the ramps.
    pub t_samples: Vec<f64>,
    /// Magnitudes for the `(t, u)` lattice.
    pub u_magnitudes: Vec<f64>,
    /// Random directions per magnitude.
    pub directions_per_magnitude: usize,
    /// Geometric scaling grid for the fibering-ratio check.
    pub s_grid: Vec<f64>,
    pub seed: u64,
}

impl SamplePlan {
    /// Reference plan on `[t_lo, t_hi]`.
    pub fn reference(t_lo: f64, t_hi: f64) -> Self {
        let t_count = 41;
        let t_samples = (0..t_count)
            .map(|i| t_lo + (t_hi - t_lo) * i as f64 / (t_count - 1) as f64)
            .collect();
        let u_magnitudes = (-3..=3).map(|e| 10f64.powi(e)).collect();
        let s_grid = (-16..=16).map(|e| 2f64.powf(e as f64 / 2.0)).collect();
        Self {
            t_samples,
            u_magnitudes,
            directions_per_magnitude: 8,
            s_grid,
            seed: 7,
        }
    }
}

/// Audits every hypothesis on the sampled lattice. Failures become report
/// entries with witnesses, never errors. The sublevel measure is counted
/// on `grid` and compared against the estimate's embedding constant.
pub fn validate_hypotheses(
    pot: &PotentialSpec,
    weight: &WeightSpec,
    plan: &SamplePlan,
    grid: &Grid1D,
    embedding: &EmbeddingEstimate,
    mode: ExecMode,
) -> ValidationReport {
    let mut checks = Vec::new();
    checks.push(check_ar(pot, plan, mode));
    checks.push(check_sublinear(pot, plan, mode));
    checks.push(check_domination(pot, plan, mode));
    checks.push(check_fibering_monotone(pot, plan, mode));
    checks.push(check_weight_lower_bound(weight, plan));
    checks.push(check_sublevel_measure(weight, grid, embedding));
    checks.push(check_zero_set(weight));
    checks.push(check_core_vanishing(weight));
    ValidationReport { checks }
}

/// Deterministic unit directions in `R^n` from a seeded generator.
fn sample_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            loop {
                let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let r = norm(&d);
                if r > 1e-3 {
                    return d.iter().map(|v| v / r).collect();
                }
            }
        })
        .collect()
}

fn worse(current: &mut Option<Witness>, t: f64, u: &[f64], violation: f64) {
    let replace = current
        .as_ref()
        .map(|w| violation > w.violation)
        .unwrap_or(true);
    if replace {
        *current = Some(Witness {
            t,
            u: u.to_vec(),
            violation,
        });
    }
}

fn check_ar(pot: &PotentialSpec, plan: &SamplePlan, mode: ExecMode) -> HypothesisCheck {
    let n = dimension_of(pot);
    if pot.theta() <= 2.0 {
        let u0 = vec![1.0; n];
        return HypothesisCheck {
            hypothesis: Hypothesis::ArCondition,
            status: CheckStatus::Fail,
            detail: format!("theta = {} is not > 2", pot.theta()),
            witness: Some(Witness {
                t: plan.t_samples.first().copied().unwrap_or(0.0),
                u: u0,
                violation: 2.0 - pot.theta(),
            }),
        };
    }
    let theta = pot.theta();
    let dirs = sample_directions(n, plan.directions_per_magnitude, plan.seed);
    // worst violation of theta W - (grad W, u) <= 0 and of W > 0, per t
    let per_t = exec::map_indexed(mode, plan.t_samples.len(), |ti| {
        let t = plan.t_samples[ti];
        let mut scratch = vec![0.0; n];
        let mut worst: Option<Witness> = None;
        for m in &plan.u_magnitudes {
            for d in &dirs {
                let u: Vec<f64> = d.iter().map(|v| v * m).collect();
                let w = pot.eval_w(t, &u);
                let gu = pot.grad_dot(t, &u, &u, &mut scratch);
                let scale = gu.abs().max(w.abs()).max(1e-300);
                if w <= 0.0 {
                    worse(&mut worst, t, &u, 1.0);
                } else if theta * w - gu > 1e-9 * scale {
                    worse(&mut worst, t, &u, (theta * w - gu) / scale);
                }
            }
        }
        worst
    });
    let worst = per_t.into_iter().flatten().reduce(|a, b| {
        if a.violation >= b.violation {
            a
        } else {
            b
        }
    });
    match worst {
        None => HypothesisCheck {
            hypothesis: Hypothesis::ArCondition,
            status: CheckStatus::Pass,
            detail: format!("0 < theta W <= (grad W, u) on the lattice, theta = {theta}"),
            witness: None,
        },
        Some(w) => HypothesisCheck {
            hypothesis: Hypothesis::ArCondition,
            status: CheckStatus::Fail,
            detail: format!(
                "theta W(t, u) exceeds (grad W(t, u), u) by a relative {:.3e} at t = {:.4}, |u| = {:.3e}",
                w.violation,
                w.t,
                norm(&w.u)
            ),
            witness: Some(w),
        },
    }
}

fn check_sublinear(pot: &PotentialSpec, plan: &SamplePlan, mode: ExecMode) -> HypothesisCheck {
    let n = dimension_of(pot);
    let dirs = sample_directions(n, plan.directions_per_magnitude, plan.seed ^ 0x5eed);
    let magnitudes: Vec<f64> = (1..=6).map(|e| 10f64.powi(-e)).collect();
    // max over (t, d) of |grad W| / |u| for each shrinking magnitude
    let maxima = exec::map_indexed(mode, magnitudes.len(), |k| {
        let m = magnitudes[k];
        let mut grad = vec![0.0; n];
        let mut worst = (0.0f64, 0.0f64, vec![0.0; n]);
        for &t in &plan.t_samples {
            for d in &dirs {
                let u: Vec<f64> = d.iter().map(|v| v * m).collect();
                pot.eval_grad_into(t, &u, &mut grad);
                let ratio = norm(&grad) / m;
                if ratio > worst.0 {
                    worst = (ratio, t, u.clone());
                }
            }
        }
        worst
    });
    let first = maxima.first().unwrap().clone();
    let last = maxima.last().unwrap().clone();
    let decaying = maxima.windows(2).all(|w| w[1].0 <= w[0].0 * (1.0 + 1e-9));
    if decaying && last.0 <= 0.01 * first.0.max(1e-300) {
        HypothesisCheck {
            hypothesis: Hypothesis::SublinearAtOrigin,
            status: CheckStatus::Pass,
            detail: format!(
                "max |grad W|/|u| falls from {:.3e} at |u|=1e-1 to {:.3e} at |u|=1e-6",
                first.0, last.0
            ),
            witness: None,
        }
    } else {
        HypothesisCheck {
            hypothesis: Hypothesis::SublinearAtOrigin,
            status: CheckStatus::Fail,
            detail: format!(
                "|grad W|/|u| does not vanish toward the origin ({:.3e} at |u|=1e-1, {:.3e} at |u|=1e-6)",
                first.0, last.0
            ),
            witness: Some(Witness {
                t: last.1,
                u: last.2,
                violation: last.0,
            }),
        }
    }
}

fn check_domination(pot: &PotentialSpec, plan: &SamplePlan, mode: ExecMode) -> HypothesisCheck {
    let n = dimension_of(pot);
    let dirs = sample_directions(n, plan.directions_per_magnitude, plan.seed ^ 0xd0d0);
    let per_t = exec::map_indexed(mode, plan.t_samples.len(), |ti| {
        let t = plan.t_samples[ti];
        let mut grad = vec![0.0; n];
        let mut worst: Option<Witness> = None;
        for m in &plan.u_magnitudes {
            for d in &dirs {
                let u: Vec<f64> = d.iter().map(|v| v * m).collect();
                pot.eval_grad_into(t, &u, &mut grad);
                let lhs = pot.eval_w(t, &u).abs() + norm(&grad);
                let bar = pot.eval_w_bar(&u).abs();
                if lhs > bar * (1.0 + 1e-9) {
                    worse(&mut worst, t, &u, (lhs - bar) / bar.max(1e-300));
                }
            }
        }
        worst
    });
    let worst = per_t.into_iter().flatten().reduce(|a, b| {
        if a.violation >= b.violation {
            a
        } else {
            b
        }
    });
    match worst {
        None => HypothesisCheck {
            hypothesis: Hypothesis::UniformDomination,
            status: CheckStatus::Pass,
            detail: "|W| + |grad W| <= Wbar(u) on the lattice".into(),
            witness: None,
        },
        Some(w) => HypothesisCheck {
            hypothesis: Hypothesis::UniformDomination,
            status: CheckStatus::Fail,
            detail: format!(
                "domination violated by a relative {:.3e} at t = {:.4}, |u| = {:.3e}",
                w.violation,
                w.t,
                norm(&w.u)
            ),
            witness: Some(w),
        },
    }
}

fn check_fibering_monotone(
    pot: &PotentialSpec,
    plan: &SamplePlan,
    mode: ExecMode,
) -> HypothesisCheck {
    let n = dimension_of(pot);
    let theta = pot.theta();
    let dirs = sample_directions(n, plan.directions_per_magnitude, plan.seed ^ 0xf1be);
    // ratio(s) = (grad W(t, s q), q) / s^{theta - 1} on the geometric grid
    let per_t: Vec<(f64, Option<Witness>)> =
        exec::map_indexed(mode, plan.t_samples.len(), |ti| {
            let t = plan.t_samples[ti];
            let mut scratch = vec![0.0; n];
            let mut min_rel_increment = f64::INFINITY;
            let mut worst: Option<Witness> = None;
            for q in &dirs {
                let ratios: Vec<f64> = plan
                    .s_grid
                    .iter()
                    .map(|&s| {
                        let su: Vec<f64> = q.iter().map(|v| v * s).collect();
                        pot.grad_dot(t, &su, q, &mut scratch) / s.powf(theta - 1.0)
                    })
                    .collect();
                let scale = ratios.iter().fold(1e-300f64, |a, r| a.max(r.abs()));
                for (k, pair) in ratios.windows(2).enumerate() {
                    let rel = (pair[1] - pair[0]) / scale;
                    min_rel_increment = min_rel_increment.min(rel);
                    if rel < -1e-9 {
                        let su: Vec<f64> =
                            q.iter().map(|v| v * plan.s_grid[k + 1]).collect();
                        worse(&mut worst, t, &su, -rel);
                    }
                }
            }
            (min_rel_increment, worst)
        });
    let min_rel = per_t.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let worst = per_t.into_iter().filter_map(|p| p.1).reduce(|a, b| {
        if a.violation >= b.violation {
            a
        } else {
            b
        }
    });
    if let Some(w) = worst {
        HypothesisCheck {
            hypothesis: Hypothesis::FiberingMonotonicity,
            status: CheckStatus::Fail,
            detail: format!(
                "fibering ratio decreases by a relative {:.3e} at t = {:.4}",
                w.violation, w.t
            ),
            witness: Some(w),
        }
    } else if min_rel <= 1e-12 {
        HypothesisCheck {
            hypothesis: Hypothesis::FiberingMonotonicity,
            status: CheckStatus::Warning,
            detail: "non-strict: the fibering ratio is constant in s (pure power potential)"
                .into(),
            witness: None,
        }
    } else {
        HypothesisCheck {
            hypothesis: Hypothesis::FiberingMonotonicity,
            status: CheckStatus::Pass,
            detail: format!(
                "strictly increasing (smallest relative increment {min_rel:.3e})"
            ),
            witness: None,
        }
    }
}

/// Smallest eigenvalue of a small symmetric matrix by cyclic Jacobi.
fn smallest_eigenvalue(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    for _ in 0..50 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let phi = 0.5 * (2.0 * apq).atan2(aqq - app);
                let (s, c) = phi.sin_cos();
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).fold(f64::INFINITY, f64::min)
}

fn check_weight_lower_bound(weight: &WeightSpec, plan: &SamplePlan) -> HypothesisCheck {
    let n = weight.n_components();
    let mut matrix = vec![0.0; n * n];
    let mut worst: Option<Witness> = None;
    for &t in &plan.t_samples {
        let l = weight.eval_l(t);
        if l < 0.0 {
            worse(&mut worst, t, &[], -l);
            continue;
        }
        weight.eval_matrix_into(t, &mut matrix);
        let scale = matrix.iter().fold(1e-300f64, |a, v| a.max(v.abs()));
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((matrix[i * n + j] - matrix[j * n + i]).abs());
            }
        }
        if asym > 1e-9 * scale {
            worse(&mut worst, t, &[], asym / scale);
            continue;
        }
        let lambda_min = smallest_eigenvalue(&matrix, n);
        if lambda_min < l - 1e-9 * l.max(scale) {
            worse(&mut worst, t, &[], l - lambda_min);
        }
    }
    match worst {
        None => HypothesisCheck {
            hypothesis: Hypothesis::WeightLowerBound,
            status: CheckStatus::Pass,
            detail: "L symmetric with smallest eigenvalue >= l(t) >= 0 at all samples".into(),
            witness: None,
        },
        Some(w) => HypothesisCheck {
            hypothesis: Hypothesis::WeightLowerBound,
            status: CheckStatus::Fail,
            detail: format!(
                "eigenvalue / symmetry / sign violation of {:.3e} at t = {:.4}",
                w.violation, w.t
            ),
            witness: Some(w),
        },
    }
}

fn check_sublevel_measure(
    weight: &WeightSpec,
    grid: &Grid1D,
    embedding: &EmbeddingEstimate,
) -> HypothesisCheck {
    let meas = weight.sublevel_measure_on(grid);
    let c_inf = embedding.c_inf_lower;
    let product = c_inf * c_inf * meas;
    let detail = format!(
        "meas{{l < c}} = {:.6} (grid count), C_inf = {:.4}, product = {:.4}",
        meas, c_inf, product
    );
    if product < 1.0 {
        HypothesisCheck {
            hypothesis: Hypothesis::SublevelMeasure,
            status: CheckStatus::Pass,
            detail,
            witness: None,
        }
    } else {
        HypothesisCheck {
            hypothesis: Hypothesis::SublevelMeasure,
            status: CheckStatus::Fail,
            detail: format!("{detail}; needs meas < 1 / C_inf^2"),
            witness: Some(Witness {
                t: f64::NAN,
                u: vec![],
                violation: product - 1.0,
            }),
        }
    }
}

fn check_zero_set(weight: &WeightSpec) -> HypothesisCheck {
    let (j_lo, j_hi) = weight.zero_set();
    let width = j_hi - j_lo;
    let probe = width * 1e-3;
    let mut worst: Option<Witness> = None;
    // l must vanish on the closure of J (sampled inside and at endpoints)
    for k in 0..=100 {
        let t = j_lo + width * k as f64 / 100.0;
        let l = weight.eval_l(t);
        if l.abs() > 1e-12 {
            worse(&mut worst, t, &[], l.abs());
        }
    }
    // and be positive strictly outside
    for &t in &[j_lo - probe, j_hi + probe, j_lo - width, j_hi + width] {
        if weight.eval_l(t) <= 0.0 {
            worse(&mut worst, t, &[], 1.0);
        }
    }
    match worst {
        None => HypothesisCheck {
            hypothesis: Hypothesis::ZeroSetInterval,
            status: CheckStatus::Pass,
            detail: format!("l = 0 exactly on [{j_lo}, {j_hi}], positive outside"),
            witness: None,
        },
        Some(w) => HypothesisCheck {
            hypothesis: Hypothesis::ZeroSetInterval,
            status: CheckStatus::Fail,
            detail: format!("zero-set structure violated at t = {:.4}", w.t),
            witness: Some(w),
        },
    }
}

fn check_core_vanishing(weight: &WeightSpec) -> HypothesisCheck {
    let (t_lo, t_hi) = weight.core();
    let n = weight.n_components();
    let mut matrix = vec![0.0; n * n];
    let mut worst: Option<Witness> = None;
    for k in 0..=100 {
        let t = t_lo + (t_hi - t_lo) * k as f64 / 100.0;
        weight.eval_matrix_into(t, &mut matrix);
        let mag = matrix.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if mag > 1e-12 {
            worse(&mut worst, t, &[], mag);
        }
    }
    match worst {
        None => HypothesisCheck {
            hypothesis: Hypothesis::CoreVanishing,
            status: CheckStatus::Pass,
            detail: format!("L = 0 on the core interval [{t_lo}, {t_hi}]"),
            witness: None,
        },
        Some(w) => HypothesisCheck {
            hypothesis: Hypothesis::CoreVanishing,
            status: CheckStatus::Fail,
            detail: format!("L does not vanish at t = {:.4} in the core", w.t),
            witness: Some(w),
        },
    }
}

/// The validator works on scalar slices of the configured dimension; the
/// potential callables are dimension-agnostic, so the audit runs in the
/// weight's dimension. For potential-only checks a 1-component probe does
/// not lose generality for radial potentials; plans targeting vector
/// problems should pair the potential with the matching weight.
fn dimension_of(_pot: &PotentialSpec) -> usize {
    1
}
