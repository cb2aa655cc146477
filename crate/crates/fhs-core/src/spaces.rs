//! Norms, inner products, and embedding-constant estimation.
//!
//! The energy space carries the weighted inner product
//!
//! ```text
//! <u, v>_lam = u' A v + lam sum_i w_i (L(t_i) u_i, v_i),
//! ```
//!
//! with `A` the fractional stiffness form and trapezoid weights `w_i`. The
//! embedding machinery revolves around the constant `C_inf` bounding
//! `|u|_inf <= C_inf ||u||_alpha`: the validator needs `meas{l < c} <
//! 1 / C_inf^2`, and for `lambda` above `1 / (c C_inf^2 meas{l<c})` the
//! weighted norm controls the `L^2`, `H^alpha`, `L^p`, and sup norms with
//! explicit constants built from `Theta = (1 - C_inf^2 m) / (C_inf^2 m)`.
//! `C_inf` has no closed form here, so a sampled lower bound over random
//! smooth bumps (with a config override) stands in for it.

use crate::error::{FhsError, Result};
use crate::exec::{self, ExecMode};
use crate::fracops::{fourier_seminorm_sq, FracOrder, FracStiffness};
use crate::grid::{Grid1D, GridFunction};
use crate::potentials::WeightSpec;

/// Trapezoid quadrature of `|u|^p`.
pub fn lp_norm(u: &GridFunction, p: f64) -> f64 {
    let w = u.grid().trapezoid_weights();
    let mut acc = 0.0;
    for i in 0..u.grid().len() {
        acc += w[i] * u.node_magnitude(i).powf(p);
    }
    acc.powf(1.0 / p)
}

/// Trapezoid `L^2` norm.
pub fn l2_norm(u: &GridFunction) -> f64 {
    let w = u.grid().trapezoid_weights();
    let mut acc = 0.0;
    for i in 0..u.grid().len() {
        let m = u.node_magnitude(i);
        acc += w[i] * m * m;
    }
    acc.sqrt()
}

/// Sup norm over nodes.
pub fn linf_norm(u: &GridFunction) -> f64 {
    u.max_magnitude()
}

/// `||u||_alpha = (||u||_L2^2 + |u|_alpha^2)^{1/2}` with the seminorm from
/// the Fourier route; requires decay at the grid ends.
pub fn h_alpha_norm(u: &GridFunction, order: FracOrder) -> Result<f64> {
    let semi_sq = fourier_seminorm_sq(u, order)?;
    let l2 = l2_norm(u);
    Ok((l2 * l2 + semi_sq).sqrt())
}

/// Weighted inner product `<u, v>_lam` on matching grids.
pub fn x_inner(
    stiffness: &FracStiffness,
    u: &GridFunction,
    v: &GridFunction,
    lambda: f64,
    weight: &WeightSpec,
) -> Result<f64> {
    if u.grid() != v.grid() || u.grid() != stiffness.grid() {
        return Err(FhsError::GridMismatch);
    }
    if u.n_components() != v.n_components() {
        return Err(FhsError::GridMismatch);
    }
    let nc = u.n_components();
    let stiff = stiffness.inner_flat(u.values(), v.values(), nc);
    let quad = u.grid().trapezoid_weights();
    let mut matrix = vec![0.0; nc * nc];
    let mut mass = 0.0;
    for (i, t) in u.grid().nodes().enumerate() {
        weight.eval_matrix_into(t, &mut matrix);
        let ui = u.node_value(i);
        let vi = v.node_value(i);
        let mut acc = 0.0;
        for r in 0..nc {
            for c in 0..nc {
                acc += matrix[r * nc + c] * ui[r] * vi[c];
            }
        }
        mass += quad[i] * acc;
    }
    Ok(stiff + lambda * mass)
}

/// `||u||_lam^2`.
pub fn x_norm_sq(
    stiffness: &FracStiffness,
    u: &GridFunction,
    lambda: f64,
    weight: &WeightSpec,
) -> Result<f64> {
    x_inner(stiffness, u, u, lambda, weight)
}

/// Norm snapshot of a grid function.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub l2: f64,
    pub lp: Vec<(f64, f64)>,
    pub linf: f64,
    pub h_alpha: f64,
    pub x_alpha_lambda: f64,
}

impl NormReport {
    pub fn compute(
        u: &GridFunction,
        order: FracOrder,
        lambda: f64,
        weight: &WeightSpec,
        p_values: &[f64],
    ) -> Result<Self> {
        let stiffness = FracStiffness::new(order, u.grid().clone());
        let lp = p_values.iter().map(|&p| (p, lp_norm(u, p))).collect();
        Ok(Self {
            l2: l2_norm(u),
            lp,
            linf: linf_norm(u),
            h_alpha: h_alpha_norm(u, order)?,
            x_alpha_lambda: x_norm_sq(&stiffness, u, lambda, weight)?.sqrt(),
        })
    }

    /// Interpolation consistency `||u||_p^p <= ||u||_inf^{p-2} ||u||_2^2`
    /// for every stored exponent.
    pub fn interpolation_ok(&self) -> bool {
        self.lp.iter().all(|&(p, np)| {
            np.powf(p) <= self.linf.powf(p - 2.0) * self.l2 * self.l2 * (1.0 + 1e-9) + 1e-300
        })
    }
}

/// Sampled lower bound for the sup-norm embedding constant.
#[derive(Debug, Clone, Copy)]
pub struct CInfBound {
    pub c_inf_lower: f64,
    pub sample_count: usize,
    pub seed: u64,
}

/// Estimates `C_inf` from below by maximizing `|u|_inf / ||u||_alpha` over
/// seeded random Gaussian bumps (centers in [-1, 1], widths log-uniform in
/// [0.05, 0.5]). A running maximum, so the estimate is nondecreasing in
/// `sample_count` for a fixed seed. Deterministic across thread counts.
pub fn estimate_c_inf(order: FracOrder, sample_count: usize, seed: u64) -> CInfBound {
    estimate_c_inf_with(order, sample_count, seed, ExecMode::Parallel)
}

pub fn estimate_c_inf_with(
    order: FracOrder,
    sample_count: usize,
    seed: u64,
    mode: ExecMode,
) -> CInfBound {
    let grid = Grid1D::new(-12.0, 12.0, 1537).expect("static grid");
    let ratios = exec::map_indexed(mode, sample_count, |i| {
        let u = sample_bump(&grid, seed, i);
        c_inf_ratio(&u, order).expect("bumps decay by construction")
    });
    let c_inf_lower = ratios.into_iter().fold(0.0, f64::max);
    CInfBound {
        c_inf_lower,
        sample_count,
        seed,
    }
}

fn sample_bump(grid: &Grid1D, seed: u64, index: usize) -> GridFunction {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
        seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
    );
    let center: f64 = rng.random_range(-1.0..1.0);
    let width: f64 = 0.05 * 10f64.powf(rng.random_range(0.0..1.0));
    GridFunction::from_scalar_fn(grid.clone(), |t| (-((t - center) / width).powi(2)).exp())
        .expect("gaussian values are finite")
}

/// The ratio `|u|_inf / ||u||_alpha` for one sample; any admissible `u`
/// certifies this as a lower bound for `C_inf`.
pub fn c_inf_ratio(u: &GridFunction, order: FracOrder) -> Result<f64> {
    Ok(linf_norm(u) / h_alpha_norm(u, order)?)
}

/// Embedding constants derived from `C_inf` and the sublevel measure.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingEstimate {
    /// Lower bound (or configured override) for `C_inf`.
    pub c_inf_lower: f64,
    /// `meas{l < c}`.
    pub meas_sublevel: f64,
    /// `Theta = (1 - C_inf^2 m) / (C_inf^2 m)`; positive iff the sublevel
    /// measure condition holds.
    pub theta_const: f64,
    /// `1 / (c C_inf^2 m)`: the inequalities below kick in at this lambda.
    pub lambda_threshold: f64,
}

impl EmbeddingEstimate {
    /// The estimate is representable even when the sublevel measure
    /// condition fails; `theta_const` is then non-positive, the validator
    /// reports the failure, and the norm inequalities are unavailable.
    pub fn from_constant(c_inf: f64, meas_sublevel: f64, c: f64) -> Result<Self> {
        if !(c_inf > 0.0 && meas_sublevel > 0.0 && c > 0.0) {
            return Err(FhsError::InvalidConfig(
                "embedding estimate needs positive C_inf, measure, and c".into(),
            ));
        }
        let product = c_inf * c_inf * meas_sublevel;
        Ok(Self {
            c_inf_lower: c_inf,
            meas_sublevel,
            theta_const: (1.0 - product) / product,
            lambda_threshold: 1.0 / (c * product),
        })
    }

    /// True when `C_inf^2 meas{l < c} < 1`.
    pub fn measure_condition_holds(&self) -> bool {
        self.theta_const > 0.0
    }

    /// Builds the estimate for a weight by grid-counting its sublevel set.
    pub fn for_weight(bound: CInfBound, weight: &WeightSpec, grid: &Grid1D) -> Result<Self> {
        Self::from_constant(
            bound.c_inf_lower,
            weight.sublevel_measure_on(grid),
            weight.c(),
        )
    }
}

/// One inequality of the embedding report.
#[derive(Debug, Clone)]
pub struct EmbeddingCheckEntry {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Outcome of [`check_embedding_inequalities`].
#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub lambda: f64,
    pub lambda_threshold: f64,
    /// False when `lambda` is below the threshold; the inequalities are not
    /// guaranteed there and are not evaluated.
    pub applicable: bool,
    pub entries: Vec<EmbeddingCheckEntry>,
}

impl EmbeddingReport {
    pub fn all_hold(&self) -> bool {
        self.applicable && self.entries.iter().all(|e| e.ok)
    }
}

/// Evaluates the norm inequalities granted above the lambda threshold:
/// `||u||_2^2 <= ||u||_lam^2 / Theta`, `||u||_alpha^2 <= (1 + 1/Theta)
/// ||u||_lam^2`, `||u||_p^p <= Theta^{-p/2} m^{-(p-2)/2} ||u||_lam^p` for
/// the configured exponents, and the sup bound
/// `|u|_inf <= C_inf (1 + 1/Theta)^{1/2} ||u||_lam`.
pub fn check_embedding_inequalities(
    u: &GridFunction,
    lambda: f64,
    weight: &WeightSpec,
    est: &EmbeddingEstimate,
    order: FracOrder,
    p_values: &[f64],
) -> Result<EmbeddingReport> {
    if lambda < est.lambda_threshold || !est.measure_condition_holds() {
        return Ok(EmbeddingReport {
            lambda,
            lambda_threshold: est.lambda_threshold,
            applicable: false,
            entries: vec![],
        });
    }
    let stiffness = FracStiffness::new(order, u.grid().clone());
    let x_sq = x_norm_sq(&stiffness, u, lambda, weight)?;
    let theta = est.theta_const;
    let slack = 1.0 + 1e-9;

    let mut entries = Vec::new();
    let l2_sq = l2_norm(u).powi(2);
    entries.push(EmbeddingCheckEntry {
        name: "l2_sq <= x_sq / Theta",
        lhs: l2_sq,
        rhs: x_sq / theta,
        ok: l2_sq <= x_sq / theta * slack,
    });
    let ha_sq = h_alpha_norm(u, order)?.powi(2);
    entries.push(EmbeddingCheckEntry {
        name: "h_alpha_sq <= (1 + 1/Theta) x_sq",
        lhs: ha_sq,
        rhs: (1.0 + 1.0 / theta) * x_sq,
        ok: ha_sq <= (1.0 + 1.0 / theta) * x_sq * slack,
    });
    for &p in p_values {
        if !p.is_finite() {
            let lhs = linf_norm(u);
            let rhs = est.c_inf_lower * (1.0 + 1.0 / theta).sqrt() * x_sq.sqrt();
            entries.push(EmbeddingCheckEntry {
                name: "linf <= C_inf (1 + 1/Theta)^{1/2} x",
                lhs,
                rhs,
                ok: lhs <= rhs * slack,
            });
        } else if p > 2.0 {
            let lhs = lp_norm(u, p).powf(p);
            let rhs = x_sq.powf(p / 2.0)
                / (theta.powf(p / 2.0) * est.meas_sublevel.powf((p - 2.0) / 2.0));
            entries.push(EmbeddingCheckEntry {
                name: "lp^p <= Theta^{-p/2} m^{-(p-2)/2} x^p",
                lhs,
                rhs,
                ok: lhs <= rhs * slack,
            });
        }
    }
    Ok(EmbeddingReport {
        lambda,
        lambda_threshold: est.lambda_threshold,
        applicable: true,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::builtin_weight;

    fn reference_weight() -> WeightSpec {
        builtin_weight(1, 1.0, 5.0, (-0.25, 1.25), (0.0, 1.0), 0.1).unwrap()
    }

    fn gaussian(center: f64, width: f64) -> GridFunction {
        let grid = Grid1D::new(-8.0, 8.0, 1025).unwrap();
        GridFunction::from_scalar_fn(grid, |t| (-((t - center) / width).powi(2)).exp()).unwrap()
    }

    #[test]
    fn zero_norms() {
        let u = GridFunction::zeros(Grid1D::new(-4.0, 4.0, 257).unwrap(), 1);
        let order = FracOrder::new(0.75).unwrap();
        assert_eq!(h_alpha_norm(&u, order).unwrap(), 0.0);
        assert_eq!(l2_norm(&u), 0.0);
    }

    #[test]
    fn h_alpha_dominates_l2() {
        let order = FracOrder::new(0.75).unwrap();
        let u = gaussian(0.3, 0.7);
        assert!(h_alpha_norm(&u, order).unwrap() >= l2_norm(&u));
    }

    #[test]
    fn h_alpha_cross_checked_against_stiffness_route() {
        // two independent discretizations of the same seminorm
        let order = FracOrder::new(0.75).unwrap();
        let u = gaussian(0.0, 1.0);
        let spectral = h_alpha_norm(&u, order).unwrap();
        let stiff = FracStiffness::new(order, u.grid().clone());
        let gl_route = (l2_norm(&u).powi(2) + stiff.quadratic_form(&u).unwrap()).sqrt();
        let rel = (spectral - gl_route).abs() / gl_route;
        assert!(rel < 0.02, "rel err {rel}");
    }

    #[test]
    fn x_inner_bilinear_symmetric() {
        let order = FracOrder::new(0.75).unwrap();
        let weight = reference_weight();
        let grid = Grid1D::new(-8.0, 8.0, 513).unwrap();
        let stiff = FracStiffness::new(order, grid.clone());
        let u = GridFunction::from_scalar_fn(grid.clone(), |t| (-(t - 0.5) * (t - 0.5)).exp())
            .unwrap();
        let v =
            GridFunction::from_scalar_fn(grid.clone(), |t| t.sin() * (-t * t / 4.0).exp()).unwrap();
        let zero = GridFunction::zeros(grid, 1);

        assert_eq!(x_inner(&stiff, &u, &zero, 50.0, &weight).unwrap(), 0.0);
        let uv = x_inner(&stiff, &u, &v, 50.0, &weight).unwrap();
        let vu = x_inner(&stiff, &v, &u, 50.0, &weight).unwrap();
        assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(1.0));
        assert!(x_norm_sq(&stiff, &u, 50.0, &weight).unwrap() >= 0.0);
    }

    #[test]
    fn core_supported_functions_ignore_lambda() {
        // supp u inside the core where L = 0: the weighted term vanishes
        let order = FracOrder::new(0.75).unwrap();
        let weight = reference_weight();
        let grid = Grid1D::new(-8.0, 8.0, 2049).unwrap();
        let stiff = FracStiffness::new(order, grid.clone());
        let u = GridFunction::from_scalar_fn(grid, |t| {
            let x: f64 = (t - 0.5) / 0.45;
            if x.abs() < 1.0 {
                (-1.0 / (1.0 - x * x)).exp()
            } else {
                0.0
            }
        })
        .unwrap();
        let a = x_norm_sq(&stiff, &u, 1.0, &weight).unwrap();
        let b = x_norm_sq(&stiff, &u, 1e6, &weight).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn x_inner_matches_direct_quadrature_for_power_test() {
        // pure-power test function with independently computed pieces
        let order = FracOrder::new(0.75).unwrap();
        let weight = reference_weight();
        let grid = Grid1D::new(-8.0, 8.0, 1025).unwrap();
        let stiff = FracStiffness::new(order, grid.clone());
        let u = GridFunction::from_scalar_fn(grid.clone(), |t| (-(t * t)).exp()).unwrap();
        let lambda = 37.5;
        let got = x_norm_sq(&stiff, &u, lambda, &weight).unwrap();

        let stiff_term = stiff.quadratic_form(&u).unwrap();
        let quad = grid.trapezoid_weights();
        let mut m = [0.0];
        let mut mass = 0.0;
        for (i, t) in grid.nodes().enumerate() {
            weight.eval_matrix_into(t, &mut m);
            let x = u.values()[i];
            mass += quad[i] * m[0] * x * x;
        }
        let expected = stiff_term + lambda * mass;
        assert!((got - expected).abs() <= 1e-10 * expected.abs().max(1.0));
    }

    #[test]
    fn x_norm_monotone_in_lambda() {
        let order = FracOrder::new(0.75).unwrap();
        let weight = reference_weight();
        let grid = Grid1D::new(-8.0, 8.0, 513).unwrap();
        let stiff = FracStiffness::new(order, grid.clone());
        let u = GridFunction::from_scalar_fn(grid, |t| (-(t + 1.0) * (t + 1.0)).exp()).unwrap();
        let mut prev = 0.0;
        for &lambda in &[1.0, 10.0, 100.0, 1000.0] {
            let v = x_norm_sq(&stiff, &u, lambda, &weight).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn ratio_arithmetic() {
        // a sample with |u|_inf = 1 and ||u||_alpha = 2 certifies >= 0.5
        let u = gaussian(0.0, 0.4);
        let order = FracOrder::new(0.75).unwrap();
        let ratio = c_inf_ratio(&u, order).unwrap();
        let expected = linf_norm(&u) / h_alpha_norm(&u, order).unwrap();
        assert_eq!(ratio, expected);
        assert!(ratio > 0.0);
    }

    #[test]
    fn estimate_monotone_in_sample_count() {
        let order = FracOrder::new(0.75).unwrap();
        let small = estimate_c_inf(order, 20, 11);
        let large = estimate_c_inf(order, 60, 11);
        assert!(large.c_inf_lower >= small.c_inf_lower);
    }

    #[test]
    fn estimate_ordering_in_alpha() {
        // ||u||_alpha is nondecreasing in alpha for the narrow-bump samples,
        // so the ratio (and its running max) is nonincreasing. Verified
        // sample-by-sample as well.
        let a06 = FracOrder::new(0.6).unwrap();
        let a09 = FracOrder::new(0.9).unwrap();
        let grid = Grid1D::new(-12.0, 12.0, 1537).unwrap();
        for i in 0..40 {
            let u = sample_bump(&grid, 11, i);
            let n06 = h_alpha_norm(&u, a06).unwrap();
            let n09 = h_alpha_norm(&u, a09).unwrap();
            assert!(n09 >= n06 * (1.0 - 1e-12), "sample {i}: {n09} < {n06}");
        }
        let e06 = estimate_c_inf(a06, 40, 11);
        let e09 = estimate_c_inf(a09, 40, 11);
        assert!(e06.c_inf_lower >= e09.c_inf_lower);
    }

    #[test]
    fn estimate_parallel_matches_sequential() {
        let order = FracOrder::new(0.75).unwrap();
        let a = estimate_c_inf_with(order, 30, 5, ExecMode::Sequential);
        let b = estimate_c_inf_with(order, 30, 5, ExecMode::Parallel);
        assert_eq!(a.c_inf_lower, b.c_inf_lower);
    }

    #[test]
    fn embedding_estimate_constants() {
        let est = EmbeddingEstimate::from_constant(0.68, 1.56, 1.0).unwrap();
        let product = 0.68 * 0.68 * 1.56;
        assert!(est.measure_condition_holds());
        assert!((est.theta_const - (1.0 - product) / product).abs() < 1e-12);
        assert!((est.lambda_threshold - 1.0 / product).abs() < 1e-12);
        // condition violated -> representable but flagged
        let bad = EmbeddingEstimate::from_constant(0.9, 1.56, 1.0).unwrap();
        assert!(!bad.measure_condition_holds());
        assert!(bad.theta_const < 0.0);
    }

    #[test]
    fn embedding_report_zero_function() {
        let order = FracOrder::new(0.75).unwrap();
        let weight = reference_weight();
        let est = EmbeddingEstimate::from_constant(0.68, 1.56, 1.0).unwrap();
        let u = GridFunction::zeros(Grid1D::new(-8.0, 8.0, 513).unwrap(), 1);
        let report = check_embedding_inequalities(
            &u,
            est.lambda_threshold * 10.0,
            &weight,
            &est,
            order,
            &[2.0, 4.0, f64::INFINITY],
        )
        .unwrap();
        assert!(report.all_hold(), "{report:?}");
    }

    #[test]
    fn embedding_report_holds_above_threshold() {
        let order = FracOrder::new(0.75).unwrap();
        let weight = reference_weight();
        let est = EmbeddingEstimate::from_constant(0.68, 1.56, 1.0).unwrap();
        for (c, w) in [(0.2, 0.3), (0.5, 0.15), (-0.5, 0.4), (2.0, 0.25)] {
            let u = gaussian(c, w);
            let report = check_embedding_inequalities(
                &u,
                est.lambda_threshold * 10.0,
                &weight,
                &est,
                order,
                &[2.0, 4.0, f64::INFINITY],
            )
            .unwrap();
            assert!(report.all_hold(), "bump at {c}: {report:#?}");
        }
    }

    #[test]
    fn embedding_report_not_applicable_below_threshold() {
        let order = FracOrder::new(0.75).unwrap();
        let weight = reference_weight();
        let est = EmbeddingEstimate::from_constant(0.68, 1.56, 1.0).unwrap();
        let u = gaussian(0.0, 0.5);
        let report = check_embedding_inequalities(
            &u,
            est.lambda_threshold * 0.1,
            &weight,
            &est,
            order,
            &[2.0],
        )
        .unwrap();
        assert!(!report.applicable);
        assert!(!report.all_hold());
    }

    #[test]
    fn norm_report_interpolation() {
        let order = FracOrder::new(0.75).unwrap();
        let weight = reference_weight();
        let u = gaussian(0.4, 0.6);
        let report = NormReport::compute(&u, order, 100.0, &weight, &[3.0, 4.0, 6.0]).unwrap();
        assert!(report.interpolation_ok());
        assert!(report.h_alpha >= report.l2);
    }
}
