//! Acceptance suite: one test per criterion, each printing its own
//! pass/fail line through the harness. Criteria about the lambda sweep
//! share a single run of the reference experiment through a lazy fixture.

use fhs_core::concentration::{run_sweep, SweepOptions, SweepReport};
use fhs_core::exec::ExecMode;
use fhs_core::fracops::{
    fourier_seminorm_sq, left_frac_derivative, right_frac_derivative, FracOrder,
    FracStiffness,
};
use fhs_core::gamma::gamma;
use fhs_core::grid::{Grid1D, GridFunction};
use fhs_core::nehari::OptimizerOptions;
use fhs_core::potentials::{
    builtin_potential, builtin_weight, validate_hypotheses, AmplitudeProfile, CheckStatus,
    Hypothesis, PotentialSpec, SamplePlan,
};
use fhs_core::solver::{solve_bvp, GroundState, ProblemConfig};
use fhs_core::spaces::{self, EmbeddingEstimate};
use rand::{Rng, SeedableRng};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const THETA: f64 = 3.0;

fn reference_config() -> ProblemConfig {
    ProblemConfig {
        order: FracOrder::new(0.75).unwrap(),
        lambda: 100.0,
        truncation_radius: 8.0,
        n_nodes: 2049,
        n_components: 1,
        potential: builtin_potential(THETA, 1.0, AmplitudeProfile::constant(1.0).unwrap())
            .unwrap(),
        weight: builtin_weight(1, 1.0, 5.0, (-0.25, 1.25), (0.0, 1.0), 0.1).unwrap(),
        optimizer: OptimizerOptions::default(),
        multistart_count: 20,
        seed: 42,
        exec_mode: ExecMode::Parallel,
        boundary_tolerance: 1e-3,
        skip_validation: false,
    }
}

struct SweepFixture {
    report: SweepReport,
    u_tilde_h_alpha: f64,
    elapsed: Duration,
}

fn sweep_fixture() -> &'static SweepFixture {
    static FIXTURE: OnceLock<SweepFixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let config = reference_config();
        let start = Instant::now();
        let report = run_sweep(&config, &SweepOptions::default()).expect("reference sweep");
        let elapsed = start.elapsed();
        let u_tilde_h_alpha =
            spaces::h_alpha_norm(&report.bvp.u, config.order).expect("reference state decays");
        SweepFixture {
            report,
            u_tilde_h_alpha,
            elapsed,
        }
    })
}

fn format_records(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(SweepReport::CSV_HEADER);
    out.push('\n');
    for row in report.csv_rows() {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Criterion 1: first-order accuracy of the left derivative against the
/// power rule, with the N -> 2N error ratio near 2.
#[test]
fn criterion_1_operator_accuracy() {
    let start = Instant::now();
    let alpha = 0.7;
    let order = FracOrder::new(alpha).unwrap();
    let exact = |t: f64| gamma(3.0) / gamma(3.0 - alpha) * t.powf(2.0 - alpha);
    let max_rel = |n: usize| -> f64 {
        let grid = Grid1D::new(0.0, 1.0, n).unwrap();
        let u = GridFunction::from_scalar_fn(grid.clone(), |t| t * t).unwrap();
        let d = left_frac_derivative(&u, order).unwrap();
        grid.nodes()
            .enumerate()
            .filter(|(_, t)| *t >= 0.1) // interior: away from the t = 0 degeneracy
            .map(|(i, t)| ((d.values()[i] - exact(t)) / exact(t)).abs())
            .fold(0.0, f64::max)
    };
    let e_coarse = max_rel(1024);
    let e_fine = max_rel(2048);
    assert!(e_coarse < 2e-2, "max relative error {e_coarse} at N = 1024");
    let ratio = e_coarse / e_fine;
    assert!(
        (1.7..=2.3).contains(&ratio),
        "error ratio {ratio} outside [1.7, 2.3]"
    );
    assert!(start.elapsed() < Duration::from_secs(1), "{:?}", start.elapsed());
}

/// Criterion 2: discrete integration by parts for 100 random compactly
/// supported pairs, and agreement of the stiffness form with the spectral
/// seminorm within 2%.
#[test]
fn criterion_2_adjointness_and_spectral_consistency() {
    let start = Instant::now();
    let order = FracOrder::new(0.8).unwrap();
    let grid = Grid1D::new(-1.0, 1.0, 601).unwrap();
    let h = grid.h();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let make = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut vals = vec![0.0; 601];
            for v in vals.iter_mut().take(480).skip(120) {
                *v = rng.random_range(-1.0..1.0);
            }
            GridFunction::from_values(grid.clone(), 1, vals).unwrap()
        };
        let u = make(&mut rng);
        let v = make(&mut rng);
        let du = left_frac_derivative(&u, order).unwrap();
        let dv = right_frac_derivative(&v, order).unwrap();
        let lhs: f64 =
            h * du.values().iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>();
        let rhs: f64 =
            h * u.values().iter().zip(dv.values()).map(|(a, b)| a * b).sum::<f64>();
        let nu = fhs_core::fracops::rectangle_l2_sq(&u).sqrt();
        let nv = fhs_core::fracops::rectangle_l2_sq(&v).sqrt();
        assert!(
            (lhs - rhs).abs() <= 1e-8 * nu * nv,
            "adjointness violated: {lhs} vs {rhs}"
        );
    }
    for alpha in [0.6, 0.75, 0.9] {
        let order = FracOrder::new(alpha).unwrap();
        let grid = Grid1D::new(-8.0, 8.0, 2049).unwrap();
        let u = GridFunction::from_scalar_fn(grid.clone(), |t| (-t * t).exp()).unwrap();
        let quad = FracStiffness::new(order, grid).quadratic_form(&u).unwrap();
        let spectral = fourier_seminorm_sq(&u, order).unwrap();
        let rel = (quad - spectral).abs() / spectral;
        assert!(rel < 0.02, "alpha = {alpha}: stiffness vs spectral off by {rel}");
    }
    assert!(start.elapsed() < Duration::from_secs(5), "{:?}", start.elapsed());
}

/// Criterion 3: the discrete derivative of the energy matches directional
/// finite differences to 1e-5 relative on the reference configuration.
#[test]
fn criterion_3_gradient_correctness() {
    let start = Instant::now();
    let mut config = reference_config();
    config.skip_validation = true;
    let model = config.assemble_line().unwrap();
    let grid = config.line_grid().unwrap();
    let n = grid.len();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for trial in 0..10 {
        let center = rng.random_range(-1.0..2.0);
        let width = rng.random_range(0.3..1.0);
        let mut u: Vec<f64> = grid
            .nodes()
            .map(|t| (-((t - center) / width).powi(2)).exp())
            .collect();
        model.project_free(&mut u);
        let (r, _) = model.residual(&u);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        model.project_free(&mut v);
        let derivative: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
        let eps = 1e-6;
        let up: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
        let dn: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - eps * b).collect();
        let fd = (model.energy(&up) - model.energy(&dn)) / (2.0 * eps);
        let rel = (derivative - fd).abs() / fd.abs().max(1e-12);
        assert!(rel < 1e-5, "trial {trial}: {derivative} vs {fd} (rel {rel})");
    }
    assert!(start.elapsed() < Duration::from_secs(5), "{:?}", start.elapsed());
}

/// Criterion 4: the fibering root matches the homogeneous closed form to
/// 1e-8, and under the strict two-power potential the fibering derivative
/// changes sign exactly once across the expanded bracket.
#[test]
fn criterion_4_fibering_map() {
    let start = Instant::now();
    let grid_nodes = 513;
    let make_model = |epsilon: f64| {
        let config = ProblemConfig {
            order: FracOrder::new(0.75).unwrap(),
            lambda: 100.0,
            truncation_radius: 4.0,
            n_nodes: grid_nodes,
            n_components: 1,
            potential: builtin_potential(THETA, epsilon, AmplitudeProfile::constant(1.0).unwrap())
                .unwrap(),
            weight: builtin_weight(1, 1.0, 5.0, (-0.25, 1.25), (0.0, 1.0), 0.1).unwrap(),
            optimizer: OptimizerOptions::default(),
            multistart_count: 1,
            seed: 4,
            exec_mode: ExecMode::Parallel,
            boundary_tolerance: 1e-3,
            skip_validation: true,
        };
        (config.line_grid().unwrap(), config.assemble_line().unwrap())
    };
    let opts = OptimizerOptions::default();

    // homogeneous potential: sigma_u = (||u||^2 / (theta B))^{1/(theta-2)}
    let (grid, pure) = make_model(0.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
    for trial in 0..20 {
        let center = rng.random_range(-1.5..2.5);
        let width = rng.random_range(0.2..1.0);
        let mut u: Vec<f64> = grid
            .nodes()
            .map(|t| (-((t - center) / width).powi(2)).exp())
            .collect();
        pure.project_free(&mut u);
        let k = pure.x_norm_sq(&u);
        let b = pure.nonlinear_term(&u);
        let expected = (k / (THETA * b)).powf(1.0 / (THETA - 2.0));
        let fib = pure.fibering_sigma(&u, &opts, None).unwrap();
        let rel = (fib.sigma - expected).abs() / expected;
        assert!(rel < 1e-8, "trial {trial}: sigma {} vs {expected}", fib.sigma);
    }

    // strict potential: exactly one sign change across the bracket span
    let (grid, strict) = make_model(1.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(45);
    let mut scratch_dir = vec![0.0; grid.len()];
    for trial in 0..100 {
        let center = rng.random_range(-1.5..2.5);
        let width = rng.random_range(0.2..1.0);
        let amp = rng.random_range(0.3..3.0);
        for (i, t) in grid.nodes().enumerate() {
            scratch_dir[i] = amp * (-((t - center) / width).powi(2)).exp();
        }
        strict.project_free(&mut scratch_dir);
        let fib = strict.fibering_sigma(&scratch_dir, &opts, None).unwrap();
        let k = strict.x_norm_sq(&scratch_dir);
        // h'(s) = s k - sum w (grad W(s u), u), sampled geometrically across
        // an interval well containing the expanded bracket
        let mut scratch = [0.0];
        let mut dphi = |s: f64| {
            let su: Vec<f64> = scratch_dir.iter().map(|v| v * s).collect();
            let mut nonlinear = 0.0;
            let quad = grid.trapezoid_weights();
            for (i, t) in grid.nodes().enumerate() {
                nonlinear += quad[i]
                    * strict.potential().grad_dot(t, &su[i..=i], &scratch_dir[i..=i], &mut scratch);
            }
            s * k - nonlinear
        };
        let lo = fib.bracket.0 / 64.0;
        let hi = fib.bracket.1 * 64.0;
        let samples = 60;
        let mut sign_changes = 0;
        let mut prev = dphi(lo);
        for j in 1..=samples {
            let s = lo * (hi / lo).powf(j as f64 / samples as f64);
            let value = dphi(s);
            if prev > 0.0 && value <= 0.0 || prev < 0.0 && value >= 0.0 {
                sign_changes += 1;
            }
            prev = value;
        }
        assert_eq!(sign_changes, 1, "trial {trial}: {sign_changes} sign changes");
    }
    assert!(start.elapsed() < Duration::from_secs(10), "{:?}", start.elapsed());
}

/// Criterion 5: boundary value ground state with multistart consensus,
/// gradient certificate, the window norm inequalities, and grid
/// self-convergence of the energy.
#[test]
fn criterion_5_bvp_ground_state() {
    let start = Instant::now();
    let solve_at = |n_nodes: usize| -> GroundState {
        let mut config = reference_config();
        config.n_nodes = n_nodes;
        solve_bvp(&config).expect("boundary value solve")
    };
    let coarse = solve_at(2049);
    assert!(
        coarse.multistart_spread <= 1e-6,
        "converged energies spread {}",
        coarse.multistart_spread
    );
    assert!(coarse.gradient_norm < 1e-6, "gradient {}", coarse.gradient_norm);
    let checks = coarse.core_checks.as_ref().unwrap();
    // ||u||_L2 <= (1 / Gamma(1.75)) ||D^0.75 u||_L2 on [0, 1]
    assert!(checks.poincare_ok, "{checks:?}");
    assert!(checks.sup_ok, "{checks:?}");
    assert!(coarse.energy > 0.0);
    assert!(coarse.u.max_magnitude() > 0.0, "trivial state");

    let fine = solve_at(4097);
    let rel = (coarse.energy - fine.energy).abs() / fine.energy;
    assert!(rel < 0.02, "self-convergence: {} vs {} (rel {rel})", coarse.energy, fine.energy);
    assert!(start.elapsed() < Duration::from_secs(60), "{:?}", start.elapsed());
}

/// Criterion 6: energy ordering across the sweep: positive, nondecreasing
/// in lambda, below the boundary value energy and below the lambda-free
/// cap.
#[test]
fn criterion_6_energy_ordering() {
    let fx = sweep_fixture();
    let report = &fx.report;
    assert!(
        fx.elapsed < Duration::from_secs(300),
        "sweep took {:?}",
        fx.elapsed
    );
    assert!(!report.incomplete, "{:?}", report.failure);
    for pair in report.records.windows(2) {
        assert!(
            pair[1].c_lambda >= pair[0].c_lambda - 1e-8,
            "c_lambda not nondecreasing:\n{}",
            format_records(report)
        );
    }
    for r in &report.records {
        assert!(
            r.c_lambda <= report.c_tilde + 1e-8,
            "c_lambda = {} exceeds c_tilde = {}\n{}",
            r.c_lambda,
            report.c_tilde,
            format_records(report)
        );
        assert!(r.c_lambda <= report.energy_cap + 1e-8);
        // observed positive floor from the Nehari norm
        let rho_observed = (0.5 - 1.0 / THETA) * r.x_norm_sq;
        assert!(rho_observed > 0.0);
        assert!(r.c_lambda >= rho_observed - 1e-9);
    }
}

/// Criterion 7: the a-priori norm bound and the weighted-mass inequality
/// hold for every sweep record (the latter exactly).
#[test]
fn criterion_7_a_priori_bound() {
    let report = &sweep_fixture().report;
    for r in &report.records {
        assert!(
            r.bound_ratio <= 1.0 + 1e-6,
            "bound ratio {} at lambda {}\n{}",
            r.bound_ratio,
            r.lambda,
            format_records(report)
        );
        assert!(
            r.weighted_mass <= r.weighted_mass_bound,
            "weighted mass {} above {} at lambda {}",
            r.weighted_mass,
            r.weighted_mass_bound,
            r.lambda
        );
    }
}

/// Criterion 8: concentration onto the core interval: tail mass strictly
/// decreasing and below 5% at the last lambda, Sobolev distance to the
/// boundary value state below 10% of its norm. Violations print the full
/// sweep table.
#[test]
fn criterion_8_concentration() {
    let fx = sweep_fixture();
    let report = &fx.report;
    assert!(
        fx.elapsed < Duration::from_secs(300),
        "sweep took {:?}",
        fx.elapsed
    );
    for pair in report.records.windows(2) {
        assert!(
            pair[1].tail_mass_fraction < pair[0].tail_mass_fraction,
            "tail mass not strictly decreasing:\n{}",
            format_records(report)
        );
    }
    let last = report.records.last().unwrap();
    assert!(
        last.tail_mass_fraction < 0.05,
        "tail mass {} at lambda {}\n{}",
        last.tail_mass_fraction,
        last.lambda,
        format_records(report)
    );
    assert!(
        last.h_alpha_distance < 0.1 * fx.u_tilde_h_alpha,
        "distance {} vs 0.1 * {}\n{}",
        last.h_alpha_distance,
        fx.u_tilde_h_alpha,
        format_records(report)
    );
}

/// Criterion 9: hypothesis validators: the reference potential passes,
/// an injected quadratic-growth potential fails the Ambrosetti-Rabinowitz
/// check with a witness, and the pure power yields a non-strict warning.
#[test]
fn criterion_9_hypothesis_validators() {
    let start = Instant::now();
    let weight = builtin_weight(1, 1.0, 5.0, (-0.25, 1.25), (0.0, 1.0), 0.1).unwrap();
    let plan = SamplePlan::reference(-1.25, 2.25);
    let grid = Grid1D::new(-8.0, 8.0, 2049).unwrap();
    let order = FracOrder::new(0.75).unwrap();
    let bound = spaces::estimate_c_inf(order, 64, 42);
    let est = EmbeddingEstimate::for_weight(bound, &weight, &grid).unwrap();

    let reference =
        builtin_potential(3.0, 1.0, AmplitudeProfile::constant(1.0).unwrap()).unwrap();
    let report =
        validate_hypotheses(&reference, &weight, &plan, &grid, &est, ExecMode::Parallel);
    assert!(report.passed(), "{}", report.summary());
    assert_eq!(report.warnings().count(), 0, "{}", report.summary());

    // quadratic growth: theta. The AR exponent cannot exceed 2, so the
    // condition fails with a concrete witness.
    let quadratic = PotentialSpec::custom(
        "quadratic",
        2.0,
        std::sync::Arc::new(|_, u: &[f64]| u.iter().map(|v| v * v).sum()),
        std::sync::Arc::new(|_, u: &[f64], out: &mut [f64]| {
            for (o, v) in out.iter_mut().zip(u) {
                *o = 2.0 * v;
            }
        }),
        std::sync::Arc::new(|u: &[f64]| {
            let r2: f64 = u.iter().map(|v| v * v).sum();
            r2 + 2.0 * r2.sqrt()
        }),
    );
    let report =
        validate_hypotheses(&quadratic, &weight, &plan, &grid, &est, ExecMode::Parallel);
    let ar = report.find(Hypothesis::ArCondition).unwrap();
    assert_eq!(ar.status, CheckStatus::Fail);
    assert!(ar.witness.is_some(), "failure must carry a witness");

    // pure power: the fibering ratio is constant, a non-strict warning
    let pure = builtin_potential(3.0, 0.0, AmplitudeProfile::constant(1.0).unwrap()).unwrap();
    let report = validate_hypotheses(&pure, &weight, &plan, &grid, &est, ExecMode::Parallel);
    assert!(report.passed());
    let fib = report.find(Hypothesis::FiberingMonotonicity).unwrap();
    assert_eq!(fib.status, CheckStatus::Warning);
    assert!(fib.detail.contains("non-strict"), "{}", fib.detail);
    assert!(start.elapsed() < Duration::from_secs(5), "{:?}", start.elapsed());
}

/// Criterion 10: repeating the sweep with the same configuration and seed
/// reproduces byte-identical CSV output from the command-line interface.
#[test]
fn criterion_10_determinism() {
    let binary = env!("CARGO_BIN_EXE_fhs");
    let tmp = std::env::temp_dir().join("fhs-acceptance-determinism");
    let run = |dir: &std::path::Path| {
        let status = std::process::Command::new(binary)
            .args([
                "sweep",
                "--output",
                dir.to_str().unwrap(),
                "--seed",
                "42",
            ])
            .status()
            .expect("launch fhs");
        assert!(status.success(), "sweep exited with {status}");
        std::fs::read(dir.join("sweep.csv")).expect("sweep.csv written")
    };
    let first = run(&tmp.join("a"));
    let second = run(&tmp.join("b"));
    assert_eq!(first, second, "CSV bytes differ between identical runs");
}
