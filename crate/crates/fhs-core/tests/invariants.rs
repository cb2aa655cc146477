//! Cross-module invariants: small-sphere energy positivity (the
//! mountain-pass geometry), the infimum characterization of the ground
//! energy, and classical degeneration of the operators at order one.

use fhs_core::exec::ExecMode;
use fhs_core::fracops::{left_frac_derivative, right_frac_derivative, FracOrder, FracStiffness};
use fhs_core::grid::{Grid1D, GridFunction};
use fhs_core::nehari::OptimizerOptions;
use fhs_core::potentials::{builtin_potential, builtin_weight, AmplitudeProfile};
use fhs_core::solver::{solve_line, ProblemConfig};
use fhs_core::spaces::{estimate_c_inf, EmbeddingEstimate};
use rand::{Rng, SeedableRng};

fn small_config(lambda: f64) -> ProblemConfig {
    ProblemConfig {
        order: FracOrder::new(0.75).unwrap(),
        lambda,
        truncation_radius: 4.0,
        n_nodes: 513,
        n_components: 1,
        potential: builtin_potential(3.0, 1.0, AmplitudeProfile::constant(1.0).unwrap()).unwrap(),
        weight: builtin_weight(1, 1.0, 5.0, (-0.25, 1.25), (0.0, 1.0), 0.1).unwrap(),
        optimizer: OptimizerOptions::default(),
        multistart_count: 4,
        seed: 42,
        exec_mode: ExecMode::Parallel,
        boundary_tolerance: 1e-3,
        skip_validation: true,
    }
}

/// On the sphere of radius `rho = delta / (C_inf (1 + 1/Theta)^{1/2})` the
/// energy stays above `beta = rho^2 / 4`: for `|u| <= delta` the two-power
/// potential is bounded by `(Theta/4) |u|^2`, and the embedding
/// inequalities turn that into the uniform floor.
#[test]
fn small_spheres_have_positive_energy() {
    let config = small_config(100.0);
    let order = config.order;
    let bound = estimate_c_inf(order, 64, 11);
    let grid = config.line_grid().unwrap();
    let est = EmbeddingEstimate::for_weight(bound, &config.weight, &grid).unwrap();
    let theta_const = est.theta_const;
    let c_inf = est.c_inf_lower;

    // largest delta with a_max (delta + 3/4 delta^2) <= Theta / 4
    let a_max = 1.0;
    let target = theta_const / 4.0;
    let delta = (-1.0 + (1.0 + 3.0 * target / a_max).sqrt()) / 1.5;
    assert!(a_max * (delta + 0.75 * delta * delta) <= target * (1.0 + 1e-12));

    let rho = delta / (c_inf * (1.0 + 1.0 / theta_const).sqrt());
    let beta = (0.5 - 0.25) * rho * rho;

    let lambda = est.lambda_threshold * 10.0;
    let mut cfg = config.clone();
    cfg.lambda = lambda;
    let model = cfg.assemble_line().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20 {
        let center = rng.random_range(-1.5..2.5);
        let width = rng.random_range(0.2..1.0);
        let mut u: Vec<f64> = grid
            .nodes()
            .map(|t| (-((t - center) / width).powi(2)).exp())
            .collect();
        model.project_free(&mut u);
        let scale = rho / model.x_norm_sq(&u).sqrt();
        for v in &mut u {
            *v *= scale;
        }
        // the sampled sup must sit inside the region where the quadratic
        // envelope of W is valid (this is the embedding bound in action)
        let sup = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(sup <= delta * (1.0 + 1e-9), "trial {trial}: sup {sup} vs delta {delta}");
        let energy = model.energy(&u);
        assert!(
            energy >= beta * (1.0 - 1e-9),
            "trial {trial}: energy {energy} below beta {beta}"
        );
    }
}

/// The computed ground energy is the infimum of the projected energies:
/// every random direction projects at or above it.
#[test]
fn ground_energy_is_infimum_of_projections() {
    let config = small_config(100.0);
    let gs = solve_line(&config).unwrap();
    let model = config.assemble_line().unwrap();
    let grid = config.line_grid().unwrap();
    let opts = OptimizerOptions::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..30 {
        let center = rng.random_range(-2.0..3.0);
        let width = rng.random_range(0.1..1.2);
        let mut u: Vec<f64> = grid
            .nodes()
            .map(|t| (-((t - center) / width).powi(2)).exp())
            .collect();
        model.project_free(&mut u);
        let projected = model.nehari_project(&u, &opts).unwrap();
        assert!(
            projected.energy >= gs.energy - 1e-9,
            "projection energy {} below ground energy {}",
            projected.energy,
            gs.energy
        );
    }
}

/// At order one the left/right derivatives reduce to backward/forward
/// differences and the stiffness form to the classical Dirichlet sum.
#[test]
fn order_one_degenerates_to_classical_differences() {
    let order = FracOrder::new(1.0).unwrap();
    let grid = Grid1D::new(0.0, 2.0, 65).unwrap();
    let h = grid.h();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
    let vals: Vec<f64> = (0..65).map(|_| rng.random_range(-1.0..1.0)).collect();
    let u = GridFunction::from_values(grid.clone(), 1, vals.clone()).unwrap();

    let d = left_frac_derivative(&u, order).unwrap();
    for i in 0..65 {
        let expected = if i == 0 {
            vals[0] / h
        } else {
            (vals[i] - vals[i - 1]) / h
        };
        assert!((d.values()[i] - expected).abs() <= 1e-10 * expected.abs().max(1.0));
    }

    let r = right_frac_derivative(&u, order).unwrap();
    for i in 0..65 {
        let expected = if i == 64 {
            vals[64] / h
        } else {
            (vals[i] - vals[i + 1]) / h
        };
        assert!((r.values()[i] - expected).abs() <= 1e-10 * expected.abs().max(1.0));
    }

    let stiff = FracStiffness::new(order, grid).quadratic_form(&u).unwrap();
    let mut classical = vals[0] * vals[0] / h;
    for i in 1..65 {
        let diff = vals[i] - vals[i - 1];
        classical += diff * diff / h;
    }
    assert!((stiff - classical).abs() <= 1e-9 * classical);
}
