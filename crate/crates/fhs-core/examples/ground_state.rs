//! Minimal library walkthrough: solve the boundary value problem on the
//! core interval, then the weighted line problem, and compare energies.
//!
//! ```text
//! cargo run --release -p fhs-core --example ground_state
//! ```

use fhs_core::exec::ExecMode;
use fhs_core::fracops::FracOrder;
use fhs_core::nehari::OptimizerOptions;
use fhs_core::potentials::{builtin_potential, builtin_weight, AmplitudeProfile};
use fhs_core::solver::{solve_bvp, solve_line_with, ProblemConfig};

fn main() -> fhs_core::Result<()> {
    let config = ProblemConfig {
        order: FracOrder::new(0.75)?,
        lambda: 1000.0,
        truncation_radius: 8.0,
        n_nodes: 2049,
        n_components: 1,
        potential: builtin_potential(3.0, 1.0, AmplitudeProfile::constant(1.0)?)?,
        weight: builtin_weight(1, 1.0, 5.0, (-0.25, 1.25), (0.0, 1.0), 0.1)?,
        optimizer: OptimizerOptions::default(),
        multistart_count: 8,
        seed: 42,
        exec_mode: ExecMode::Parallel,
        boundary_tolerance: 1e-3,
        skip_validation: false,
    };

    let bvp = solve_bvp(&config)?;
    println!(
        "boundary value ground state: energy {:.8}, gradient {:.2e}, {} / {} runs",
        bvp.energy, bvp.gradient_norm, bvp.converged_runs, bvp.total_runs
    );

    let line = solve_line_with(&config, &[bvp.u.values().to_vec()])?;
    println!(
        "line ground state at lambda {}: energy {:.8}, gradient {:.2e}",
        config.lambda, line.energy, line.gradient_norm
    );
    println!(
        "ordering c_lambda <= c_tilde: {:.8} <= {:.8}",
        line.energy, bvp.energy
    );
    Ok(())
}
