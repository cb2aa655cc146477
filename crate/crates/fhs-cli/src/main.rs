//! `fhs`: ground states of fractional Hamiltonian systems.
//!
//! ```text
//! fhs <validate|operators|solve|bvp|sweep> [--config PATH] [--output DIR]
//!     [--seed N] [--set section.key=value]... [--sequential]
//! ```
//!
//! Without `--config` the built-in reference configuration is used.
//! `--output` defaults to `fhs-out`; the `FHS_OUTPUT_DIR` environment
//! variable overrides the default (the flag wins over both). Exit codes:
//! 0 success, 2 usage or configuration error, 3 hypothesis validation
//! failure, 4 numerical failure (non-convergence, truncation too small,
//! incomplete sweep), 1 I/O error.

mod report;
mod settings;

use fhs_core::concentration::{run_sweep, SweepOptions};
use fhs_core::fracops::{
    fourier_seminorm_sq, left_frac_derivative, FracOrder, FracStiffness,
};
use fhs_core::gamma::gamma;
use fhs_core::grid::{Grid1D, GridFunction};
use fhs_core::potentials::{validate_hypotheses, SamplePlan};
use fhs_core::solver::{solve_bvp, solve_line};
use fhs_core::spaces::{estimate_c_inf_with, CInfBound, EmbeddingEstimate};
use fhs_core::FhsError;
use settings::Settings;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

enum CliError {
    Usage(String),
    Config(String),
    Validation(String),
    Numerical(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<FhsError> for CliError {
    fn from(e: FhsError) -> Self {
        match e {
            FhsError::InvalidConfig(_)
            | FhsError::InvalidOrder { .. }
            | FhsError::InvalidGrid(_) => CliError::Config(e.to_string()),
            FhsError::ValidationFailed(_) => CliError::Validation(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Validation(m)
            | CliError::Numerical(m) => m.clone(),
            CliError::Io(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

struct Cli {
    subcommand: String,
    config_path: Option<String>,
    output_dir: PathBuf,
    overrides: Vec<String>,
    seed: Option<u64>,
    sequential: bool,
}

const USAGE: &str = "usage: fhs <validate|operators|solve|bvp|sweep> \
[--config PATH] [--output DIR] [--seed N] [--set section.key=value]... [--sequential]";

fn parse_args(args: &[String]) -> Result<Cli, CliError> {
    let mut iter = args.iter();
    let Some(subcommand) = iter.next() else {
        return Err(CliError::Usage(USAGE.into()));
    };
    if !["validate", "operators", "solve", "bvp", "sweep"].contains(&subcommand.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown subcommand '{subcommand}'\n{USAGE}"
        )));
    }
    let mut cli = Cli {
        subcommand: subcommand.clone(),
        config_path: None,
        output_dir: std::env::var("FHS_OUTPUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|_| PathBuf::from("fhs-out")),
        overrides: Vec::new(),
        seed: None,
        sequential: false,
    };
    while let Some(flag) = iter.next() {
        let mut need_value = |name: &str| {
            iter.next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("flag {name} needs a value\n{USAGE}")))
        };
        match flag.as_str() {
            "--config" => cli.config_path = Some(need_value("--config")?),
            "--output" | "-o" => cli.output_dir = PathBuf::from(need_value("--output")?),
            "--seed" => {
                let v = need_value("--seed")?;
                cli.seed = Some(v.parse().map_err(|_| {
                    CliError::Usage(format!("cannot parse seed '{v}'"))
                })?);
            }
            "--set" => cli.overrides.push(need_value("--set")?),
            "--sequential" => cli.sequential = true,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown flag '{other}'\n{USAGE}"
                )))
            }
        }
    }
    Ok(cli)
}

fn resolve_settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut settings = Settings::default();
    if let Some(path) = &cli.config_path {
        let text = std::fs::read_to_string(path)?;
        settings
            .apply_file(path, &text)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    for assignment in &cli.overrides {
        settings
            .apply_override(assignment)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    if cli.sequential {
        settings.parallel = false;
    }
    Ok(settings)
}

fn embedding_for(settings: &Settings) -> Result<(CInfBound, EmbeddingEstimate), CliError> {
    let order = FracOrder::new(settings.alpha)?;
    let mut bound = estimate_c_inf_with(
        order,
        settings.c_inf_samples,
        settings.seed,
        settings.exec_mode(),
    );
    if let Some(override_value) = settings.c_inf_override {
        bound.c_inf_lower = override_value;
    }
    let config = settings.problem_config()?;
    let grid = config.line_grid()?;
    let est = EmbeddingEstimate::for_weight(bound, &config.weight, &grid)?;
    Ok((bound, est))
}

fn cmd_validate(cli: &Cli, settings: &Settings) -> Result<(), CliError> {
    let config = settings.problem_config()?;
    config.validate()?;
    let (bound, est) = embedding_for(settings)?;
    let grid = config.line_grid()?;
    let plan = SamplePlan::reference(settings.j_lo - 1.0, settings.j_hi + 1.0);
    let validation = validate_hypotheses(
        &config.potential,
        &config.weight,
        &plan,
        &grid,
        &est,
        settings.exec_mode(),
    );

    let mut out = String::new();
    let _ = writeln!(out, "c_inf_lower = {:.12e}", bound.c_inf_lower);
    let _ = writeln!(out, "c_inf_samples = {}", bound.sample_count);
    let _ = writeln!(out, "meas_sublevel = {:.12e}", est.meas_sublevel);
    let _ = writeln!(out, "theta_const = {:.12e}", est.theta_const);
    let _ = writeln!(out, "lambda_threshold = {:.12e}", est.lambda_threshold);
    let _ = writeln!(out, "passed = {}", validation.passed());
    out.push_str(&validation.summary());
    let document = format!("{}{}", report::header("fhs hypothesis validation", settings), out);
    report::write(&cli.output_dir, "validation.txt", &document)?;
    print!("{out}");
    if validation.passed() {
        Ok(())
    } else {
        Err(CliError::Validation(
            "hypothesis validation failed; see validation.txt".into(),
        ))
    }
}

fn cmd_operators(cli: &Cli, settings: &Settings) -> Result<(), CliError> {
    // first-order convergence of the left derivative against the power
    // rule D^a t^2 = Gamma(3)/Gamma(3-a) t^{2-a}, on the interior t >= 0.1
    let alpha = 0.7;
    let order = FracOrder::new(alpha)?;
    let power_rule = |t: f64| gamma(3.0) / gamma(3.0 - alpha) * t.powf(2.0 - alpha);
    let sizes = [257usize, 513, 1025, 2049];
    let mut errors = Vec::new();
    for &n in &sizes {
        let grid = Grid1D::new(0.0, 1.0, n)?;
        let u = GridFunction::from_scalar_fn(grid.clone(), |t| t * t)?;
        let d = left_frac_derivative(&u, order)?;
        let mut max_rel: f64 = 0.0;
        for (i, t) in grid.nodes().enumerate() {
            if t >= 0.1 {
                let exact = power_rule(t);
                max_rel = max_rel.max(((d.values()[i] - exact) / exact).abs());
            }
        }
        errors.push(max_rel);
    }

    let mut out = String::new();
    let _ = writeln!(out, "# left derivative of t^2, alpha = {alpha}, interior t >= 0.1");
    let _ = writeln!(out, "# columns: n_nodes max_rel_error ratio observed_order");
    for (k, (&n, &e)) in sizes.iter().zip(&errors).enumerate() {
        if k == 0 {
            let _ = writeln!(out, "{n} {e:.6e} - -");
        } else {
            let ratio = errors[k - 1] / e;
            let _ = writeln!(out, "{n} {e:.6e} {ratio:.3} {:.3}", ratio.log2());
        }
    }

    // adjointness of the operator pair on random compactly supported data
    let grid = Grid1D::new(-1.0, 1.0, 513)?;
    let op_order = FracOrder::new(0.8)?;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(settings.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let make = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut vals = vec![0.0; 513];
            for v in vals.iter_mut().take(400).skip(100) {
                *v = rng.random_range(-1.0..1.0);
            }
            GridFunction::from_values(grid.clone(), 1, vals).expect("finite")
        };
        let u = make(&mut rng);
        let v = make(&mut rng);
        let du = left_frac_derivative(&u, op_order)?;
        let dv = fhs_core::fracops::right_frac_derivative(&v, op_order)?;
        let h = grid.h();
        let lhs: f64 = du.values().iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>() * h;
        let rhs: f64 = u.values().iter().zip(dv.values()).map(|(a, b)| a * b).sum::<f64>() * h;
        let norm_u = fhs_core::fracops::rectangle_l2_sq(&u).sqrt();
        let norm_v = fhs_core::fracops::rectangle_l2_sq(&v).sqrt();
        worst = worst.max((lhs - rhs).abs() / (norm_u * norm_v));
    }
    let _ = writeln!(out, "# adjointness over 100 random compactly supported pairs");
    let _ = writeln!(out, "adjointness_residual = {worst:.6e}");

    // spectral route against the quadratic form for a Gaussian bump
    let _ = writeln!(out, "# stiffness form vs spectral seminorm, Gaussian bump");
    for alpha in [0.6, 0.75, 0.9] {
        let order = FracOrder::new(alpha)?;
        let grid = Grid1D::new(-8.0, 8.0, 2049)?;
        let u = GridFunction::from_scalar_fn(grid.clone(), |t| (-t * t).exp())?;
        let quad = FracStiffness::new(order, grid).quadratic_form(&u)?;
        let spectral = fourier_seminorm_sq(&u, order)?;
        let rel = (quad - spectral).abs() / spectral;
        let _ = writeln!(out, "alpha = {alpha}: rel_difference = {rel:.6e}");
    }

    let document = format!("{}{}", report::header("fhs operator study", settings), out);
    report::write(&cli.output_dir, "operators.txt", &document)?;
    print!("{out}");
    Ok(())
}

fn cmd_solve(cli: &Cli, settings: &Settings) -> Result<(), CliError> {
    let mut config = settings.problem_config()?;
    config.skip_validation = false;
    let gs = solve_line(&config)?;
    report::write(
        &cli.output_dir,
        "solve_report.txt",
        &report::ground_state_report("fhs line ground state", settings, &gs),
    )?;
    report::write(&cli.output_dir, "u_lambda.txt", &report::profile(settings, &gs.u))?;
    report::write(
        &cli.output_dir,
        "iterations.log",
        &report::iteration_log(settings, &gs.log),
    )?;
    println!(
        "energy = {:.12e}, gradient_norm = {:.3e}, runs = {}/{}",
        gs.energy, gs.gradient_norm, gs.converged_runs, gs.total_runs
    );
    Ok(())
}

fn cmd_bvp(cli: &Cli, settings: &Settings) -> Result<(), CliError> {
    let mut config = settings.problem_config()?;
    config.skip_validation = false;
    let gs = solve_bvp(&config)?;
    report::write(
        &cli.output_dir,
        "bvp_report.txt",
        &report::ground_state_report("fhs boundary value ground state", settings, &gs),
    )?;
    report::write(&cli.output_dir, "u_tilde.txt", &report::profile(settings, &gs.u))?;
    report::write(
        &cli.output_dir,
        "iterations.log",
        &report::iteration_log(settings, &gs.log),
    )?;
    println!(
        "energy = {:.12e}, gradient_norm = {:.3e}, runs = {}/{}",
        gs.energy, gs.gradient_norm, gs.converged_runs, gs.total_runs
    );
    Ok(())
}

fn cmd_sweep(cli: &Cli, settings: &Settings) -> Result<(), CliError> {
    let mut config = settings.problem_config()?;
    config.skip_validation = false;
    let opts = SweepOptions {
        lambdas: settings.lambda_list.clone(),
        warm_start: settings.warm_start,
    };
    let sweep = run_sweep(&config, &opts)?;
    report::write(&cli.output_dir, "sweep.csv", &report::sweep_csv(settings, &sweep))?;
    report::write(
        &cli.output_dir,
        "sweep_summary.txt",
        &report::sweep_summary(settings, &sweep),
    )?;
    report::write(
        &cli.output_dir,
        "u_tilde.txt",
        &report::profile(settings, &sweep.bvp.u),
    )?;
    for (k, gs) in sweep.line_states.iter().enumerate() {
        report::write(
            &cli.output_dir,
            &format!("u_lambda_{k}.txt"),
            &report::profile(settings, &gs.u),
        )?;
    }
    for row in sweep.csv_rows() {
        println!("{row}");
    }
    if sweep.incomplete {
        return Err(CliError::Numerical(format!(
            "sweep incomplete: {}",
            sweep.failure.unwrap_or_default()
        )));
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = parse_args(&args)?;
    let settings = resolve_settings(&cli)?;
    std::fs::create_dir_all(&cli.output_dir)?;
    let result = match cli.subcommand.as_str() {
        "validate" => cmd_validate(&cli, &settings),
        "operators" => cmd_operators(&cli, &settings),
        "solve" => cmd_solve(&cli, &settings),
        "bvp" => cmd_bvp(&cli, &settings),
        "sweep" => cmd_sweep(&cli, &settings),
        _ => unreachable!("subcommand checked in parse_args"),
    };
    if let Err(e) = &result {
        // machine-readable error record next to the other artifacts
        let record = format!("kind = {}\nmessage = {}\n", e.kind(), e.message());
        let _ = std::fs::write(cli.output_dir.join("error.txt"), record);
    }
    result
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fhs: error ({}): {}", e.kind(), e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
