//! Flat sectioned key-value configuration.
//!
//! Every physical and numerical parameter carries an explicit key. Files
//! look like
//!
//! ```text
//! [problem]
//! alpha = 0.75
//! lambda = 100.0
//!
//! [weight]
//! J_lo = -0.25
//! J_hi = 1.25
//! ```
//!
//! Unknown keys are errors with their line number; omitted keys take the
//! reference defaults. Command-line overrides use the same
//! `section.key=value` addresses.

use fhs_core::exec::ExecMode;
use fhs_core::fracops::FracOrder;
use fhs_core::nehari::OptimizerOptions;
use fhs_core::potentials::{builtin_potential, builtin_weight, AmplitudeProfile};
use fhs_core::solver::ProblemConfig;
use fhs_core::FhsError;

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
    /// `file:line` or `--set` origin.
    pub location: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Resolved run settings; defaults are the reference configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    // [problem]
    pub alpha: f64,
    pub n_components: usize,
    pub lambda: f64,
    pub truncation_r: f64,
    pub n_nodes: usize,
    // [potential]
    pub theta: f64,
    pub epsilon: f64,
    pub a_const: f64,
    // [weight]
    pub c: f64,
    pub l_max: f64,
    pub j_lo: f64,
    pub j_hi: f64,
    pub t_end: f64,
    pub ramp: f64,
    // [optimizer]
    pub multistart: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub fibering_tol: f64,
    pub step_init: f64,
    pub step_shrink: f64,
    pub armijo_c1: f64,
    pub boundary_tol: f64,
    // [sweep]
    pub lambda_list: Vec<f64>,
    pub warm_start: bool,
    // [run]
    pub seed: u64,
    pub parallel: bool,
    pub c_inf_samples: usize,
    pub c_inf_override: Option<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            alpha: 0.75,
            n_components: 1,
            lambda: 100.0,
            truncation_r: 8.0,
            n_nodes: 2049,
            theta: 3.0,
            epsilon: 1.0,
            a_const: 1.0,
            c: 1.0,
            l_max: 5.0,
            j_lo: -0.25,
            j_hi: 1.25,
            t_end: 1.0,
            ramp: 0.1,
            multistart: 20,
            max_iters: 10_000,
            grad_tol: 1e-7,
            fibering_tol: 1e-10,
            step_init: 1.0,
            step_shrink: 0.5,
            armijo_c1: 1e-4,
            boundary_tol: 1e-3,
            lambda_list: vec![1e1, 1e2, 1e3, 1e4],
            warm_start: true,
            seed: 42,
            parallel: true,
            c_inf_samples: 200,
            c_inf_override: None,
        }
    }
}

fn parse<T: std::str::FromStr>(value: &str, location: &str, key: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError {
        message: format!("cannot parse value '{value}' for key '{key}'"),
        location: location.to_string(),
    })
}

fn parse_list(value: &str, location: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|item| parse::<f64>(item, location, key))
        .collect()
}

fn parse_bool(value: &str, location: &str, key: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(ConfigError {
            message: format!("cannot parse boolean '{other}' for key '{key}'"),
            location: location.to_string(),
        }),
    }
}

impl Settings {
    /// Applies one `section.key = value` assignment.
    pub fn apply(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
        location: &str,
    ) -> Result<(), ConfigError> {
        let full = format!("{section}.{key}");
        match full.as_str() {
            "problem.alpha" => self.alpha = parse(value, location, key)?,
            "problem.n_components" => self.n_components = parse(value, location, key)?,
            "problem.lambda" => self.lambda = parse(value, location, key)?,
            "problem.truncation_R" => self.truncation_r = parse(value, location, key)?,
            "problem.n_nodes" => self.n_nodes = parse(value, location, key)?,
            "potential.theta" => self.theta = parse(value, location, key)?,
            "potential.epsilon" => self.epsilon = parse(value, location, key)?,
            "potential.a_const" => self.a_const = parse(value, location, key)?,
            "weight.c" => self.c = parse(value, location, key)?,
            "weight.l_max" => self.l_max = parse(value, location, key)?,
            "weight.J_lo" => self.j_lo = parse(value, location, key)?,
            "weight.J_hi" => self.j_hi = parse(value, location, key)?,
            "weight.T_end" => self.t_end = parse(value, location, key)?,
            "weight.ramp" => self.ramp = parse(value, location, key)?,
            "optimizer.multistart" => self.multistart = parse(value, location, key)?,
            "optimizer.max_iters" => self.max_iters = parse(value, location, key)?,
            "optimizer.grad_tol" => self.grad_tol = parse(value, location, key)?,
            "optimizer.fibering_tol" => self.fibering_tol = parse(value, location, key)?,
            "optimizer.step_init" => self.step_init = parse(value, location, key)?,
            "optimizer.step_shrink" => self.step_shrink = parse(value, location, key)?,
            "optimizer.armijo_c1" => self.armijo_c1 = parse(value, location, key)?,
            "optimizer.boundary_tol" => self.boundary_tol = parse(value, location, key)?,
            "sweep.lambda_list" => self.lambda_list = parse_list(value, location, key)?,
            "sweep.warm_start" => self.warm_start = parse_bool(value, location, key)?,
            "run.seed" => self.seed = parse(value, location, key)?,
            "run.parallel" => self.parallel = parse_bool(value, location, key)?,
            "run.c_inf_samples" => self.c_inf_samples = parse(value, location, key)?,
            "run.c_inf_override" => {
                self.c_inf_override = Some(parse(value, location, key)?);
            }
            _ => {
                return Err(ConfigError {
                    message: format!("unknown configuration key '{full}'"),
                    location: location.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Parses a sectioned key-value file over the current settings.
    pub fn apply_file(&mut self, path: &str, text: &str) -> Result<(), ConfigError> {
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let location = format!("{path}:{}", idx + 1);
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(ConfigError {
                        message: format!("malformed section header '{line}'"),
                        location,
                    });
                };
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    message: format!("expected 'key = value', found '{line}'"),
                    location,
                });
            };
            if section.is_empty() {
                return Err(ConfigError {
                    message: format!("key '{}' appears before any [section]", key.trim()),
                    location,
                });
            }
            self.apply(&section, key.trim(), value.trim(), &location)?;
        }
        Ok(())
    }

    /// Applies a command-line override `section.key=value`.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let location = format!("--set {assignment}");
        let Some((address, value)) = assignment.split_once('=') else {
            return Err(ConfigError {
                message: "override must look like section.key=value".into(),
                location,
            });
        };
        let Some((section, key)) = address.trim().split_once('.') else {
            return Err(ConfigError {
                message: format!("override key '{address}' is missing its section"),
                location,
            });
        };
        self.apply(section.trim(), key.trim(), value.trim(), &location)
    }

    /// Canonical echo of every resolved setting, embedded in every output
    /// artifact.
    pub fn echo_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        out.push(format!("# problem.alpha = {}", self.alpha));
        out.push(format!("# problem.n_components = {}", self.n_components));
        out.push(format!("# problem.lambda = {}", self.lambda));
        out.push(format!("# problem.truncation_R = {}", self.truncation_r));
        out.push(format!("# problem.n_nodes = {}", self.n_nodes));
        out.push(format!("# potential.theta = {}", self.theta));
        out.push(format!("# potential.epsilon = {}", self.epsilon));
        out.push(format!("# potential.a_const = {}", self.a_const));
        out.push(format!("# weight.c = {}", self.c));
        out.push(format!("# weight.l_max = {}", self.l_max));
        out.push(format!("# weight.J_lo = {}", self.j_lo));
        out.push(format!("# weight.J_hi = {}", self.j_hi));
        out.push(format!("# weight.T_end = {}", self.t_end));
        out.push(format!("# weight.ramp = {}", self.ramp));
        out.push(format!("# optimizer.multistart = {}", self.multistart));
        out.push(format!("# optimizer.max_iters = {}", self.max_iters));
        out.push(format!("# optimizer.grad_tol = {:e}", self.grad_tol));
        out.push(format!("# optimizer.fibering_tol = {:e}", self.fibering_tol));
        out.push(format!("# optimizer.step_init = {}", self.step_init));
        out.push(format!("# optimizer.step_shrink = {}", self.step_shrink));
        out.push(format!("# optimizer.armijo_c1 = {:e}", self.armijo_c1));
        out.push(format!("# optimizer.boundary_tol = {:e}", self.boundary_tol));
        let list: Vec<String> = self.lambda_list.iter().map(|l| l.to_string()).collect();
        out.push(format!("# sweep.lambda_list = {}", list.join(", ")));
        out.push(format!("# sweep.warm_start = {}", self.warm_start));
        out.push(format!("# run.seed = {}", self.seed));
        out.push(format!("# run.parallel = {}", self.parallel));
        out.push(format!("# run.c_inf_samples = {}", self.c_inf_samples));
        match self.c_inf_override {
            Some(v) => out.push(format!("# run.c_inf_override = {v}")),
            None => out.push("# run.c_inf_override = (sampled)".to_string()),
        }
        out
    }

    pub fn exec_mode(&self) -> ExecMode {
        if self.parallel {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        OptimizerOptions {
            grad_tol: self.grad_tol,
            max_iters: self.max_iters,
            step_init: self.step_init,
            step_shrink: self.step_shrink,
            armijo_c1: self.armijo_c1,
            step_min: 1e-16,
            fibering_tol: self.fibering_tol,
            fibering_max_expansions: 200,
            fibering_max_iters: 200,
            keep_log: true,
        }
    }

    /// Builds the solver configuration (hypothesis audit left on).
    pub fn problem_config(&self) -> Result<ProblemConfig, FhsError> {
        let order = FracOrder::new(self.alpha)?;
        let potential = builtin_potential(
            self.theta,
            self.epsilon,
            AmplitudeProfile::constant(self.a_const)?,
        )?;
        let weight = builtin_weight(
            self.n_components,
            self.c,
            self.l_max,
            (self.j_lo, self.j_hi),
            (0.0, self.t_end),
            self.ramp,
        )?;
        Ok(ProblemConfig {
            order,
            lambda: self.lambda,
            truncation_radius: self.truncation_r,
            n_nodes: self.n_nodes,
            n_components: self.n_components,
            potential,
            weight,
            optimizer: self.optimizer_options(),
            multistart_count: self.multistart,
            seed: self.seed,
            exec_mode: self.exec_mode(),
            boundary_tolerance: self.boundary_tol,
            skip_validation: true,
        })
    }
}
