//! Output artifacts: report documents, nodal profiles, sweep tables, and
//! iteration logs. Every file begins with the resolved configuration so a
//! run can be reproduced from any artifact (the seed included). Numbers
//! are written with fixed formatting, so identical runs produce identical
//! bytes.

use fhs_core::concentration::SweepReport;
use fhs_core::nehari::IterationRecord;
use fhs_core::solver::GroundState;
use std::fmt::Write as _;
use std::path::Path;

use crate::settings::Settings;

pub fn header(title: &str, settings: &Settings) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {title}");
    for line in settings.echo_lines() {
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn ground_state_report(title: &str, settings: &Settings, gs: &GroundState) -> String {
    let mut out = header(title, settings);
    let _ = writeln!(out, "energy = {:.12e}", gs.energy);
    let _ = writeln!(out, "gradient_norm = {:.12e}", gs.gradient_norm);
    let _ = writeln!(out, "nehari_residual = {:.12e}", gs.nehari_residual);
    let _ = writeln!(out, "x_norm = {:.12e}", gs.x_norm);
    let _ = writeln!(out, "boundary_magnitude = {:.12e}", gs.boundary_magnitude);
    let _ = writeln!(out, "multistart_spread = {:.12e}", gs.multistart_spread);
    let _ = writeln!(out, "converged_runs = {}", gs.converged_runs);
    let _ = writeln!(out, "total_runs = {}", gs.total_runs);
    let _ = writeln!(out, "iterations = {}", gs.iterations);
    if let Some(checks) = &gs.core_checks {
        let _ = writeln!(out, "core_l2 = {:.12e}", checks.l2);
        let _ = writeln!(out, "core_frac_deriv_l2 = {:.12e}", checks.frac_deriv_l2);
        let _ = writeln!(out, "core_sup = {:.12e}", checks.sup);
        let _ = writeln!(out, "poincare_bound = {:.12e}", checks.poincare_bound);
        let _ = writeln!(out, "poincare_ok = {}", checks.poincare_ok);
        let _ = writeln!(out, "sup_bound = {:.12e}", checks.sup_bound);
        let _ = writeln!(out, "sup_ok = {}", checks.sup_ok);
    }
    for w in &gs.warnings {
        let _ = writeln!(out, "warning = {w}");
    }
    out
}

/// Nodal profile: one row per node, `t` followed by the components.
pub fn profile(settings: &Settings, u: &fhs_core::GridFunction) -> String {
    let mut out = header("fhs nodal profile", settings);
    let _ = writeln!(out, "# columns: t u_0 .. u_{}", u.n_components() - 1);
    for (i, t) in u.grid().nodes().enumerate() {
        let _ = write!(out, "{t:.12e}");
        for v in u.node_value(i) {
            let _ = write!(out, " {v:.12e}");
        }
        let _ = writeln!(out);
    }
    out
}

pub fn iteration_log(settings: &Settings, log: &[IterationRecord]) -> String {
    let mut out = header("fhs iteration log", settings);
    let _ = writeln!(out, "# columns: iteration phi grad_phi_norm step");
    for rec in log {
        let _ = writeln!(
            out,
            "{} {:.12e} {:.3e} {:.3e}",
            rec.iteration, rec.phi, rec.grad_phi_norm, rec.step
        );
    }
    out
}

/// The sweep table with its fixed header row.
pub fn sweep_csv(settings: &Settings, report: &SweepReport) -> String {
    let mut out = header("fhs sweep table", settings);
    let _ = writeln!(out, "{}", SweepReport::CSV_HEADER);
    for row in report.csv_rows() {
        let _ = writeln!(out, "{row}");
    }
    out
}

pub fn sweep_summary(settings: &Settings, report: &SweepReport) -> String {
    let mut out = header("fhs sweep summary", settings);
    let _ = writeln!(out, "c_tilde = {:.12e}", report.c_tilde);
    let _ = writeln!(out, "energy_cap = {:.12e}", report.energy_cap);
    let _ = writeln!(
        out,
        "c_lambda_nondecreasing = {}",
        report.c_lambda_nondecreasing
    );
    let _ = writeln!(
        out,
        "tail_strictly_decreasing = {}",
        report.tail_strictly_decreasing
    );
    let _ = writeln!(
        out,
        "distance_nonincreasing = {}",
        report.distance_nonincreasing
    );
    let _ = writeln!(out, "incomplete = {}", report.incomplete);
    if let Some(f) = &report.failure {
        let _ = writeln!(out, "failure = {f}");
    }
    for r in &report.records {
        let _ = writeln!(
            out,
            "lambda = {:.6e}: c_lambda = {:.12e}, weighted_mass = {:.6e} (bound {:.6e}), \
             gradient_norm = {:.3e}, spread = {:.3e}",
            r.lambda,
            r.c_lambda,
            r.weighted_mass,
            r.weighted_mass_bound,
            r.gradient_norm,
            r.multistart_spread
        );
    }
    out
}

pub fn write(dir: &Path, name: &str, content: &str) -> std::io::Result<()> {
    std::fs::write(dir.join(name), content)
}
