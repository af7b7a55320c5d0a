use galerkin_core::prelude::*;
use serde::Serialize;

use crate::args::Format;
use crate::config::BlowupSpec;
use crate::error::CliResult;
use crate::output::{csv_bytes, fmt_f64, json_bytes, write_file};

#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub problem: String,
    pub scheme: Scheme,
    pub degree: usize,
    pub plan: StepPlan,
    pub tau: f64,
    pub t_blowup_exact: Option<f64>,
    pub abs_error: Option<f64>,
    pub result: BlowupResult,
}

pub fn cmd_blowup(spec: &BlowupSpec) -> CliResult<BlowupReport> {
    let result = blowup_run(
        &spec.problem,
        &spec.growth,
        &spec.plan,
        spec.scheme,
        spec.degree,
        &spec.solver,
        spec.tau,
    )?;
    let exact = spec.problem.t_blowup_exact;
    let report = BlowupReport {
        problem: spec.problem.name.clone(),
        scheme: spec.scheme,
        degree: spec.degree,
        plan: spec.plan,
        tau: spec.tau,
        t_blowup_exact: exact,
        abs_error: exact.map(|t| (result.t_infinity_estimate - t).abs()),
        result,
    };
    if let Some(path) = &spec.output.path {
        let bytes = match spec.output.format {
            Format::Csv => report.to_csv()?,
            Format::Json => json_bytes(&report)?,
        };
        write_file(path, &bytes)?;
    }
    Ok(report)
}

impl BlowupReport {
    /// Columns `m, t_m, k_m, norm`; `k_0` is empty.
    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let nodes = self.result.nodes();
        let rows: Vec<Vec<String>> = self
            .result
            .norms
            .iter()
            .enumerate()
            .map(|(m, &norm)| {
                let k = if m == 0 {
                    String::new()
                } else {
                    fmt_f64(self.result.step_sizes[m - 1])
                };
                vec![m.to_string(), fmt_f64(nodes[m]), k, fmt_f64(norm)]
            })
            .collect();
        csv_bytes(&["m", "t_m", "k_m", "norm"], &rows)
    }

    pub fn summary(&self) -> String {
        let r = &self.result;
        let mut s = format!(
            "{} {} r={} {} rho={}\n  T_estimate = {:.16e}\n  steps = {}\n  stopped by {}\n",
            self.problem,
            self.scheme,
            self.degree,
            self.plan.mode,
            self.plan.rho,
            r.t_infinity_estimate,
            r.steps,
            r.stopped_by
        );
        if let (Some(t), Some(e)) = (self.t_blowup_exact, self.abs_error) {
            s += &format!("  exact {t:.16e}, |error| = {e:.3e}\n");
        }
        s += &format!(
            "  continuous upper bound {:.6e}\n",
            r.diagnostics.upper_bound_continuous
        );
        if let Some(d) = &r.diagnostics.discrete {
            s += &format!(
                "  C0 = {:.6e}, C1 = {:.6e}, discrete upper bound {:.6e}\n  growth violations {}, ball violations {}\n",
                d.c0, d.c1, d.discrete_upper_bound, r.growth_violations, r.ball_violations
            );
        }
        s
    }
}
