use galerkin_core::prelude::*;
use galerkin_core::stepping::TrajectoryRecord;
use serde::Serialize;

use crate::args::Format;
use crate::config::SolveSpec;
use crate::error::CliResult;
use crate::output::{csv_bytes, fmt_f64, json_bytes, write_file};

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub problem: String,
    pub scheme: Scheme,
    pub degree: usize,
    pub nodes: Vec<f64>,
    /// `u0, U_1^-, ..., U_M^-`.
    pub nodal_values: Vec<Vec<f64>>,
    /// `|U_m^- - u(t_m)|` when the exact solution is known.
    pub nodal_errors: Option<Vec<f64>>,
    /// Max error over `4(r + 2) + 1` samples per interval.
    pub linf_error_estimate: Option<f64>,
    pub picard_iterations: usize,
    pub trajectory: TrajectoryRecord,
}

pub fn cmd_solve(spec: &SolveSpec) -> CliResult<SolveReport> {
    let degrees = vec![spec.degree; spec.nodes.len().saturating_sub(1)];
    let traj = solve_mesh(
        &spec.problem,
        &spec.nodes,
        &degrees,
        spec.scheme,
        &spec.solver,
    )?;
    let nodal = traj.nodal_values();
    let (nodal_errors, linf) = match &spec.problem.exact {
        Some(exact) => {
            let errs = nodal
                .iter()
                .zip(&spec.nodes)
                .map(|(u, &t)| (u - exact(t)).norm())
                .collect();
            let samples = 4 * (spec.degree + 2) + 1;
            let linf = traj
                .sampled(samples)
                .iter()
                .map(|(_, t, u)| (u - exact(*t)).norm())
                .fold(0.0, f64::max);
            (Some(errs), Some(linf))
        }
        None => (None, None),
    };
    let report = SolveReport {
        problem: spec.problem.name.clone(),
        scheme: spec.scheme,
        degree: spec.degree,
        nodes: spec.nodes.clone(),
        nodal_values: nodal.iter().map(|v| v.iter().copied().collect()).collect(),
        nodal_errors,
        linf_error_estimate: linf,
        picard_iterations: traj.pieces.iter().map(|p| p.iterations).sum(),
        trajectory: traj.to_record(),
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

impl SolveReport {
    /// Columns `m, t, u_0, ..., u_{N-1}, error`.
    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let dim = self.nodal_values.first().map_or(0, Vec::len);
        let names: Vec<String> = (0..dim).map(|i| format!("u_{i}")).collect();
        let mut header = vec!["m", "t"];
        header.extend(names.iter().map(String::as_str));
        header.push("error");
        let rows: Vec<Vec<String>> = self
            .nodal_values
            .iter()
            .enumerate()
            .map(|(m, u)| {
                let mut row = vec![m.to_string(), fmt_f64(self.nodes[m])];
                row.extend(u.iter().map(|&x| fmt_f64(x)));
                row.push(
                    self.nodal_errors
                        .as_ref()
                        .map_or(String::new(), |e| fmt_f64(e[m])),
                );
                row
            })
            .collect();
        csv_bytes(&header, &rows)
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {} r={} on {} intervals, {} Picard iterations\n",
            self.problem,
            self.scheme,
            self.degree,
            self.nodes.len() - 1,
            self.picard_iterations
        );
        for (m, u) in self.nodal_values.iter().enumerate() {
            let values: Vec<String> = u.iter().map(|x| format!("{x:.12e}")).collect();
            s += &format!(
                "  t_{m} = {:.6}  U = [{}]",
                self.nodes[m],
                values.join(", ")
            );
            if let Some(e) = &self.nodal_errors {
                s += &format!("  error = {:.3e}", e[m]);
            }
            s.push('\n');
        }
        if let Some(linf) = self.linf_error_estimate {
            s += &format!("  sampled L-inf error: {linf:.3e}\n");
        }
        s
    }
}
