use galerkin_core::prelude::*;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::Format;
use crate::config::SweepSpec;
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, fmt_f64, json_bytes, sibling, write_file};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellOutcome {
    pub steps: usize,
    pub t_estimate: f64,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub rho: f64,
    pub scheme: Scheme,
    pub degree: usize,
    pub outcome: std::result::Result<CellOutcome, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slope {
    pub scheme: Scheme,
    pub degree: usize,
    pub points: usize,
    /// `None` when fewer than two distinct rho have a positive error.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub problem: String,
    pub mode: StepMode,
    pub cells: Vec<Cell>,
    pub slopes: Vec<Slope>,
}

fn run_cell(spec: &SweepSpec, rho: f64, scheme: Scheme, degree: usize) -> Cell {
    let plan = StepPlan::new(rho, spec.mode, scheme, spec.rho_0);
    let outcome = blowup_run(
        &spec.problem,
        &spec.growth,
        &plan,
        scheme,
        degree,
        &spec.solver,
        spec.tau,
    )
    .map(|r| CellOutcome {
        steps: r.steps,
        t_estimate: r.t_infinity_estimate,
        abs_error: spec
            .problem
            .t_blowup_exact
            .map(|t| (r.t_infinity_estimate - t).abs()),
    })
    .map_err(|e| e.to_string());
    if let Err(msg) = &outcome {
        log::warn!("sweep cell rho={rho} {scheme} r={degree} failed: {msg}");
    }
    Cell {
        rho,
        scheme,
        degree,
        outcome,
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

pub fn run_sweep(spec: &SweepSpec) -> CliResult<SweepReport> {
    let grid: Vec<(f64, Scheme, usize)> = spec
        .rhos
        .iter()
        .flat_map(|&rho| {
            spec.schemes
                .iter()
                .flat_map(move |&s| spec.degrees.iter().map(move |&r| (rho, s, r)))
        })
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))?;
    let cells: Vec<Cell> = pool.install(|| {
        grid.par_iter()
            .map(|&(rho, s, r)| run_cell(spec, rho, s, r))
            .collect()
    });
    let mut slopes = Vec::new();
    for &scheme in &spec.schemes {
        for &degree in &spec.degrees {
            let points: Vec<(f64, f64)> = cells
                .iter()
                .filter(|c| c.scheme == scheme && c.degree == degree)
                .filter_map(|c| match &c.outcome {
                    &Ok(CellOutcome {
                        abs_error: Some(e), ..
                    }) => Some((c.rho, e)),
                    _ => None,
                })
                .collect();
            slopes.push(Slope {
                scheme,
                degree,
                points: points.len(),
                slope: log_log_slope(&points),
            });
        }
    }
    Ok(SweepReport {
        problem: spec.problem.name.clone(),
        mode: spec.mode,
        cells,
        slopes,
    })
}

/// Runs the sweep and writes its artifacts; failed cells are kept and marked.
pub fn cmd_sweep(spec: &SweepSpec) -> CliResult<SweepReport> {
    let report = run_sweep(spec)?;
    if let Some(path) = &spec.output.path {
        match spec.output.format {
            Format::Csv => {
                write_file(path, &report.cells_csv()?)?;
                write_file(&sibling(path, "slopes"), &report.slopes_csv()?)?;
            }
            Format::Json => write_file(path, &json_bytes(&report)?)?,
        }
    }
    Ok(report)
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), fmt_f64)
}

impl SweepReport {
    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    /// Columns `rho, scheme, degree, steps, T_estimate, abs_error, status`.
    pub fn cells_csv(&self) -> CliResult<Vec<u8>> {
        let rows: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|c| {
                let mut row = vec![fmt_f64(c.rho), c.scheme.to_string(), c.degree.to_string()];
                match &c.outcome {
                    Ok(o) => row.extend([
                        o.steps.to_string(),
                        fmt_f64(o.t_estimate),
                        opt(o.abs_error),
                        "ok".into(),
                    ]),
                    Err(msg) => row.extend([
                        String::new(),
                        String::new(),
                        String::new(),
                        format!("failed: {msg}"),
                    ]),
                }
                row
            })
            .collect();
        csv_bytes(
            &[
                "rho",
                "scheme",
                "degree",
                "steps",
                "T_estimate",
                "abs_error",
                "status",
            ],
            &rows,
        )
    }

    /// Columns `scheme, degree, points, slope`; the slope reads `undefined`
    /// when it cannot be fitted.
    pub fn slopes_csv(&self) -> CliResult<Vec<u8>> {
        let rows: Vec<Vec<String>> = self
            .slopes
            .iter()
            .map(|s| {
                vec![
                    s.scheme.to_string(),
                    s.degree.to_string(),
                    s.points.to_string(),
                    s.slope.map_or("undefined".into(), fmt_f64),
                ]
            })
            .collect();
        csv_bytes(&["scheme", "degree", "points", "slope"], &rows)
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {} sweep, {} cells\n",
            self.problem,
            self.mode,
            self.cells.len()
        );
        s += &format!(
            "  {:>10}  {:>6}  {:>3}  {:>8}  {:>22}  {:>10}\n",
            "rho", "scheme", "r", "steps", "T_estimate", "abs_error"
        );
        for c in &self.cells {
            match &c.outcome {
                Ok(o) => {
                    s += &format!(
                        "  {:>10.6}  {:>6}  {:>3}  {:>8}  {:>22.16}  {:>10}\n",
                        c.rho,
                        c.scheme,
                        c.degree,
                        o.steps,
                        o.t_estimate,
                        o.abs_error.map_or("-".into(), |e| format!("{e:.3e}"))
                    )
                }
                Err(msg) => {
                    s += &format!(
                        "  {:>10.6}  {:>6}  {:>3}  FAILED: {msg}\n",
                        c.rho, c.scheme, c.degree
                    )
                }
            }
        }
        for sl in &self.slopes {
            s += &format!(
                "  slope {} r={}: {} ({} points)\n",
                sl.scheme,
                sl.degree,
                sl.slope.map_or("undefined".into(), |x| format!("{x:.4}")),
                sl.points
            );
        }
        s
    }
}
