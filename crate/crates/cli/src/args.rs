use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use galerkin_core::prelude::{Scheme, StepMode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "galerkin",
    version,
    about = "cG/dG time stepping and blow-up time estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on a fixed mesh and report nodal values and errors.
    Solve(SolveArgs),
    /// Estimate the blow-up time with the adaptive step rule.
    Blowup(BlowupArgs),
    /// Blow-up estimates over a grid of rho, schemes and degrees.
    Sweep(BlowupArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: galerkin_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<StepMode, String> {
    s.parse().map_err(|e: galerkin_core::Error| e.to_string())
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Built-in problem: example54, linear, powerlaw, zero.
    #[arg(long)]
    pub problem: Option<String>,
    /// cg or dg; comma-separated list for sweeps.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme)]
    pub scheme: Vec<Scheme>,
    /// Polynomial degree r; comma-separated list for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub degree: Vec<usize>,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Rate of the linear test problem.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Coefficient of the power-law problem.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Exponent of the power-law problem.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Initial value, comma-separated components.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u0: Vec<f64>,
    #[arg(long)]
    pub fp_tol: Option<f64>,
    #[arg(long)]
    pub fp_max_iters: Option<usize>,
    /// Gauss nodes per step (default r + 4).
    #[arg(long)]
    pub quad_nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of uniform steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Length of the time interval.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BlowupArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Comma-separated rho values for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub rho_list: Vec<f64>,
    /// theoretical or empirical.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<StepMode>,
    /// Stop once k <= tau; 0 stops on saturation only.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}
