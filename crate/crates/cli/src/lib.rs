//! Command-line front end for `galerkin-core`.
//!
//! `solve` marches a fixed mesh, `blowup` runs the adaptive blow-up
//! estimator once and `sweep` repeats it over a grid of `rho`, schemes and
//! degrees in parallel. Exit codes: 0 success, 1 solver failure,
//! 2 configuration error.

pub mod args;
pub mod blowup;
pub mod config;
pub mod error;
pub mod output;
pub mod solve;
pub mod sweep;

pub use args::{Cli, Command};
pub use blowup::cmd_blowup;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use solve::cmd_solve;
pub use sweep::{cmd_sweep, run_sweep};

/// Executes a parsed command, printing a summary; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Solve(a) => {
            let report = cmd_solve(&RunConfig::from_solve_args(a)?.resolve_solve()?)?;
            print!("{}", report.summary());
            Ok(0)
        }
        Command::Blowup(a) => {
            let report = cmd_blowup(&RunConfig::from_blowup_args(a)?.resolve_blowup()?)?;
            print!("{}", report.summary());
            Ok(0)
        }
        Command::Sweep(a) => {
            let report = cmd_sweep(&RunConfig::from_blowup_args(a)?.resolve_sweep()?)?;
            print!("{}", report.summary());
            let failed = report.failed();
            if failed > 0 {
                eprintln!(
                    "error: {failed} of {} sweep cells failed",
                    report.cells.len()
                );
                return Ok(1);
            }
            Ok(0)
        }
    }
}
