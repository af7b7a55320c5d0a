//! TOML run configuration, flag overrides and resolution into run specs.
//!
//! ```toml
//! problem = "example54"
//! scheme = ["cg", "dg"]
//! degree = [0, 1]
//! format = "csv"
//!
//! [solver]
//! fp_tolerance = 1e-12
//!
//! [blowup]
//! mode = "empirical"
//! rho_list = [0.25, 0.125]
//! ```

use std::path::{Path, PathBuf};

use galerkin_core::blowup::{default_rho_0, rho_max};
use galerkin_core::prelude::*;
use galerkin_core::problems::{by_name, ProblemParams};
use serde::{Deserialize, Serialize};

use crate::args::{BlowupArgs, CommonArgs, Format, SolveArgs};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub u0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub steps: Option<usize>,
    pub horizon: Option<f64>,
    pub t0: Option<f64>,
    /// Explicit nodes; excludes `steps`, `horizon` and `t0`.
    pub nodes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub fp_tolerance: Option<f64>,
    pub fp_max_iters: Option<usize>,
    pub quad_nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSection {
    pub mode: Option<StepMode>,
    pub rho: Option<f64>,
    pub rho_list: Option<Vec<f64>>,
    pub tau: Option<f64>,
    pub rho0: Option<f64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub scheme: Option<OneOrMany<Scheme>>,
    pub degree: Option<OneOrMany<usize>>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub blowup: BlowupSection,
    /// Replaces the problem's built-in growth constants.
    pub growth: Option<GrowthParams>,
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn pick_vec<T>(flag: Vec<T>, file: Option<Vec<T>>) -> Option<Vec<T>> {
    if flag.is_empty() {
        file
    } else {
        Some(flag)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn base(common: &CommonArgs) -> CliResult<Self> {
        match &common.config {
            Some(path) => Self::load(path),
            None => Ok(Self::default()),
        }
    }

    fn overlay_common(mut self, c: &CommonArgs) -> Self {
        self.problem = pick(c.problem.clone(), self.problem);
        if !c.scheme.is_empty() {
            self.scheme = Some(OneOrMany::Many(c.scheme.clone()));
        }
        if !c.degree.is_empty() {
            self.degree = Some(OneOrMany::Many(c.degree.clone()));
        }
        self.out = pick(c.out.clone(), self.out);
        self.format = pick(c.format, self.format);
        self.params.lambda = pick(c.lambda, self.params.lambda);
        self.params.alpha = pick(c.alpha, self.params.alpha);
        self.params.beta = pick(c.beta, self.params.beta);
        self.params.u0 = pick_vec(c.u0.clone(), self.params.u0);
        self.solver.fp_tolerance = pick(c.fp_tol, self.solver.fp_tolerance);
        self.solver.fp_max_iters = pick(c.fp_max_iters, self.solver.fp_max_iters);
        self.solver.quad_nodes = pick(c.quad_nodes, self.solver.quad_nodes);
        self
    }

    /// Config file (if any) overridden by the solve flags.
    pub fn from_solve_args(a: &SolveArgs) -> CliResult<Self> {
        let mut cfg = Self::base(&a.common)?.overlay_common(&a.common);
        cfg.mesh.steps = pick(a.steps, cfg.mesh.steps);
        cfg.mesh.horizon = pick(a.horizon, cfg.mesh.horizon);
        cfg.mesh.t0 = pick(a.t0, cfg.mesh.t0);
        Ok(cfg)
    }

    /// Config file (if any) overridden by the blow-up/sweep flags.
    pub fn from_blowup_args(a: &BlowupArgs) -> CliResult<Self> {
        let mut cfg = Self::base(&a.common)?.overlay_common(&a.common);
        let b = &mut cfg.blowup;
        b.mode = pick(a.mode, b.mode);
        b.rho = pick(a.rho, b.rho);
        b.rho_list = pick_vec(a.rho_list.clone(), b.rho_list.take());
        b.tau = pick(a.tau, b.tau);
        b.rho0 = pick(a.rho0, b.rho0);
        b.threads = pick(a.threads, b.threads);
        Ok(cfg)
    }

    fn problem(&self) -> CliResult<Problem> {
        let name = self
            .problem
            .as_deref()
            .ok_or_else(|| CliError::Config("no problem given (use --problem)".into()))?;
        let params = ProblemParams {
            lambda: self.params.lambda,
            alpha: self.params.alpha,
            beta: self.params.beta,
            u0: self.params.u0.clone(),
        };
        let mut problem = by_name(name, &params)?;
        if let Some(g) = self.growth {
            g.validate()?;
            problem.growth = Some(g);
        }
        Ok(problem)
    }

    fn solver(&self) -> CliResult<SolverConfig> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            fp_tolerance: self.solver.fp_tolerance.unwrap_or(d.fp_tolerance),
            fp_max_iters: self.solver.fp_max_iters.unwrap_or(d.fp_max_iters),
            quad_nodes: self.solver.quad_nodes,
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn schemes(&self) -> Vec<Scheme> {
        self.scheme
            .as_ref()
            .map(OneOrMany::to_vec)
            .unwrap_or_else(|| vec![Scheme::Cg])
    }

    fn degrees(&self) -> Vec<usize> {
        self.degree
            .as_ref()
            .map(OneOrMany::to_vec)
            .unwrap_or_else(|| vec![0])
    }

    fn single<T: Copy + std::fmt::Display>(what: &str, values: &[T]) -> CliResult<T> {
        match values {
            [x] => Ok(*x),
            _ => Err(CliError::Config(format!(
                "expected exactly one {what}, got {}",
                values
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ))),
        }
    }

    fn output(&self) -> Output {
        Output {
            path: self.out.clone(),
            format: self.format.unwrap_or(Format::Csv),
        }
    }

    fn nodes(&self) -> CliResult<Vec<f64>> {
        let m = &self.mesh;
        if let Some(nodes) = &m.nodes {
            if m.steps.is_some() || m.horizon.is_some() || m.t0.is_some() {
                return Err(CliError::Config(
                    "mesh nodes cannot be combined with steps, horizon or t0".into(),
                ));
            }
            return Ok(nodes.clone());
        }
        let steps = m
            .steps
            .ok_or_else(|| CliError::Config("no mesh given (use --steps and --horizon)".into()))?;
        let horizon = m.horizon.unwrap_or(1.0);
        if steps == 0 || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(CliError::Config(format!(
                "mesh needs steps >= 1 and a positive horizon, got {steps} and {horizon}"
            )));
        }
        Ok(galerkin_core::stepping::uniform_nodes(
            m.t0.unwrap_or(0.0),
            horizon,
            steps,
        ))
    }

    pub fn resolve_solve(&self) -> CliResult<SolveSpec> {
        let problem = self.problem()?;
        Ok(SolveSpec {
            scheme: Self::single("scheme", &self.schemes())?,
            degree: Self::single("degree", &self.degrees())?,
            nodes: self.nodes()?,
            solver: self.solver()?,
            output: self.output(),
            problem,
        })
    }

    fn blowup_common(&self) -> CliResult<(Problem, GrowthParams, StepMode, f64, f64)> {
        let problem = self.problem()?;
        let mode = self.blowup.mode.unwrap_or(StepMode::Empirical);
        let growth = problem.growth.ok_or_else(|| {
            CliError::Config(format!(
                "problem '{}' has no growth constants; add a [growth] section",
                problem.name
            ))
        })?;
        let rho_0 = match self.blowup.rho0 {
            Some(r) => r,
            None => default_rho_0(&growth)?,
        };
        let tau = self.blowup.tau.unwrap_or(0.0);
        if tau.is_nan() || tau < 0.0 {
            return Err(CliError::Config(format!(
                "tau must be nonnegative, got {tau}"
            )));
        }
        Ok((problem, growth, mode, rho_0, tau))
    }

    pub fn resolve_blowup(&self) -> CliResult<BlowupSpec> {
        let (problem, growth, mode, rho_0, tau) = self.blowup_common()?;
        if self.blowup.rho_list.is_some() {
            return Err(CliError::Config("rho_list is for sweeps; use rho".into()));
        }
        let rho = match (self.blowup.rho, mode) {
            (Some(r), _) => r,
            (None, StepMode::Theoretical) => 0.5 * rho_max(&growth, problem.u0.norm(), rho_0)?,
            (None, StepMode::Empirical) => {
                return Err(CliError::Config("empirical mode needs --rho".into()))
            }
        };
        let scheme = Self::single("scheme", &self.schemes())?;
        let plan = StepPlan::new(rho, mode, scheme, rho_0);
        plan.validate(&growth, problem.u0.norm())?;
        Ok(BlowupSpec {
            scheme,
            degree: Self::single("degree", &self.degrees())?,
            plan,
            tau,
            solver: self.solver()?,
            output: self.output(),
            growth,
            problem,
        })
    }

    pub fn resolve_sweep(&self) -> CliResult<SweepSpec> {
        let (problem, growth, mode, rho_0, tau) = self.blowup_common()?;
        let rhos = match (&self.blowup.rho_list, self.blowup.rho) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either rho or rho_list, not both".into(),
                ))
            }
            (Some(list), None) => list.clone(),
            (None, Some(r)) => vec![r],
            (None, None) => default_rho_list(),
        };
        let schemes = self.schemes();
        let degrees = self.degrees();
        if rhos.is_empty() || schemes.is_empty() || degrees.is_empty() {
            return Err(CliError::Config(
                "sweep needs nonempty rho, scheme and degree lists".into(),
            ));
        }
        for &rho in &rhos {
            for &s in &schemes {
                StepPlan::new(rho, mode, s, rho_0).validate(&growth, problem.u0.norm())?;
            }
        }
        if self.blowup.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(SweepSpec {
            rhos,
            schemes,
            degrees,
            mode,
            rho_0,
            tau,
            threads: self.blowup.threads,
            solver: self.solver()?,
            output: self.output(),
            growth,
            problem,
        })
    }
}

/// `2^{-p/2}` for `p = 4..=10`.
pub fn default_rho_list() -> Vec<f64> {
    (4..=10).map(|p| 2f64.powf(-(p as f64) / 2.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone)]
pub struct SolveSpec {
    pub problem: Problem,
    pub scheme: Scheme,
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub solver: SolverConfig,
    pub output: Output,
}

#[derive(Debug, Clone)]
pub struct BlowupSpec {
    pub problem: Problem,
    pub growth: GrowthParams,
    pub scheme: Scheme,
    pub degree: usize,
    pub plan: StepPlan,
    pub tau: f64,
    pub solver: SolverConfig,
    pub output: Output,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub problem: Problem,
    pub growth: GrowthParams,
    pub rhos: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub degrees: Vec<usize>,
    pub mode: StepMode,
    pub rho_0: f64,
    pub tau: f64,
    pub threads: Option<usize>,
    pub solver: SolverConfig,
    pub output: Output,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let cfg = RunConfig::from_toml(
            r#"
            problem = "linear"
            scheme = "dg"
            degree = [2]
            format = "json"
            [params]
            lambda = -2.0
            [mesh]
            steps = 5
            horizon = 0.5
            [solver]
            fp_tolerance = 1e-13
            "#,
        )
        .unwrap();
        let spec = cfg.resolve_solve().unwrap();
        assert_eq!(spec.scheme, Scheme::Dg);
        assert_eq!(spec.degree, 2);
        assert_eq!(spec.nodes.len(), 6);
        assert_eq!(spec.solver.fp_tolerance, 1e-13);
        assert_eq!(spec.output.format, Format::Json);
        assert_eq!(spec.problem.rhs(0.0, &Vector::from_vec(vec![1.0]))[0], -2.0);
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_toml("problem = \"linear\"\nscheme = \"dg\"\n[mesh]\nsteps = 3")
            .unwrap();
        let args = SolveArgs {
            common: CommonArgs {
                scheme: vec![Scheme::Cg],
                ..Default::default()
            },
            steps: Some(7),
            ..Default::default()
        };
        let merged = file.overlay_common(&args.common);
        assert_eq!(merged.schemes(), vec![Scheme::Cg]);
        assert_eq!(merged.problem.as_deref(), Some("linear"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            RunConfig::from_toml("problme = \"x\""),
            Err(CliError::Config(_))
        ));
        assert!(RunConfig::from_toml("scheme = \"fem\"").is_err());
        let cfg = RunConfig::from_toml("problem = \"nope\"\n[mesh]\nsteps = 2").unwrap();
        assert!(matches!(cfg.resolve_solve(), Err(CliError::Config(_))));
    }

    #[test]
    fn mesh_conflicts() {
        let cfg =
            RunConfig::from_toml("problem = \"linear\"\n[mesh]\nsteps = 2\nnodes = [0.0, 1.0]")
                .unwrap();
        assert!(cfg.resolve_solve().is_err());
        let cfg = RunConfig::from_toml("problem = \"linear\"").unwrap();
        assert!(cfg.resolve_solve().is_err());
    }

    #[test]
    fn blowup_resolution() {
        let cfg = RunConfig::from_toml("problem = \"example54\"\n[blowup]\nmode = \"theoretical\"")
            .unwrap();
        let spec = cfg.resolve_blowup().unwrap();
        let g = spec.growth;
        let rho_0 = default_rho_0(&g).unwrap();
        assert_eq!(spec.plan.rho, 0.5 * rho_max(&g, 3.0, rho_0).unwrap());
        assert_eq!(spec.tau, 0.0);

        let cfg = RunConfig::from_toml(
            "problem = \"example54\"\n[blowup]\nmode = \"theoretical\"\nrho = 0.3",
        )
        .unwrap();
        let err = cfg.resolve_blowup().unwrap_err();
        assert_eq!(err.exit_code(), 2);

        let cfg = RunConfig::from_toml("problem = \"linear\"\n[blowup]\nrho = 0.1").unwrap();
        assert!(cfg
            .resolve_blowup()
            .unwrap_err()
            .to_string()
            .contains("growth"));
    }

    #[test]
    fn sweep_defaults() {
        let cfg = RunConfig::from_toml(
            "problem = \"example54\"\nscheme = [\"cg\", \"dg\"]\ndegree = [0, 1]",
        )
        .unwrap();
        let spec = cfg.resolve_sweep().unwrap();
        assert_eq!(spec.rhos.len(), 7);
        assert_eq!(spec.rhos[0], 0.25);
        assert_eq!(spec.mode, StepMode::Empirical);
        let both =
            RunConfig::from_toml("problem = \"example54\"\n[blowup]\nrho = 0.1\nrho_list = [0.2]")
                .unwrap();
        assert!(both.resolve_sweep().is_err());
    }
}
