//! Blow-up time estimation for right-hand sides of algebraic growth.
//!
//! Growth class (for `|u| >= c_F`):
//!
//! ```text
//! |F(t, u)| <= alpha |u|^beta,      (F(t, u), u) >= delta |u|^{1 + beta},
//! |F(t, u) - F(t, v)| <= gamma max(|u|, |v|)^{beta - 1} |u - v|.
//! ```
//!
//! The step rule `k_m = c^{-1} gamma^{-beta} rho (gamma - rho alpha)^{beta-1}
//! |U_{m-1}^-|^{1-beta}` keeps every local problem uniquely solvable and
//! makes the discrete norms grow geometrically, so that the accumulated
//! time `sum k_m` converges to a discrete blow-up time.

use serde::{Deserialize, Serialize};

use crate::legendre::IntervalMap;
use crate::problems::Problem;
use crate::stepping::{step, Scheme, SolverConfig};
use crate::{Error, Result};

/// Hard cap on the number of marching steps of one run.
pub const MAX_BLOWUP_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    /// Norm threshold above which the growth bounds hold.
    pub c_f: f64,
    /// Constant of the local Lipschitz bound.
    pub gamma: f64,
    /// Lipschitz constant on the ball `|u| <= c_F`.
    pub l_cf: f64,
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.alpha, self.beta, self.delta, self.c_f, self.gamma, self.l_cf,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "growth parameters must be finite: {self:?}"
            )));
        }
        if !(self.alpha > 0.0 && self.delta > 0.0) {
            return Err(Error::InvalidInput(
                "growth parameters need alpha > 0 and delta > 0".into(),
            ));
        }
        if !(self.beta > 1.0) {
            return Err(Error::InvalidInput(format!(
                "growth exponent beta must exceed 1, got {}",
                self.beta
            )));
        }
        if self.c_f < 0.0 || self.gamma < 0.0 || self.l_cf < 0.0 {
            return Err(Error::InvalidInput(
                "c_F, gamma and L_cF must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Right end `gamma / alpha` of the domain of [`psi`].
    pub fn rho_limit(&self) -> f64 {
        self.gamma / self.alpha
    }
}

/// `Psi(rho) = (delta (gamma - rho alpha)^beta - rho alpha gamma^beta) / (gamma - rho alpha)`
/// on `[0, gamma / alpha)`. Strictly decreasing from `delta gamma^{beta-1}`
/// to `-inf`.
pub fn psi(rho: f64, p: &GrowthParams) -> Result<f64> {
    if !(p.gamma > 0.0) {
        return Err(Error::InvalidInput("psi needs gamma > 0".into()));
    }
    if !(rho >= 0.0 && rho < p.rho_limit()) {
        return Err(Error::InvalidInput(format!(
            "psi is defined on [0, {}), got rho = {rho}",
            p.rho_limit()
        )));
    }
    let gap = p.gamma - rho * p.alpha;
    Ok((p.delta * gap.powf(p.beta) - rho * p.alpha * p.gamma.powf(p.beta)) / gap)
}

/// Unique zero of [`psi`], by bisection on `[0, (gamma/alpha)(1 - 1e-9)]`.
pub fn psi_root(p: &GrowthParams) -> Result<f64> {
    p.validate()?;
    let mut lo = 0.0;
    let mut hi = p.rho_limit() * (1.0 - 1e-9);
    if psi(hi, p)? > 0.0 {
        return Err(Error::InvalidInput(
            "psi does not change sign on its bisection bracket".into(),
        ));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if psi(mid, p)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_initial_norm(p: &GrowthParams, u0_norm: f64) -> Result<()> {
    if !(u0_norm > p.c_f) {
        return Err(Error::HypothesisViolation(format!(
            "initial norm {u0_norm} must exceed c_F = {}",
            p.c_f
        )));
    }
    Ok(())
}

fn check_rho_0(p: &GrowthParams, rho_0: f64) -> Result<f64> {
    let root = psi_root(p)?;
    let cap = root.min(1.0);
    if !(rho_0 > 0.0 && rho_0 < cap) {
        return Err(Error::InvalidInput(format!(
            "rho_0 must lie in (0, min(1, rho_bar)) = (0, {cap}), got {rho_0}"
        )));
    }
    Ok(root)
}

/// Largest admissible `rho`:
/// `min(rho_0, alpha^{-1} gamma / (1 + (1 - c_F/|u0|)^{-1}))`.
pub fn rho_max(p: &GrowthParams, u0_norm: f64, rho_0: f64) -> Result<f64> {
    p.validate()?;
    check_initial_norm(p, u0_norm)?;
    check_rho_0(p, rho_0)?;
    let second = p.gamma / p.alpha / (1.0 + 1.0 / (1.0 - p.c_f / u0_norm));
    Ok(rho_0.min(second))
}

/// Default `rho_0 = min(1, rho_bar) / 2`.
pub fn default_rho_0(p: &GrowthParams) -> Result<f64> {
    Ok(0.5 * psi_root(p)?.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepMode {
    /// The provably safe rule with the scheme constant `c`.
    Theoretical,
    /// `k = rho |U|^{1 - beta}` with free `rho`.
    Empirical,
}

impl std::str::FromStr for StepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theoretical" => Ok(StepMode::Theoretical),
            "empirical" => Ok(StepMode::Empirical),
            other => Err(Error::InvalidInput(format!(
                "unknown step mode '{other}' (expected theoretical or empirical)"
            ))),
        }
    }
}

impl std::fmt::Display for StepMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StepMode::Theoretical => "theoretical",
            StepMode::Empirical => "empirical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub rho: f64,
    pub mode: StepMode,
    /// 1 for cG, `C_CHI` for dG.
    pub c: f64,
    pub rho_0: f64,
}

impl StepPlan {
    pub fn new(rho: f64, mode: StepMode, scheme: Scheme, rho_0: f64) -> Self {
        Self {
            rho,
            mode,
            c: scheme.constant(),
            rho_0,
        }
    }

    /// `eta = rho alpha / (gamma - rho alpha)`.
    pub fn eta(&self, p: &GrowthParams) -> f64 {
        self.rho * p.alpha / (p.gamma - self.rho * p.alpha)
    }

    /// Ball radius `kappa = eta |U_{m-1}^-|` guaranteeing unique local solutions.
    pub fn kappa(&self, p: &GrowthParams, norm: f64) -> f64 {
        self.eta(p) * norm
    }

    /// Checks `rho` against the mode's constraints for a given `|u0|`.
    pub fn validate(&self, p: &GrowthParams, u0_norm: f64) -> Result<()> {
        p.validate()?;
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        if self.mode == StepMode::Theoretical {
            let max = rho_max(p, u0_norm, self.rho_0)?;
            if self.rho > max {
                return Err(Error::InvalidInput(format!(
                    "rho = {} exceeds the admissible bound min(rho_0, alpha^-1 gamma / (1 + (1 - c_F/|u0|)^-1)) = {max}",
                    self.rho
                )));
            }
        }
        Ok(())
    }
}

/// Next step length from `|U_{m-1}^-|`.
pub fn step_size(plan: &StepPlan, p: &GrowthParams, prev_norm: f64) -> Result<f64> {
    if !(prev_norm > 0.0) {
        return Err(Error::InvalidInput(format!(
            "step rule undefined for norm {prev_norm}"
        )));
    }
    let scale = prev_norm.powf(1.0 - p.beta);
    match plan.mode {
        StepMode::Empirical => Ok(plan.rho * scale),
        StepMode::Theoretical => {
            let gap = p.gamma - plan.rho * p.alpha;
            if !(gap > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "theoretical rule needs rho < gamma / alpha = {}",
                    p.rho_limit()
                )));
            }
            Ok(plan.rho * gap.powf(p.beta - 1.0) / (plan.c * p.gamma.powf(p.beta)) * scale)
        }
    }
}

/// `|u0|^{1 - beta} / ((beta - 1) delta)`, an upper bound for the exact blow-up time.
pub fn continuous_upper_bound(p: &GrowthParams, u0_norm: f64) -> Result<f64> {
    p.validate()?;
    check_initial_norm(p, u0_norm)?;
    Ok(u0_norm.powf(1.0 - p.beta) / ((p.beta - 1.0) * p.delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDiagnostics {
    /// Lower growth rate: `|U_m^-| >= (1 + C0 rho) |U_{m-1}^-|`.
    pub c0: f64,
    /// Upper growth rate: `|U_m^-| <= (1 + C1 rho) |U_{m-1}^-|`.
    pub c1: f64,
    /// Upper bound on the discrete blow-up time.
    pub discrete_upper_bound: f64,
}

/// `C0 = c^{-1} gamma^{-beta} Psi(rho_0)`, `C1 = alpha c^{-1} (rho_0 + 1) / (gamma - rho_0 alpha)`
/// and the discrete blow-up bound
/// `rho (gamma - alpha rho)^{beta-1} / (c gamma^beta) |u0|^{1-beta} / (1 - (1 + C0 rho)^{1-beta})`.
pub fn discrete_diagnostics(
    p: &GrowthParams,
    plan: &StepPlan,
    u0_norm: f64,
) -> Result<DiscreteDiagnostics> {
    p.validate()?;
    check_initial_norm(p, u0_norm)?;
    check_rho_0(p, plan.rho_0)?;
    let c0 = psi(plan.rho_0, p)? / (plan.c * p.gamma.powf(p.beta));
    let c1 = p.alpha * (plan.rho_0 + 1.0) / (plan.c * (p.gamma - plan.rho_0 * p.alpha));
    let rho = plan.rho;
    let lead = rho * (p.gamma - p.alpha * rho).powf(p.beta - 1.0) / (plan.c * p.gamma.powf(p.beta));
    let bound = lead * u0_norm.powf(1.0 - p.beta) / (1.0 - (1.0 + c0 * rho).powf(1.0 - p.beta));
    Ok(DiscreteDiagnostics {
        c0,
        c1,
        discrete_upper_bound: bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    /// `T + k == T` in floating point.
    Saturation,
    /// `k <= tau`.
    Tolerance,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Saturation => "saturation",
            StopReason::Tolerance => "tolerance",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub upper_bound_continuous: f64,
    /// Present in theoretical mode only.
    pub discrete: Option<DiscreteDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupResult {
    pub t_infinity_estimate: f64,
    /// Number of solved steps.
    pub steps: usize,
    /// `|U_0^-| = |u0|, |U_1^-|, ..., |U_steps^-|`.
    pub norms: Vec<f64>,
    /// Every computed `k_m`, including the final one that triggered the stop.
    pub step_sizes: Vec<f64>,
    pub stopped_by: StopReason,
    pub diagnostics: Diagnostics,
    /// Steps whose growth ratio fell outside `[1 + C0 rho, 1 + C1 rho]`
    /// (theoretical mode only).
    pub growth_violations: usize,
    /// Steps whose Picard iterates left the ball of radius `kappa_m`
    /// (theoretical mode only).
    pub ball_violations: usize,
    pub picard_iterations: usize,
}

impl BlowupResult {
    /// Node times `t_0 = 0, t_1, ..., t_steps`.
    pub fn nodes(&self) -> Vec<f64> {
        let mut t = 0.0;
        std::iter::once(0.0)
            .chain(self.step_sizes[..self.steps].iter().map(|k| {
                t += k;
                t
            }))
            .collect()
    }
}

/// Marches `scheme` with the step rule of `plan` until the accumulated time
/// saturates (`T + k == T`) or `k <= tau`, and returns the accumulated time
/// as the blow-up estimate. `tau = 0` leaves only the saturation test.
#[allow(clippy::too_many_arguments)]
pub fn blowup_run(
    problem: &Problem,
    params: &GrowthParams,
    plan: &StepPlan,
    scheme: Scheme,
    r: usize,
    cfg: &SolverConfig,
    tau: f64,
) -> Result<BlowupResult> {
    params.validate()?;
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidInput(format!(
            "tau must be nonnegative, got {tau}"
        )));
    }
    if (plan.c - scheme.constant()).abs() > 0.0 && plan.mode == StepMode::Theoretical {
        return Err(Error::InvalidInput(format!(
            "plan constant c = {} does not match the {scheme} scheme ({})",
            plan.c,
            scheme.constant()
        )));
    }
    let u0_norm = problem.u0.norm();
    check_initial_norm(params, u0_norm)?;
    plan.validate(params, u0_norm)?;

    let discrete = match plan.mode {
        StepMode::Theoretical => Some(discrete_diagnostics(params, plan, u0_norm)?),
        StepMode::Empirical => None,
    };
    let diagnostics = Diagnostics {
        upper_bound_continuous: continuous_upper_bound(params, u0_norm)?,
        discrete,
    };

    let mut u = problem.u0.clone();
    let mut norms = vec![u0_norm];
    let mut step_sizes = Vec::new();
    let mut t = 0.0f64;
    let mut growth_violations = 0;
    let mut ball_violations = 0;
    let mut picard_iterations = 0;
    let mut local_cfg = cfg.clone();

    loop {
        let m = step_sizes.len();
        if m >= MAX_BLOWUP_STEPS {
            return Err(Error::InvalidInput(format!(
                "no blow-up detected within {MAX_BLOWUP_STEPS} steps"
            )));
        }
        let prev_norm = *norms.last().unwrap();
        let k = step_size(plan, params, prev_norm).map_err(|e| e.at_step(m))?;
        step_sizes.push(k);
        let t_next = t + k;
        if t_next == t {
            return Ok(BlowupResult {
                t_infinity_estimate: t,
                steps: m,
                norms,
                step_sizes,
                stopped_by: StopReason::Saturation,
                diagnostics,
                growth_violations,
                ball_violations,
                picard_iterations,
            });
        }
        if !(k > tau) {
            return Ok(BlowupResult {
                t_infinity_estimate: t_next,
                steps: m,
                norms,
                step_sizes,
                stopped_by: StopReason::Tolerance,
                diagnostics,
                growth_violations,
                ball_violations,
                picard_iterations,
            });
        }

        let kappa = plan.kappa(params, prev_norm);
        if plan.mode == StepMode::Theoretical {
            local_cfg.ball_radius = Some(kappa);
        }
        let map = IntervalMap { t_start: t, k };
        let res = step(scheme, problem, &u, map, r, &local_cfg).map_err(|e| e.at_step(m))?;
        picard_iterations += res.iterations;
        let norm = res.right_value.norm();
        if !norm.is_finite() {
            return Err(Error::NonConvergence {
                iterations: res.iterations,
                last_delta: f64::INFINITY,
            }
            .at_step(m));
        }
        if let Some(d) = &diagnostics.discrete {
            let ratio = norm / prev_norm;
            let lower = 1.0 + d.c0 * plan.rho;
            let upper = 1.0 + d.c1 * plan.rho;
            if ratio < lower * (1.0 - 1e-12) || ratio > upper * (1.0 + 1e-12) {
                growth_violations += 1;
                log::warn!("step {m}: growth ratio {ratio} outside [{lower}, {upper}]");
            }
            if res.max_ball_excursion > kappa * (1.0 + 1e-12) {
                ball_violations += 1;
            }
        }
        u = res.right_value;
        norms.push(norm);
        t = t_next;
    }
}
