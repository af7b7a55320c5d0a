//! One-step cG and dG solvers and the multi-step driver.
//!
//! Each local problem is written as a fixed point `U = T(U)` and solved by
//! plain Picard iteration started from the constant previous value:
//!
//! - cG: `T(U) = pi(U_{m-1}) + int_{t_{m-1}}^t Pi F(U)`, trial degree `r + 1`,
//!   test degree `r`;
//! - dG: `T(U) = pi(U_{m-1}^-) + chi^{-1}(Pi F(U))`, trial and test degree `r`.
//!
//! `Pi` is the L2 projection onto degree `r` (evaluated by Gauss quadrature)
//! and `pi` the orthogonal projection onto the spatial subspace, when one is
//! configured. Failure to converge within `fp_max_iters` is an error.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dg_operators::ChiOperator;
use crate::legendre::{gauss_rule, legendre_values_into, IntervalMap, QuadRule};
use crate::poly_traj::{project_l2_at_nodes, PolyTraj};
use crate::problems::Problem;
use crate::{Error, Result, Vector};

/// Stability constant of `chi^{-1}`, uniform in degree and step length.
pub const C_CHI: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Cg,
    Dg,
}

impl Scheme {
    /// Constant `c` of the step-size conditions: 1 for cG, `C_CHI` for dG.
    pub fn constant(self) -> f64 {
        match self {
            Scheme::Cg => 1.0,
            Scheme::Dg => C_CHI,
        }
    }

    /// Degree of the local trial space for test degree `r`.
    pub fn trial_degree(self, r: usize) -> usize {
        match self {
            Scheme::Cg => r + 1,
            Scheme::Dg => r,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Cg => "cg",
            Scheme::Dg => "dg",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cg" => Ok(Scheme::Cg),
            "dg" => Ok(Scheme::Dg),
            other => Err(Error::InvalidInput(format!(
                "unknown scheme '{other}' (expected cg or dg)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Picard stops once `sup|U_new - U| <= fp_tolerance * (1 + sup|U_new|)`.
    pub fp_tolerance: f64,
    pub fp_max_iters: usize,
    /// Gauss nodes for projecting `F(U)`; `None` means `r + 4`.
    pub quad_nodes: Option<usize>,
    /// Orthonormal columns spanning the spatial subspace; `None` is all of `R^N`.
    pub subspace_basis: Option<DMatrix<f64>>,
    /// Radius of the ball around `pi(u_prev)` that iterates are expected to
    /// stay in. Only checked and logged, never enforced.
    pub ball_radius: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            fp_tolerance: 1e-12,
            fp_max_iters: 200,
            quad_nodes: None,
            subspace_basis: None,
            ball_radius: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fp_tolerance > 0.0 && self.fp_tolerance.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "fp_tolerance must be positive, got {}",
                self.fp_tolerance
            )));
        }
        if self.fp_max_iters == 0 {
            return Err(Error::InvalidInput(
                "fp_max_iters must be at least 1".into(),
            ));
        }
        if self.quad_nodes == Some(0) {
            return Err(Error::InvalidInput("quad_nodes must be at least 1".into()));
        }
        if let Some(b) = &self.subspace_basis {
            check_orthonormal(b)?;
        }
        Ok(())
    }

    pub fn quad_nodes_for(&self, r: usize) -> usize {
        self.quad_nodes.unwrap_or(r + 4).max(r + 1)
    }

    fn project(&self, x: &Vector) -> Vector {
        match &self.subspace_basis {
            None => x.clone(),
            Some(b) => b * (b.transpose() * x),
        }
    }
}

fn check_orthonormal(basis: &DMatrix<f64>) -> Result<()> {
    let gram = basis.transpose() * basis;
    let dev = (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax();
    if !(dev <= 1e-12) {
        return Err(Error::NonOrthonormalBasis(dev));
    }
    Ok(())
}

/// Orthogonal projection onto the span of `basis`; identity without one.
pub fn subspace_project(x: &Vector, basis: Option<&DMatrix<f64>>) -> Result<Vector> {
    match basis {
        None => Ok(x.clone()),
        Some(b) => {
            if b.nrows() != x.len() {
                return Err(Error::InvalidInput(format!(
                    "basis has {} rows but the vector has {} components",
                    b.nrows(),
                    x.len()
                )));
            }
            check_orthonormal(b)?;
            Ok(b * (b.transpose() * x))
        }
    }
}

/// Converged local solution on one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub traj: PolyTraj,
    pub iterations: usize,
    /// Sup-norm change of the last Picard update.
    pub residual: f64,
    /// `U_{m-1}^+`; for cG this is `pi(U_{m-1})` exactly.
    pub left_value: Vector,
    /// `U_m^-`.
    pub right_value: Vector,
    /// Sup-norm change of every Picard update, in order.
    pub deltas: Vec<f64>,
    /// Largest sampled distance of any iterate from the starting value.
    pub max_ball_excursion: f64,
}

struct Picard<'a> {
    problem: &'a Problem,
    cfg: &'a SolverConfig,
    map: IntervalMap,
    start: Vector,
    rule: std::sync::Arc<QuadRule>,
    proj_degree: usize,
}

impl Picard<'_> {
    /// `Pi pi F(., U(.))` onto degree `proj_degree`.
    fn projected_rhs(&self, u: &PolyTraj) -> Result<PolyTraj> {
        let mut basis = vec![0.0; u.degree() + 1];
        project_l2_at_nodes(
            |x, t| {
                legendre_values_into(x, &mut basis);
                let mut ux = Vector::zeros(u.dim());
                for (i, b) in basis.iter().enumerate() {
                    ux.axpy(*b, &u.coeffs().row(i).transpose(), 1.0);
                }
                self.cfg.project(&(self.problem.rhs)(t, &ux))
            },
            self.map,
            self.proj_degree,
            &self.rule,
        )
    }

    fn run(
        &self,
        trial_degree: usize,
        update: impl Fn(&PolyTraj) -> Result<PolyTraj>,
    ) -> Result<StepResult> {
        let mut u = PolyTraj::constant(self.map, trial_degree, &self.start);
        let anchor = u.clone();
        let mut deltas = Vec::new();
        let mut excursion: f64 = 0.0;
        for it in 1..=self.cfg.fp_max_iters {
            let g = self.projected_rhs(&u)?;
            let next = update(&g)?;
            let delta = next.sub(&u).sup_norm().value;
            let size = next.sup_norm().value;
            excursion = excursion.max(next.sub(&anchor).sup_norm().value);
            deltas.push(delta);
            if !delta.is_finite() || !size.is_finite() {
                return Err(Error::NonConvergence {
                    iterations: it,
                    last_delta: delta,
                });
            }
            u = next;
            if delta <= self.cfg.fp_tolerance * (1.0 + size) {
                if let Some(kappa) = self.cfg.ball_radius {
                    if excursion > kappa * (1.0 + 1e-12) {
                        log::warn!(
                            "iterates left the ball of radius {kappa:e} on [{}, {}] (excursion {excursion:e})",
                            self.map.t_start,
                            self.map.t_end()
                        );
                    }
                }
                let right_value = u.right_value();
                let left_value = u.left_value();
                return Ok(StepResult {
                    traj: u,
                    iterations: it,
                    residual: delta,
                    left_value,
                    right_value,
                    deltas,
                    max_ball_excursion: excursion,
                });
            }
        }
        Err(Error::NonConvergence {
            iterations: self.cfg.fp_max_iters,
            last_delta: deltas.last().copied().unwrap_or(f64::NAN),
        })
    }
}

fn setup<'a>(
    problem: &'a Problem,
    u_prev: &Vector,
    map: IntervalMap,
    r: usize,
    cfg: &'a SolverConfig,
) -> Result<Picard<'a>> {
    cfg.validate()?;
    if u_prev.len() != problem.dim() {
        return Err(Error::InvalidInput(format!(
            "initial value has {} components, problem dimension is {}",
            u_prev.len(),
            problem.dim()
        )));
    }
    if !(map.k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "step length must be positive, got {}",
            map.k
        )));
    }
    if let Some(b) = &cfg.subspace_basis {
        if b.nrows() != problem.dim() {
            return Err(Error::InvalidInput(
                "subspace basis does not match the problem dimension".into(),
            ));
        }
    }
    Ok(Picard {
        problem,
        cfg,
        map,
        start: cfg.project(u_prev),
        rule: gauss_rule(cfg.quad_nodes_for(r)),
        proj_degree: r,
    })
}

/// cG step of test degree `r` (trial degree `r + 1`) from `U_{m-1} = u_prev`.
pub fn cg_step(
    problem: &Problem,
    u_prev: &Vector,
    map: IntervalMap,
    r: usize,
    cfg: &SolverConfig,
) -> Result<StepResult> {
    let picard = setup(problem, u_prev, map, r, cfg)?;
    let start = picard.start.clone();
    let mut out = picard.run(r + 1, |g| {
        let mut next = g.antiderivative_from_left();
        let mut row0 = next.coeffs_mut().row_mut(0);
        row0 += start.transpose();
        Ok(next)
    })?;
    // the initial condition holds by construction of T; record it exactly
    out.left_value = start;
    Ok(out)
}

/// dG step of degree `r` from `U_{m-1}^- = u_prev_minus`.
pub fn dg_step(
    problem: &Problem,
    u_prev_minus: &Vector,
    map: IntervalMap,
    r: usize,
    cfg: &SolverConfig,
) -> Result<StepResult> {
    let picard = setup(problem, u_prev_minus, map, r, cfg)?;
    let chi = ChiOperator::build(r, map)?;
    let start = picard.start.clone();
    picard.run(r, |g| {
        let mut next = chi.solve(g)?;
        let mut row0 = next.coeffs_mut().row_mut(0);
        row0 += start.transpose();
        Ok(next)
    })
}

/// Dispatches to [`cg_step`] or [`dg_step`].
pub fn step(
    scheme: Scheme,
    problem: &Problem,
    u_prev: &Vector,
    map: IntervalMap,
    r: usize,
    cfg: &SolverConfig,
) -> Result<StepResult> {
    match scheme {
        Scheme::Cg => cg_step(problem, u_prev, map, r, cfg),
        Scheme::Dg => dg_step(problem, u_prev, map, r, cfg),
    }
}

/// Galerkin residual of an accepted step against the Legendre test
/// functions `K_j(F^{-1}(t))`, `j = 0..=r`:
///
/// `max_j |pi( int_I (U' - F(U)) K_j dt + [dG only] (U^+ - u_prev) K_j(-1) )|`
///
/// divided by `1 + sup|U|`. Integrals use the solver's quadrature rule.
pub fn weak_residual(
    problem: &Problem,
    scheme: Scheme,
    u_prev: &Vector,
    step: &StepResult,
    r: usize,
    cfg: &SolverConfig,
) -> f64 {
    let u = &step.traj;
    let map = u.map();
    let du = u.derivative();
    let rule = gauss_rule(cfg.quad_nodes_for(r));
    let mut basis = vec![0.0; r + 1];
    let mut acc = vec![Vector::zeros(u.dim()); r + 1];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let t = map.to_time(x);
        let ux = u.eval_reference(x);
        let integrand = du.eval_reference(x) - (problem.rhs)(t, &ux);
        legendre_values_into(x, &mut basis);
        for (j, b) in basis.iter().enumerate() {
            acc[j].axpy(w * b * map.jacobian(), &integrand, 1.0);
        }
    }
    if scheme == Scheme::Dg {
        let jump = u.left_value() - u_prev;
        for (j, a) in acc.iter_mut().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            a.axpy(sign, &jump, 1.0);
        }
    }
    let scale = 1.0 + u.sup_norm().value;
    acc.iter()
        .map(|a| cfg.project(a).norm() / scale)
        .fold(0.0, f64::max)
}

/// Piecewise-polynomial solution on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub nodes: Vec<f64>,
    pub degrees: Vec<usize>,
    pub u0: Vector,
    pub pieces: Vec<StepResult>,
}

impl Trajectory {
    /// `U_M^-`.
    pub fn end_value(&self) -> Vector {
        self.pieces
            .last()
            .map(|p| p.right_value.clone())
            .unwrap_or_else(|| self.u0.clone())
    }

    /// `u0, U_1^-, ..., U_M^-`.
    pub fn nodal_values(&self) -> Vec<Vector> {
        std::iter::once(self.u0.clone())
            .chain(self.pieces.iter().map(|p| p.right_value.clone()))
            .collect()
    }

    /// Jumps `U_m^+ - U_m^-` at the interior and initial nodes.
    pub fn jumps(&self) -> Vec<Vector> {
        self.nodal_values()
            .iter()
            .zip(&self.pieces)
            .map(|(minus, p)| &p.left_value - minus)
            .collect()
    }

    /// Value at `t`; interior nodes take the left-hand piece.
    pub fn eval(&self, t: f64) -> Result<Vector> {
        let idx =
            self.pieces
                .iter()
                .position(|p| t <= p.traj.t_end())
                .ok_or(Error::OutsideInterval {
                    t,
                    start: self.nodes[0],
                    end: *self.nodes.last().unwrap(),
                })?;
        self.pieces[idx].traj.eval(t)
    }

    /// `samples` equispaced points per interval (both ends included).
    pub fn sampled(&self, samples: usize) -> Vec<(usize, f64, Vector)> {
        let samples = samples.max(2);
        let mut out = Vec::new();
        for (m, p) in self.pieces.iter().enumerate() {
            for s in 0..samples {
                let x = -1.0 + 2.0 * s as f64 / (samples - 1) as f64;
                out.push((m, p.traj.map().to_time(x), p.traj.eval_reference(x)));
            }
        }
        out
    }

    pub fn to_record(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            scheme: self.scheme,
            nodes: self.nodes.clone(),
            degrees: self.degrees.clone(),
            u0: self.u0.iter().copied().collect(),
            pieces: self.pieces.iter().map(|p| p.traj.to_record()).collect(),
        }
    }
}

/// JSON form of a [`Trajectory`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub scheme: Scheme,
    pub nodes: Vec<f64>,
    pub degrees: Vec<usize>,
    pub u0: Vec<f64>,
    pub pieces: Vec<crate::poly_traj::PolyTrajRecord>,
}

/// Marches `scheme` over `nodes` with test degree `degrees[m]` on interval `m`.
pub fn solve_mesh(
    problem: &Problem,
    nodes: &[f64],
    degrees: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    if nodes.len() < 2 {
        return Err(Error::InvalidInput(
            "a mesh needs at least two nodes".into(),
        ));
    }
    if degrees.len() != nodes.len() - 1 {
        return Err(Error::InvalidInput(format!(
            "{} intervals but {} degrees",
            nodes.len() - 1,
            degrees.len()
        )));
    }
    if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!(
            "nodes must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    let mut pieces = Vec::with_capacity(degrees.len());
    let mut u = problem.u0.clone();
    for (m, (w, &r)) in nodes.windows(2).zip(degrees).enumerate() {
        let map = IntervalMap {
            t_start: w[0],
            k: w[1] - w[0],
        };
        let res = step(scheme, problem, &u, map, r, cfg).map_err(|e| e.at_step(m))?;
        u = res.right_value.clone();
        pieces.push(res);
    }
    Ok(Trajectory {
        scheme,
        nodes: nodes.to_vec(),
        degrees: degrees.to_vec(),
        u0: problem.u0.clone(),
        pieces,
    })
}

/// Uniform mesh `t0, t0 + T/M, ..., t0 + T`.
pub fn uniform_nodes(t0: f64, horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| {
            if i == steps {
                t0 + horizon
            } else {
                t0 + horizon * i as f64 / steps as f64
            }
        })
        .collect()
}
