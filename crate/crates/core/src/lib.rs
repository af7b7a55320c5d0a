//! hp-version continuous (cG) and discontinuous (dG) Galerkin time stepping
//! for nonlinear initial value problems `u' = F(t, u)`, `u(0) = u0` in `R^N`.
//!
//! Every local step is solved as a Picard fixed-point iteration on a
//! Legendre-coefficient representation of the discrete solution:
//!
//! - cG: `U = pi(U_{m-1}) + int_{t_{m-1}}^t Pi F(U)`, trial degree `r + 1`;
//! - dG: `U = pi(U_{m-1}^-) + chi^{-1}(Pi F(U))`, trial degree `r`, where
//!   `chi(U) = U' + L(U_{m-1}^+)` is the discrete dG time derivative.
//!
//! For right-hand sides of algebraic growth the [`blowup`] module provides
//! the adaptive step rule and the marching loop that estimates the finite
//! blow-up time of the solution.
//!
//! ```
//! use galerkin_core::prelude::*;
//!
//! let problem = problems::linear_test(-1.0, 1.0);
//! let nodes: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
//! let traj = solve_mesh(&problem, &nodes, &[2; 10], Scheme::Dg, &SolverConfig::default()).unwrap();
//! let end = traj.end_value();
//! assert!((end[0] - (-1.0f64).exp()).abs() < 1e-8);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod dg_operators;
mod error;
pub mod legendre;
pub mod poly_traj;
pub mod problems;
pub mod stepping;

pub use error::{Error, Result};

/// State vector type used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;

pub mod prelude {
    pub use crate::blowup::{
        blowup_run, BlowupResult, GrowthParams, StepMode, StepPlan, StopReason,
    };
    pub use crate::dg_operators::ChiOperator;
    pub use crate::legendre::{gauss_rule, IntervalMap, QuadRule};
    pub use crate::poly_traj::PolyTraj;
    pub use crate::problems::{self, Problem};
    pub use crate::stepping::{
        cg_step, dg_step, solve_mesh, Scheme, SolverConfig, StepResult, Trajectory,
    };
    pub use crate::{Error, Result, Vector};
}
