//! Problem definitions: right-hand side, initial value, optional exact
//! solution and growth metadata.

use std::fmt;
use std::sync::Arc;

use crate::blowup::GrowthParams;
use crate::{Error, Result, Vector};

pub type RhsFn = Arc<dyn Fn(f64, &Vector) -> Vector + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64) -> Vector + Send + Sync>;

/// `u' = F(t, u)`, `u(0) = u0` in `R^N`.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub rhs: RhsFn,
    pub u0: Vector,
    pub exact: Option<ExactFn>,
    pub t_blowup_exact: Option<f64>,
    pub growth: Option<GrowthParams>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("u0", &self.u0.as_slice())
            .field("has_exact", &self.exact.is_some())
            .field("t_blowup_exact", &self.t_blowup_exact)
            .field("growth", &self.growth)
            .finish()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        u0: Vector,
        rhs: impl Fn(f64, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            rhs: Arc::new(rhs),
            u0,
            exact: None,
            t_blowup_exact: None,
            growth: None,
        }
    }

    pub fn with_exact(mut self, exact: impl Fn(f64) -> Vector + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn with_blowup_time(mut self, t: f64) -> Self {
        self.t_blowup_exact = Some(t);
        self
    }

    pub fn with_growth(mut self, growth: GrowthParams) -> Self {
        self.growth = Some(growth);
        self
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn rhs(&self, t: f64, x: &Vector) -> Vector {
        (self.rhs)(t, x)
    }
}

fn scalar(x: f64) -> Vector {
    Vector::from_element(1, x)
}

/// `u' = (|u| + 1) u / (1 + e^{-t})`, `u(0) = 3`, with exact solution
/// `u(t) = 3 (e^t + 1) / (5 - 3 e^t)` blowing up at `ln(5/3)`.
///
/// Growth constants for `c_F = 2`: `alpha = 3/2`, `beta = 2`, `delta = 1/2`,
/// `gamma = 5/2`, and Lipschitz constant 5 on the ball `|u| <= 2`.
pub fn example_blowup() -> Problem {
    Problem::new("example54", scalar(3.0), |t, u| {
        u.map(|x| (x.abs() + 1.0) * x / (1.0 + (-t).exp()))
    })
    .with_exact(|t| {
        let e = t.exp();
        scalar(3.0 * (e + 1.0) / (5.0 - 3.0 * e))
    })
    .with_blowup_time((5.0f64 / 3.0).ln())
    .with_growth(GrowthParams {
        alpha: 1.5,
        beta: 2.0,
        delta: 0.5,
        c_f: 2.0,
        gamma: 2.5,
        l_cf: 5.0,
    })
}

/// `u' = lambda u`, exact `e^{lambda t} u0`.
pub fn linear_test(lambda: f64, u0: f64) -> Problem {
    Problem::new("linear", scalar(u0), move |_, u| u * lambda)
        .with_exact(move |t| scalar((lambda * t).exp() * u0))
}

/// Scalar `u' = alpha |u|^{beta - 1} u`, which blows up at
/// `|u0|^{1 - beta} / ((beta - 1) alpha)` for `u0 != 0`.
pub fn power_law(alpha: f64, beta: f64, u0: f64) -> Result<Problem> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "power law needs beta > 1, got {beta}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "power law needs alpha > 0, got {alpha}"
        )));
    }
    let mut p = Problem::new("powerlaw", scalar(u0), move |_, u| {
        u.map(|x| alpha * x.abs().powf(beta - 1.0) * x)
    })
    .with_growth(GrowthParams {
        alpha,
        beta,
        delta: alpha,
        c_f: 0.0,
        gamma: alpha * beta,
        l_cf: 0.0,
    });
    if u0 != 0.0 {
        let base = u0.abs().powf(1.0 - beta);
        p = p
            .with_exact(move |t| {
                scalar(u0.signum() * (base - (beta - 1.0) * alpha * t).powf(1.0 / (1.0 - beta)))
            })
            .with_blowup_time(base / ((beta - 1.0) * alpha));
    } else {
        p = p.with_exact(|_| scalar(0.0));
    }
    Ok(p)
}

/// `u' = 0`.
pub fn zero(u0: Vector) -> Problem {
    let c = u0.clone();
    let n = u0.len();
    Problem::new("zero", u0, move |_, _| Vector::zeros(n)).with_exact(move |_| c.clone())
}

/// `G(t, x) = F(t, x)` inside the ball `|x| <= radius` and `F(t, radius x / |x|)`
/// outside; globally Lipschitz when `F` is locally Lipschitz.
pub fn clip_radial(f: RhsFn, radius: f64) -> Result<RhsFn> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "clipping radius must be positive, got {radius}"
        )));
    }
    Ok(Arc::new(move |t, x: &Vector| {
        let n = x.norm();
        if n <= radius {
            f(t, x)
        } else {
            f(t, &(x * (radius / n)))
        }
    }))
}

/// Built-in problem names accepted by [`by_name`].
pub const REGISTRY: &[&str] = &["example54", "linear", "powerlaw", "zero"];

/// Numeric parameters for [`by_name`]; unset fields take per-problem defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemParams {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub u0: Option<Vec<f64>>,
}

pub fn by_name(name: &str, params: &ProblemParams) -> Result<Problem> {
    let scalar_u0 = |default: f64| -> Result<f64> {
        match params.u0.as_deref() {
            None => Ok(default),
            Some([x]) => Ok(*x),
            Some(v) => Err(Error::InvalidInput(format!(
                "problem '{name}' is scalar but u0 has {} components",
                v.len()
            ))),
        }
    };
    match name {
        "example54" => {
            if params.u0.is_some() {
                return Err(Error::InvalidInput(
                    "example54 has a fixed initial value u0 = 3".into(),
                ));
            }
            Ok(example_blowup())
        }
        "linear" => Ok(linear_test(params.lambda.unwrap_or(-1.0), scalar_u0(1.0)?)),
        "powerlaw" => power_law(
            params.alpha.unwrap_or(1.0),
            params.beta.unwrap_or(2.0),
            scalar_u0(1.0)?,
        ),
        "zero" => Ok(zero(Vector::from_vec(
            params.u0.clone().unwrap_or_else(|| vec![1.0]),
        ))),
        other => Err(Error::InvalidInput(format!(
            "unknown problem '{other}' (known: {})",
            REGISTRY.join(", ")
        ))),
    }
}
