//! Legendre polynomials on the reference interval `(-1, 1)`, Gauss–Legendre
//! quadrature and the affine map between the reference interval and a time
//! step `[t_start, t_start + k]`.
//!
//! Polynomials use the standard normalization `K_i(1) = 1`, hence
//! `K_i(-1) = (-1)^i` and `|K_i| <= 1` on the closed interval.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Value of the Legendre polynomial of degree `i` at `x` in `[-1, 1]`.
pub fn legendre_eval(i: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput(format!(
            "reference coordinate {x} outside [-1, 1]"
        )));
    }
    Ok(legendre_unchecked(i, x))
}

/// Three-term recurrence without the domain check.
pub(crate) fn legendre_unchecked(i: usize, x: f64) -> f64 {
    let (mut p_prev, mut p) = (1.0, x);
    if i == 0 {
        return p_prev;
    }
    for n in 1..i {
        let nf = n as f64;
        // dividing last keeps the endpoint values exactly +-1
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
    }
    p
}

/// Fills `out[0..=n]` with `K_0(x), ..., K_n(x)`.
pub fn legendre_values_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = x;
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// `K_0(x), ..., K_n(x)`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    legendre_values_into(x, &mut out);
    out
}

/// `(K_n(x), K_n'(x))` for `|x| < 1`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let p = legendre_unchecked(n, x);
    let p_prev = legendre_unchecked(n - 1, x);
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss–Legendre rule on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_q w_q f(x_q)` on the reference interval.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Newton iteration on `K_n` from Chebyshev-type initial guesses.
    fn compute(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n / 2;
        for i in 0..half {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // largest positive root first: mirror to keep exact symmetry
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            let (_, dp) = legendre_with_derivative(n, 0.0);
            nodes[half] = 0.0;
            weights[half] = 2.0 / (dp * dp);
        }
        if n == 1 {
            weights[0] = 2.0;
        }
        Self { nodes, weights }
    }
}

/// `n`-point Gauss–Legendre rule, cached per `n`.
pub fn gauss_rule(n: usize) -> Arc<QuadRule> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<QuadRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.read().unwrap().get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(QuadRule::compute(n));
    Arc::clone(cache.write().unwrap().entry(n).or_insert(rule))
}

/// Affine map from the reference interval onto `[t_start, t_start + k]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalMap {
    pub t_start: f64,
    pub k: f64,
}

impl IntervalMap {
    pub fn new(t_start: f64, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite() && t_start.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "interval needs finite start and positive length, got t_start={t_start}, k={k}"
            )));
        }
        Ok(Self { t_start, k })
    }

    /// The reference interval itself.
    pub fn reference() -> Self {
        Self {
            t_start: -1.0,
            k: 2.0,
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.k
    }

    pub fn to_time(&self, x: f64) -> f64 {
        if x == 1.0 {
            return self.t_end();
        }
        self.t_start + (x + 1.0) * (0.5 * self.k)
    }

    pub fn to_reference(&self, t: f64) -> Result<f64> {
        let end = self.t_end();
        if !(t >= self.t_start && t <= end) {
            return Err(Error::OutsideInterval {
                t,
                start: self.t_start,
                end,
            });
        }
        if t == end {
            return Ok(1.0);
        }
        Ok((2.0 * (t - self.t_start) / self.k - 1.0).clamp(-1.0, 1.0))
    }

    /// `dt / dx` of the map.
    pub fn jacobian(&self) -> f64 {
        0.5 * self.k
    }
}
