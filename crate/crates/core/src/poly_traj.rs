//! Vector-valued polynomials on one time step, stored as Legendre coefficients.
//!
//! Row `i` of the coefficient matrix is the vector multiplying
//! `K_i(F^{-1}(t))`, where `F` maps the reference interval onto the step.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::legendre::{legendre_values, legendre_values_into, IntervalMap, QuadRule};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyTraj {
    map: IntervalMap,
    coeffs: DMatrix<f64>,
}

/// Sampled estimate of `sup_t ||p(t)||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub sample_count: usize,
}

/// Chebyshev–Lobatto points used for sup-norm estimates of a degree-`r`
/// polynomial: `4(r + 1) + 1` points with both endpoints included exactly.
pub fn sample_points(degree: usize) -> Vec<f64> {
    let n = 4 * (degree + 1);
    (0..=n)
        .map(|j| match j {
            0 => -1.0,
            j if j == n => 1.0,
            j => -(PI * j as f64 / n as f64).cos(),
        })
        .collect()
}

impl PolyTraj {
    /// `coeffs` has one row per Legendre mode and one column per state component.
    pub fn new(map: IntervalMap, coeffs: DMatrix<f64>) -> Result<Self> {
        if coeffs.nrows() == 0 || coeffs.ncols() == 0 {
            return Err(Error::InvalidInput(
                "a trajectory needs at least one mode and one component".into(),
            ));
        }
        Ok(Self { map, coeffs })
    }

    pub fn zeros(map: IntervalMap, degree: usize, dim: usize) -> Self {
        Self {
            map,
            coeffs: DMatrix::zeros(degree + 1, dim),
        }
    }

    pub fn constant(map: IntervalMap, degree: usize, value: &Vector) -> Self {
        let mut p = Self::zeros(map, degree, value.len());
        p.coeffs.row_mut(0).copy_from(&value.transpose());
        p
    }

    pub fn map(&self) -> IntervalMap {
        self.map
    }

    pub fn degree(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> DMatrix<f64> {
        self.coeffs
    }

    pub fn t_start(&self) -> f64 {
        self.map.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.map.t_end()
    }

    pub fn eval(&self, t: f64) -> Result<Vector> {
        let x = self.map.to_reference(t)?;
        Ok(self.eval_reference(x))
    }

    /// Value at reference coordinate `x` in `[-1, 1]`.
    pub fn eval_reference(&self, x: f64) -> Vector {
        let basis = legendre_values(self.degree(), x);
        self.combine(&basis)
    }

    fn combine(&self, basis: &[f64]) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for (i, b) in basis.iter().enumerate() {
            out.axpy(*b, &self.coeffs.row(i).transpose(), 1.0);
        }
        out
    }

    /// One-sided limit at the left end of the step.
    pub fn left_value(&self) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for i in 0..=self.degree() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            out.axpy(sign, &self.coeffs.row(i).transpose(), 1.0);
        }
        out
    }

    /// One-sided limit at the right end of the step.
    pub fn right_value(&self) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for i in 0..=self.degree() {
            out.axpy(1.0, &self.coeffs.row(i).transpose(), 1.0);
        }
        out
    }

    /// Time derivative; degree drops by one (a constant stays degree 0).
    ///
    /// Uses `K_n' = sum_{j < n, n - j odd} (2j + 1) K_j` and the chain-rule
    /// factor `2 / k`.
    pub fn derivative(&self) -> PolyTraj {
        let r = self.degree();
        let out_degree = r.saturating_sub(1);
        let mut d = DMatrix::zeros(out_degree + 1, self.dim());
        if r > 0 {
            let scale = 2.0 / self.map.k;
            // running sums over modes of alternating parity, from the top down
            let mut odd_tail = nalgebra::RowDVector::zeros(self.dim());
            let mut even_tail = nalgebra::RowDVector::zeros(self.dim());
            for i in (1..=r).rev() {
                if i % 2 == 0 {
                    even_tail += self.coeffs.row(i);
                } else {
                    odd_tail += self.coeffs.row(i);
                }
                let j = i - 1;
                let tail = if j % 2 == 0 { &odd_tail } else { &even_tail };
                d.row_mut(j)
                    .copy_from(&(tail * ((2 * j + 1) as f64 * scale)));
            }
        }
        PolyTraj {
            map: self.map,
            coeffs: d,
        }
    }

    /// `t -> int_{t_start}^t p(s) ds`, of degree `r + 1`.
    pub fn antiderivative_from_left(&self) -> PolyTraj {
        let r = self.degree();
        let scale = 0.5 * self.map.k;
        let mut a = DMatrix::zeros(r + 2, self.dim());
        // int_{-1}^x K_0 = K_0 + K_1
        let c0 = self.coeffs.row(0) * scale;
        a.row_mut(0).copy_from(&c0);
        a.row_mut(1).copy_from(&c0);
        // int_{-1}^x K_i = (K_{i+1} - K_{i-1}) / (2i + 1)
        for i in 1..=r {
            let c = self.coeffs.row(i) * (scale / (2 * i + 1) as f64);
            let up = a.row(i + 1) + &c;
            a.row_mut(i + 1).copy_from(&up);
            let down = a.row(i - 1) - &c;
            a.row_mut(i - 1).copy_from(&down);
        }
        PolyTraj {
            map: self.map,
            coeffs: a,
        }
    }

    /// Sup-norm estimate on `4(r + 1) + 1` Chebyshev–Lobatto samples.
    pub fn sup_norm(&self) -> NormEstimate {
        let points = sample_points(self.degree());
        let mut basis = vec![0.0; self.degree() + 1];
        let value = points
            .iter()
            .map(|&x| {
                legendre_values_into(x, &mut basis);
                self.combine(&basis).norm()
            })
            .fold(0.0, f64::max);
        NormEstimate {
            value,
            sample_count: points.len(),
        }
    }

    /// `(int_I ||p(t)||^q dt)^{1/q}` by Gauss quadrature.
    pub fn lp_norm(&self, q: f64, rule: &QuadRule) -> f64 {
        let s = rule.integrate(|x| self.eval_reference(x).norm().powf(q));
        (s * self.map.jacobian()).powf(1.0 / q)
    }

    /// `L^p` norm for `p` in `{1, 2, inf}`: quadrature with `2(r + 1)` nodes
    /// for finite `p`, sampled sup-norm for `p = inf`.
    pub fn norm_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.sup_norm().value
        } else {
            let rule = crate::legendre::gauss_rule(2 * (self.degree() + 1));
            self.lp_norm(p, &rule)
        }
    }

    pub fn scale(&self, s: f64) -> PolyTraj {
        PolyTraj {
            map: self.map,
            coeffs: &self.coeffs * s,
        }
    }

    /// Coefficient-wise sum, padding the lower-degree operand with zeros.
    pub fn add(&self, other: &PolyTraj) -> PolyTraj {
        let degree = self.degree().max(other.degree());
        let mut c = DMatrix::zeros(degree + 1, self.dim());
        {
            let mut top = c.rows_mut(0, self.coeffs.nrows());
            top += &self.coeffs;
        }
        {
            let mut top = c.rows_mut(0, other.coeffs.nrows());
            top += &other.coeffs;
        }
        PolyTraj {
            map: self.map,
            coeffs: c,
        }
    }

    pub fn sub(&self, other: &PolyTraj) -> PolyTraj {
        self.add(&other.scale(-1.0))
    }

    /// Largest absolute coefficient.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.amax()
    }

    pub fn to_record(&self) -> PolyTrajRecord {
        PolyTrajRecord {
            t_start: self.map.t_start,
            k: self.map.k,
            degree: self.degree(),
            dim: self.dim(),
            coeffs: self.coeffs.transpose().as_slice().to_vec(),
        }
    }

    pub fn from_record(rec: &PolyTrajRecord) -> Result<Self> {
        let rows = rec.degree + 1;
        if rec.dim == 0 || rec.coeffs.len() != rows * rec.dim {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for degree {} and dimension {}, got {}",
                rows * rec.dim,
                rec.degree,
                rec.dim,
                rec.coeffs.len()
            )));
        }
        let map = IntervalMap::new(rec.t_start, rec.k)?;
        Self::new(map, DMatrix::from_row_slice(rows, rec.dim, &rec.coeffs))
    }
}

/// JSON form: `coeffs` is row-major, `degree + 1` rows of `dim` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTrajRecord {
    pub t_start: f64,
    pub k: f64,
    pub degree: usize,
    pub dim: usize,
    pub coeffs: Vec<f64>,
}

impl Serialize for PolyTraj {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyTraj {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = PolyTrajRecord::deserialize(d)?;
        PolyTraj::from_record(&rec).map_err(serde::de::Error::custom)
    }
}

/// L2 projection of `f` onto polynomials of degree `degree` on `map`:
/// coefficient `i` is `(2i + 1)/2 * sum_q w_q f(F(x_q)) K_i(x_q)`.
///
/// Exact when `f` is a polynomial of degree at most `2n - 1 - degree`, with
/// `n` the number of quadrature nodes. For general `f` this is a quadrature
/// approximation of the projection.
pub fn project_l2(
    mut f: impl FnMut(f64) -> Vector,
    map: IntervalMap,
    degree: usize,
    rule: &QuadRule,
) -> Result<PolyTraj> {
    project_l2_at_nodes(|_, t| f(t), map, degree, rule)
}

/// As [`project_l2`], with `f` receiving the reference node `x` alongside `t = F(x)`.
pub fn project_l2_at_nodes(
    mut f: impl FnMut(f64, f64) -> Vector,
    map: IntervalMap,
    degree: usize,
    rule: &QuadRule,
) -> Result<PolyTraj> {
    if rule.len() < degree + 1 {
        return Err(Error::InvalidInput(format!(
            "{} quadrature nodes cannot resolve degree {degree}",
            rule.len()
        )));
    }
    let mut coeffs: Option<DMatrix<f64>> = None;
    let mut basis = vec![0.0; degree + 1];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let value = f(x, map.to_time(x));
        let c = coeffs.get_or_insert_with(|| DMatrix::zeros(degree + 1, value.len()));
        if value.len() != c.ncols() {
            return Err(Error::InvalidInput(
                "projected function changed dimension between nodes".into(),
            ));
        }
        legendre_values_into(x, &mut basis);
        for (i, b) in basis.iter().enumerate() {
            let factor = w * b * (2 * i + 1) as f64 * 0.5;
            for (j, v) in value.iter().enumerate() {
                c[(i, j)] += factor * v;
            }
        }
    }
    PolyTraj::new(map, coeffs.expect("rule has at least one node"))
}
