//! Lifting operator and the discrete dG time derivative
//! `chi(U) = U' + L(U(t_start^+))` on Legendre coefficients.
//!
//! The lifting `L(z)` is the polynomial of degree `r` that represents the
//! left-endpoint evaluation in the `L2(I)` inner product:
//! `int_I (L(z), V) dt = (z, V(t_start^+))` for every `V` of degree `r`.
//! On the reference interval its coefficients are `z (-1)^i (2i + 1) / 2`;
//! on a step of length `k` they carry the extra factor `2 / k`.
//!
//! Since both parts of `chi` scale like `2 / k`, the matrix on a step of
//! length `k` is `(2 / k)` times the reference matrix, so only the
//! reference LU factorization is cached (per degree).

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, Dyn, LU};

use crate::legendre::IntervalMap;
use crate::poly_traj::PolyTraj;
use crate::{Error, Result, Vector};

/// Coefficients `(-1)^i (2i + 1) / 2`, `i = 0..=r`, of the reference lifting.
pub fn lifting_reference_weights(r: usize) -> Vec<f64> {
    (0..=r)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (2 * i + 1) as f64 * 0.5
        })
        .collect()
}

/// Reference lifting on `(-1, 1)`.
pub fn lifting_reference(z: &Vector, r: usize) -> PolyTraj {
    lifting_scaled(z, IntervalMap::reference(), r, 1.0)
}

/// Lifting on the step described by `map`.
pub fn lifting(z: &Vector, map: IntervalMap, r: usize) -> PolyTraj {
    lifting_scaled(z, map, r, 2.0 / map.k)
}

fn lifting_scaled(z: &Vector, map: IntervalMap, r: usize, scale: f64) -> PolyTraj {
    let mut p = PolyTraj::zeros(map, r, z.len());
    for (i, w) in lifting_reference_weights(r).into_iter().enumerate() {
        p.coeffs_mut()
            .row_mut(i)
            .copy_from(&(z.transpose() * (w * scale)));
    }
    p
}

/// Reference matrix of `chi` on `(-1, 1)` with its LU factorization.
#[derive(Debug)]
struct ReferenceChi {
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl ReferenceChi {
    fn build(r: usize) -> Result<Self> {
        let n = r + 1;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let wj = (2 * j + 1) as f64;
            for i in 0..n {
                // derivative: K_i' contains (2j + 1) K_j when i > j, i - j odd
                if i > j && (i - j) % 2 == 1 {
                    m[(j, i)] += wj;
                }
                // lifting of the left value sum_i (-1)^i c_i
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                m[(j, i)] += 0.5 * wj * sign;
            }
        }
        let lu = m.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::SingularOperator(r));
        }
        Ok(Self { matrix: m, lu })
    }

    fn cached(r: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<ReferenceChi>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(op) = cache.read().unwrap().get(&r) {
            return Ok(Arc::clone(op));
        }
        let op = Arc::new(Self::build(r)?);
        Ok(Arc::clone(cache.write().unwrap().entry(r).or_insert(op)))
    }
}

/// `chi` and its inverse for one degree and one step length.
#[derive(Debug, Clone)]
pub struct ChiOperator {
    degree: usize,
    k: f64,
    forward: DMatrix<f64>,
    reference: Arc<ReferenceChi>,
}

impl ChiOperator {
    pub fn build(r: usize, map: IntervalMap) -> Result<Self> {
        let reference = ReferenceChi::cached(r)?;
        Ok(Self {
            degree: r,
            k: map.k,
            forward: &reference.matrix * (2.0 / map.k),
            reference,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Matrix acting on the coefficient rows: `chi(U).coeffs = M * U.coeffs`.
    pub fn forward_matrix(&self) -> &DMatrix<f64> {
        &self.forward
    }

    fn check(&self, p: &PolyTraj) -> Result<()> {
        let k = p.map().k;
        if p.degree() != self.degree || (k - self.k).abs() > 1e-14 * self.k {
            return Err(Error::OperatorMismatch {
                expected_degree: self.degree,
                expected_k: self.k,
                degree: p.degree(),
                k,
            });
        }
        Ok(())
    }

    pub fn apply(&self, p: &PolyTraj) -> Result<PolyTraj> {
        self.check(p)?;
        PolyTraj::new(p.map(), &self.forward * p.coeffs())
    }

    /// `chi^{-1}(v)`.
    pub fn solve(&self, v: &PolyTraj) -> Result<PolyTraj> {
        self.check(v)?;
        let mut c = self
            .reference
            .lu
            .solve(v.coeffs())
            .ok_or(Error::SingularOperator(self.degree))?;
        c *= 0.5 * self.k;
        PolyTraj::new(v.map(), c)
    }
}

/// Builds `chi` for degree `r` on the step `map`.
pub fn chi_build(r: usize, map: IntervalMap) -> Result<ChiOperator> {
    ChiOperator::build(r, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::gauss_rule;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    /// Lifting by solving the defining system in the monomial basis.
    fn lifting_oracle(r: usize) -> Vec<f64> {
        let n = r + 1;
        let gram = DMatrix::from_fn(n, n, |i, j| {
            if (i + j) % 2 == 1 {
                0.0
            } else {
                2.0 / (i + j + 1) as f64
            }
        });
        let rhs = nalgebra::DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let mono = gram.lu().solve(&rhs).unwrap();
        // values at a few points, to compare basis-independently
        [-0.9, -0.3, 0.2, 0.75]
            .iter()
            .map(|&x| (0..n).map(|i| mono[i] * f64::powi(x, i as i32)).sum())
            .collect()
    }

    #[test]
    fn reference_lifting_low_degrees() {
        let z = v(&[2.0, -4.0]);
        let l0 = lifting_reference(&z, 0);
        assert_eq!(l0.coeffs().row(0).transpose(), &z * 0.5);
        let l1 = lifting_reference(&z, 1);
        assert_eq!(l1.coeffs().row(0).transpose(), &z * 0.5);
        assert_eq!(l1.coeffs().row(1).transpose(), &z * -1.5);
    }

    #[test]
    fn reference_lifting_matches_monomial_gram_solve() {
        let z = v(&[1.0]);
        for r in 0..=10 {
            let l = lifting_reference(&z, r);
            let oracle = lifting_oracle(r);
            for (x, expected) in [-0.9, -0.3, 0.2, 0.75].iter().zip(oracle) {
                assert_abs_diff_eq!(
                    l.eval_reference(*x)[0],
                    expected,
                    epsilon = 1e-8 * expected.abs().max(1.0)
                );
            }
        }
    }

    #[test]
    fn scaled_lifting() {
        let z = v(&[0.3, 1.0]);
        let map = IntervalMap::new(2.0, 0.1).unwrap();
        let l = lifting(&z, map, 0);
        assert_abs_diff_eq!(
            (l.coeffs().row(0).transpose() - &z * 10.0).norm(),
            0.0,
            epsilon = 1e-13
        );
        // defining property against V = K_j
        for r in 0..6 {
            let l = lifting(&z, map, r);
            let rule = gauss_rule(r + 2);
            for j in 0..=r {
                let lhs = rule.integrate(|x| {
                    l.eval_reference(x)[1] * crate::legendre::legendre_unchecked(j, x)
                }) * map.jacobian();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                assert_abs_diff_eq!(lhs, z[1] * sign, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn chi_degree_zero() {
        let map = IntervalMap::new(0.0, 0.25).unwrap();
        let chi = chi_build(0, map).unwrap();
        assert_abs_diff_eq!(chi.forward_matrix()[(0, 0)], 4.0, epsilon = 1e-15);
        let u = PolyTraj::constant(map, 0, &v(&[2.0]));
        assert_abs_diff_eq!(
            chi.apply(&u).unwrap().coeffs()[(0, 0)],
            8.0,
            epsilon = 1e-14
        );
        let s = chi.solve(&u).unwrap();
        assert_abs_diff_eq!(s.coeffs()[(0, 0)], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn entry_form_of_the_matrix() {
        let k = 0.7;
        let map = IntervalMap::new(0.0, k).unwrap();
        let r = 5;
        let chi = chi_build(r, map).unwrap();
        for j in 0..=r {
            for i in 0..=r {
                let mut expected =
                    (2 * j + 1) as f64 / k * if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                if i > j && (i - j) % 2 == 1 {
                    expected += 2.0 / k * (2 * j + 1) as f64;
                }
                assert_abs_diff_eq!(chi.forward_matrix()[(j, i)], expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn apply_matches_definition() {
        // chi(U) = U' + L(U(t_start^+)) assembled from the pieces
        let map = IntervalMap::new(-0.5, 1.3).unwrap();
        let r = 6;
        let c = DMatrix::from_fn(r + 1, 2, |i, j| ((i * 3 + j) as f64).sin());
        let u = PolyTraj::new(map, c).unwrap();
        let chi = chi_build(r, map).unwrap();
        let direct = u.derivative().add(&lifting(&u.left_value(), map, r));
        assert!(chi.apply(&u).unwrap().sub(&direct).max_coeff() < 1e-12);
    }

    #[test]
    fn zero_and_mismatch() {
        let map = IntervalMap::new(0.0, 1.0).unwrap();
        let chi = chi_build(3, map).unwrap();
        let z = PolyTraj::zeros(map, 3, 2);
        assert_eq!(chi.solve(&z).unwrap().max_coeff(), 0.0);
        let wrong_degree = PolyTraj::zeros(map, 2, 2);
        assert!(matches!(
            chi.apply(&wrong_degree),
            Err(Error::OperatorMismatch { .. })
        ));
        let wrong_k = PolyTraj::zeros(IntervalMap::new(0.0, 2.0).unwrap(), 3, 2);
        assert!(chi.solve(&wrong_k).is_err());
    }

    #[test]
    fn nonsingular_up_to_degree_30() {
        for r in 0..=30 {
            let chi = chi_build(r, IntervalMap::new(0.0, 1.0).unwrap()).unwrap();
            let svd = chi.forward_matrix().clone().svd(false, false);
            let smin = svd.singular_values.min();
            assert!(smin > 0.0 && (svd.singular_values.max() / smin).is_finite());
        }
    }

    #[test]
    fn repeated_builds_are_bit_identical() {
        let map = IntervalMap::new(0.0, 0.013).unwrap();
        let a = chi_build(9, map).unwrap();
        let b = chi_build(9, map).unwrap();
        assert_eq!(a.forward_matrix(), b.forward_matrix());
    }
}
