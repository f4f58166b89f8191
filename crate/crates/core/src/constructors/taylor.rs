//! Truncated Taylor expansions.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::eval::Smooth;
use crate::poly::{factorial, multi_indices, MultiIndex, Polynomial};

/// Split a smoothness order `r = u + v` with integer `u >= 0` and
/// `0 < v <= 1`.
pub fn smoothness_split(r: f64) -> (u32, f64) {
    assert!(r > 0.0 && r.is_finite(), "smoothness order must be positive");
    let u = r.ceil() as u32 - 1;
    (u, r - u as f64)
}

/// `sum_{|alpha| <= u} d^alpha f(x0) / alpha! (x - x0)^alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorPoly {
    center: Vec<f64>,
    degree: u32,
    coeffs: Vec<(MultiIndex, f64)>,
}

impl TaylorPoly {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Coefficients for every multi-index with `|alpha| <= degree`, graded
    /// order.
    pub fn coeffs(&self) -> &[(MultiIndex, f64)] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|(_, c)| *c == 0.0)
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::new(self.center.clone(), self.coeffs.clone()).expect("consistent Taylor data")
    }
}

pub fn taylor_poly<F: Smooth + ?Sized>(f: &F, u: u32, x0: &[f64]) -> Result<TaylorPoly> {
    precondition(x0.len() == f.dim(), || format!("center has length {}, target dimension is {}", x0.len(), f.dim()))?;
    let mut coeffs = Vec::new();
    for alpha in multi_indices(x0.len(), u) {
        let norm: f64 = alpha.iter().map(|&a| factorial(a)).product();
        let c = f.partial(&alpha, x0)? / norm;
        coeffs.push((alpha, c));
    }
    Ok(TaylorPoly { center: x0.to_vec(), degree: u, coeffs })
}

pub fn taylor_eval(p: &TaylorPoly, x: &[f64]) -> f64 {
    p.to_polynomial().eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::eval::{Evaluable, FiniteDifference, FnEval};

    fn square() -> Polynomial {
        Polynomial::at_origin(1, vec![(vec![2], 1.0)]).unwrap()
    }

    #[test]
    fn reproduces_polynomials() {
        let f = square();
        let p = taylor_poly(&f, 2, &[0.5]).unwrap();
        for &x in &[-1.0, 0.0, 0.3, 2.0] {
            assert!((taylor_eval(&p, &[x]) - x * x).abs() < 1e-12);
        }
        let p0 = taylor_poly(&f, 0, &[0.5]).unwrap();
        assert_eq!(taylor_eval(&p0, &[0.9]), 0.25);
        assert_eq!(p0.coeffs().len(), 1);
    }

    #[test]
    fn linear_remainder_is_quadratic() {
        let p = taylor_poly(&square(), 1, &[0.5]).unwrap();
        for &h in &[0.1, 0.05] {
            let worst = (0..=100)
                .map(|i| 0.5 - h + 2.0 * h * i as f64 / 100.0)
                .map(|x| (x * x - taylor_eval(&p, &[x])).abs())
                .fold(0.0, f64::max);
            assert!((worst - h * h).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_fallback() {
        let f = FiniteDifference::new(FnEval::new(2, |x: &[f64]| x[0] * x[0] * x[1]));
        let p = taylor_poly(&f, 2, &[0.5, 0.5]).unwrap();
        assert!((taylor_eval(&p, &[0.6, 0.4]) - f.value(&[0.6, 0.4])).abs() < 1e-3);
    }

    #[test]
    fn splits() {
        assert_eq!(smoothness_split(1.0), (0, 1.0));
        assert_eq!(smoothness_split(2.0), (1, 1.0));
        let (u, v) = smoothness_split(1.5);
        assert_eq!(u, 1);
        assert!((v - 0.5).abs() < 1e-15);
        let missing = FnEval::new(1, |x: &[f64]| x[0]);
        struct NoDeriv<E>(E);
        impl<E: Evaluable> Evaluable for NoDeriv<E> {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn value(&self, x: &[f64]) -> f64 {
                self.0.value(x)
            }
        }
        impl<E: Evaluable> Smooth for NoDeriv<E> {
            fn partial(&self, _: &[u32], _: &[f64]) -> Result<f64> {
                Err(Error::Capability("no derivatives".into()))
            }
        }
        assert!(matches!(taylor_poly(&NoDeriv(missing), 1, &[0.0]), Err(Error::Capability(_))));
    }
}
