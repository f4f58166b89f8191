//! Multivariate polynomials in shifted monomials `(x - center)^alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Evaluable, Smooth};

/// Exponent vector `alpha` of a monomial.
pub type MultiIndex = Vec<u32>;

pub fn order(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of monomials of degree at most `degree` in `d` variables,
/// `C(degree + d, d)`.
pub fn monomial_count(d: usize, degree: u32) -> usize {
    binomial(degree as u64 + d as u64, d as u64) as usize
}

/// All multi-indices with `|alpha| <= max_degree`, graded by total degree and
/// lexicographic (first coordinate largest first) within a degree.
pub fn multi_indices(d: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        out.extend(multi_indices_of_order(d, deg));
    }
    out
}

/// All multi-indices with `|alpha| == order`.
pub fn multi_indices_of_order(d: usize, order: u32) -> Vec<MultiIndex> {
    fn rec(d: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == d {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=left).rev() {
            prefix.push(a);
            rec(d, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    rec(d, order, &mut Vec::with_capacity(d), &mut out);
    out
}

/// `sum_alpha c_alpha (x - center)^alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    center: Vec<f64>,
    terms: Vec<(MultiIndex, f64)>,
}

impl Polynomial {
    pub fn new(center: Vec<f64>, terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        let d = center.len();
        if d == 0 {
            return Err(Error::Precondition("polynomial needs at least one variable".into()));
        }
        if let Some((a, _)) = terms.iter().find(|(a, _)| a.len() != d) {
            return Err(Error::Incompatible(format!("multi-index {a:?} has wrong length for d = {d}")));
        }
        if terms.iter().any(|(_, c)| !c.is_finite()) {
            return Err(Error::Domain("non-finite polynomial coefficient".into()));
        }
        Ok(Self { center, terms })
    }

    /// Polynomial expanded about the origin.
    pub fn at_origin(d: usize, terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        Self::new(vec![0.0; d], terms)
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self { center: vec![0.0; d], terms: vec![(vec![0; d], c)] }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().filter(|(_, c)| *c != 0.0).map(|(a, _)| order(a)).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| *c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            center: self.center.clone(),
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * factor)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (alpha, c) in &self.terms {
            if *c == 0.0 {
                continue;
            }
            let mut m = *c;
            for ((&a, xi), ci) in alpha.iter().zip(x).zip(&self.center) {
                if a > 0 {
                    m *= (xi - ci).powi(a as i32);
                }
            }
            acc += m;
        }
        acc
    }

    /// `∂^beta` of the polynomial at `x`.
    pub fn partial_at(&self, beta: &[u32], x: &[f64]) -> f64 {
        let mut acc = 0.0;
        'terms: for (alpha, c) in &self.terms {
            let mut m = *c;
            for (i, (&a, &b)) in alpha.iter().zip(beta).enumerate() {
                if b > a {
                    continue 'terms;
                }
                // a! / (a-b)! * t^(a-b)
                let falling = ((a - b + 1)..=a).fold(1.0, |f, k| f * k as f64);
                m *= falling * (x[i] - self.center[i]).powi((a - b) as i32);
            }
            acc += m;
        }
        acc
    }

    /// Maximum of `|p|` over a tensor grid of `per_axis` points on `[0,1]^d`.
    pub fn grid_sup_on_unit_cube(&self, per_axis: usize) -> f64 {
        let d = self.dim();
        self.grid_sup_on_box(&vec![0.0; d], &vec![1.0; d], per_axis)
    }

    /// Maximum of `|p|` over a tensor grid of `per_axis` points on the box
    /// `[lo, hi]`.
    pub fn grid_sup_on_box(&self, lo: &[f64], hi: &[f64], per_axis: usize) -> f64 {
        if self.degree() == 0 {
            return self.terms.iter().map(|(_, c)| c).sum::<f64>().abs();
        }
        let d = self.dim();
        let n = per_axis.max(2);
        let total = n.pow(d as u32);
        let mut x = vec![0.0; d];
        let mut best = 0.0f64;
        for idx in 0..total {
            let mut rest = idx;
            for (i, xi) in x.iter_mut().enumerate().rev() {
                let t = (rest % n) as f64 / (n - 1) as f64;
                *xi = lo[i] + t * (hi[i] - lo[i]);
                rest /= n;
            }
            best = best.max(self.eval(&x).abs());
        }
        best
    }
}

impl Evaluable for Polynomial {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

impl Smooth for Polynomial {
    fn partial(&self, alpha: &[u32], x: &[f64]) -> Result<f64> {
        if alpha.len() != self.dim() || x.len() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got: x.len() });
        }
        Ok(self.partial_at(alpha, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_enumeration_counts() {
        for d in 1..=4 {
            for deg in 0..=4 {
                let idx = multi_indices(d, deg);
                assert_eq!(idx.len(), monomial_count(d, deg));
                assert!(idx.iter().all(|a| a.len() == d && order(a) <= deg));
            }
        }
        assert_eq!(multi_indices_of_order(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn eval_and_derivatives() {
        // 1 + 2 (x-1) + 3 (x-1)^2 (y-0.5)
        let p = Polynomial::new(
            vec![1.0, 0.5],
            vec![(vec![0, 0], 1.0), (vec![1, 0], 2.0), (vec![2, 1], 3.0)],
        )
        .unwrap();
        let x = [2.0, 1.5];
        assert_eq!(p.eval(&x), 1.0 + 2.0 + 3.0);
        assert_eq!(p.partial_at(&[1, 0], &x), 2.0 + 6.0);
        assert_eq!(p.partial_at(&[2, 1], &x), 6.0);
        assert_eq!(p.partial_at(&[3, 0], &x), 0.0);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(monomial_count(2, 1), 3);
    }

    #[test]
    fn box_sup_restricts_the_grid() {
        let p = Polynomial::new(vec![0.5], vec![(vec![1], 4.0)]).unwrap();
        assert_eq!(p.grid_sup_on_unit_cube(11), 2.0);
        assert_eq!(p.grid_sup_on_box(&[0.25], &[0.75], 11), 1.0);
        assert_eq!(Polynomial::constant(2, -3.0).grid_sup_on_box(&[0.0; 2], &[0.1; 2], 5), 3.0);
    }
}
