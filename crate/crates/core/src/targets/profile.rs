//! Compactly supported smooth bump profiles.
//!
//! `phi(t) = 1` for `|t| <= a`, `0` for `|t| >= 2a`, and
//! `1 - S_n((|t| - a) / a)` in between, where `S_n` is the polynomial
//! smoothstep of order `n` (all derivatives up to order `n` vanish at both
//! band ends). Profiles on `R^d` are tensor products.

use serde::{Deserialize, Serialize};

use crate::constructors::taylor::smoothness_split;
use crate::poly::{binomial, multi_indices_of_order};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothBumpProfile {
    r: f64,
    d: usize,
    /// Half-width of the plateau.
    a: f64,
    amplitude: f64,
    /// Smoothstep coefficients in increasing powers of `w`.
    step: Vec<f64>,
}

fn smoothstep(n: u32) -> Vec<f64> {
    let n64 = n as u64;
    let mut c = vec![0.0; 2 * n as usize + 2];
    for k in 0..=n64 {
        let coeff = (binomial(n64 + k, k) * binomial(2 * n64 + 1, n64 - k)) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[(n64 + 1 + k) as usize] = sign * coeff;
    }
    c
}

fn poly_deriv_at(c: &[f64], j: u32, w: f64) -> f64 {
    c.iter()
        .enumerate()
        .filter(|(p, _)| *p as u32 >= j)
        .map(|(p, &cp)| {
            let p = p as u32;
            let falling = ((p - j + 1)..=p).fold(1.0, |f, q| f * q as f64);
            cp * falling * w.powi((p - j) as i32)
        })
        .sum()
}

impl SmoothBumpProfile {
    /// Profile with plateau `[-a, a]^d` and support `[-2a, 2a]^d`.
    pub fn with_half_plateau(r: f64, d: usize, a: f64) -> Self {
        assert!(r > 0.0 && d >= 1 && a > 0.0);
        let n = r.ceil() as u32 + 1;
        Self { r, d, a, amplitude: 1.0, step: smoothstep(n) }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_plateau(&self) -> f64 {
        self.a
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Order of the smoothstep.
    pub fn order(&self) -> u32 {
        (self.step.len() as u32 - 2) / 2
    }

    /// Same profile multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { amplitude: self.amplitude * factor, ..self.clone() }
    }

    /// `j`-th derivative of the one-dimensional profile (without amplitude).
    pub fn phi(&self, j: u32, t: f64) -> f64 {
        let at = t.abs();
        if at >= 2.0 * self.a {
            return 0.0;
        }
        if at <= self.a {
            return if j == 0 { 1.0 } else { 0.0 };
        }
        let w = (at - self.a) / self.a;
        let dw = poly_deriv_at(&self.step, j, w) / self.a.powi(j as i32);
        let sign = if t < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
        if j == 0 {
            1.0 - dw
        } else {
            -sign * dw
        }
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.amplitude * z.iter().map(|&t| self.phi(0, t)).product::<f64>()
    }

    pub fn partial(&self, alpha: &[u32], z: &[f64]) -> f64 {
        self.amplitude * alpha.iter().zip(z).map(|(&j, &t)| self.phi(j, t)).product::<f64>()
    }

    /// Hölder constant of the order-`u` derivatives with exponent `v`, where
    /// `r = u + v`, estimated on a grid over the support.
    ///
    /// For `v = 1` this is the largest gradient norm of any `d^alpha g`,
    /// `|alpha| = u`. For `v < 1` the bound `L^v osc^(1 - v)` (which bounds
    /// `min(L |h|, osc)`) is tightened in `d <= 2` by a search over grid
    /// pairs with a 2% margin.
    pub fn holder_constant(&self) -> f64 {
        let (u, v) = smoothness_split(self.r);
        let d = self.d;
        let per_axis: usize = match d {
            1 => 20_001,
            2 => 801,
            3 => 121,
            _ => 41,
        };
        let lo = -2.0 * self.a;
        let step = 4.0 * self.a / (per_axis - 1) as f64;
        let axis: Vec<f64> = (0..per_axis).map(|i| lo + step * i as f64).collect();
        let orders = (u + 1) as usize + 1;
        // tables[j][i] = phi^(j)(axis[i])
        let tables: Vec<Vec<f64>> = (0..orders).map(|j| axis.iter().map(|&t| self.phi(j as u32, t)).collect()).collect();
        let total = per_axis.pow(d as u32);
        let mut best = 0.0f64;
        for alpha in multi_indices_of_order(d, u) {
            let (mut lip, mut hi, mut lo_v) = (0.0f64, f64::NEG_INFINITY, f64::INFINITY);
            let mut idx = vec![0usize; d];
            for flat in 0..total {
                let mut rest = flat;
                for slot in idx.iter_mut().rev() {
                    *slot = rest % per_axis;
                    rest /= per_axis;
                }
                let h: f64 = (0..d).map(|q| tables[alpha[q] as usize][idx[q]]).product();
                hi = hi.max(h);
                lo_v = lo_v.min(h);
                let mut g2 = 0.0;
                for i in 0..d {
                    let gi: f64 = (0..d)
                        .map(|q| tables[alpha[q] as usize + (q == i) as usize][idx[q]])
                        .product();
                    g2 += gi * gi;
                }
                lip = lip.max(g2.sqrt());
            }
            let c = if v >= 1.0 {
                lip
            } else {
                let bound = lip.powf(v) * (hi - lo_v).powf(1.0 - v);
                match self.pair_search(&alpha, v) {
                    Some(est) => bound.min(1.02 * est),
                    None => bound,
                }
            };
            best = best.max(c);
        }
        best * self.amplitude.abs()
    }
}

impl SmoothBumpProfile {
    /// Largest `|h(x) - h(y)| / |x - y|^v` over pairs of a grid on the
    /// support, `h = d^alpha g`; only for `d <= 2`.
    fn pair_search(&self, alpha: &[u32], v: f64) -> Option<f64> {
        let per_axis: usize = match self.d {
            1 => 4001,
            2 => 81,
            _ => return None,
        };
        let lo = -2.0 * self.a;
        let step = 4.0 * self.a / (per_axis - 1) as f64;
        let pts: Vec<(Vec<f64>, f64)> = (0..per_axis.pow(self.d as u32))
            .map(|flat| {
                let z: Vec<f64> = (0..self.d)
                    .map(|q| {
                        let i = flat / per_axis.pow((self.d - 1 - q) as u32) % per_axis;
                        lo + step * i as f64
                    })
                    .collect();
                let h = alpha.iter().zip(&z).map(|(&j, &t)| self.phi(j, t)).product::<f64>();
                (z, h)
            })
            .collect();
        let mut best = 0.0f64;
        for (i, (x, hx)) in pts.iter().enumerate() {
            for (y, hy) in &pts[i + 1..] {
                let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.max((hx - hy).abs() / dist2.powf(0.5 * v));
            }
        }
        Some(best)
    }
}

/// Profile `g` for the `d`-dimensional lower-bound family: `g = 1` on
/// `[-1/(4 sqrt d), 1/(4 sqrt d)]^d`, support `[-1/(2 sqrt d), 1/(2 sqrt d)]^d`.
pub fn bump_profile(r: f64, d: usize) -> SmoothBumpProfile {
    SmoothBumpProfile::with_half_plateau(r, d, 0.25 / (d as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_coefficients() {
        assert_eq!(smoothstep(1), vec![0.0, 0.0, 3.0, -2.0]);
        assert_eq!(smoothstep(2), vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
    }

    #[test]
    fn plateau_and_support() {
        for d in 1..=3 {
            let g = bump_profile(1.0, d);
            let edge = 0.5 / (d as f64).sqrt();
            assert_eq!(g.value(&vec![0.0; d]), 1.0);
            assert_eq!(g.value(&vec![0.5 * edge - 1e-12; d]), 1.0);
            let mut x = vec![0.0; d];
            x[d - 1] = edge;
            assert_eq!(g.value(&x), 0.0);
            x[d - 1] = -edge - 0.1;
            assert_eq!(g.value(&x), 0.0);
        }
    }

    #[test]
    fn transition_is_monotone() {
        let g = bump_profile(1.0, 1);
        let mid = g.phi(0, 0.375);
        assert!(mid > 0.0 && mid < 1.0);
        let vals: Vec<f64> = (0..=100).map(|i| g.phi(0, 0.25 + 0.25 * i as f64 / 100.0)).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = bump_profile(2.0, 1);
        let h = 1e-6;
        for &t in &[-0.4, -0.3, 0.3, 0.33, 0.45] {
            for j in 0..3 {
                let fd = (g.phi(j, t + h) - g.phi(j, t - h)) / (2.0 * h);
                let exact = g.phi(j + 1, t);
                assert!((fd - exact).abs() < 1e-4 * (1.0 + exact.abs()), "j = {j}, t = {t}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn derivatives_continuous_at_band_ends() {
        // unit-width band; dilations only rescale derivatives
        let g = SmoothBumpProfile::with_half_plateau(1.5, 1, 1.0);
        let h = 1e-4;
        for &edge in &[1.0, 2.0, -1.0, -2.0] {
            for j in 0..=g.r().ceil() as u32 {
                let jump = (g.phi(j, edge + h) - g.phi(j, edge - h)).abs();
                assert!(jump < 10.0 * h, "order {j} at {edge}: {jump}");
            }
        }
    }

    #[test]
    fn lipschitz_constant_of_one_dimensional_profile() {
        // max |phi'| for the order-2 smoothstep on a band of width a: 15/8 / a
        let g = bump_profile(1.0, 1);
        assert!((g.holder_constant() - 1.875 / 0.25).abs() < 1e-4);
        assert!((g.scaled(2.0).holder_constant() - 15.0).abs() < 1e-3);
    }
}
