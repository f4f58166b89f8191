use serde::{Deserialize, Serialize};

use crate::constructors::{smoothness_split, GateEps};
use crate::error::{precondition, Result};

/// Fine resolution chosen from the sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_star: usize,
    /// `ceil((m (s/N^d)^(2/p) / ln m)^(1/(2r+d)))` before flooring.
    pub data_driven: usize,
    /// Whether the `4N` floor was binding.
    pub floored: bool,
}

/// `N_star = max(4N, ceil((m (s/N^d)^(2/p) / ln m)^(1/(2r+d))))`.
pub fn choose_resolution(m: usize, s: usize, n: usize, d: usize, r: f64, p: f64) -> Result<Resolution> {
    precondition(m >= 2, || format!("m must be at least 2, got {m}"))?;
    precondition(n >= 1 && d >= 1 && s >= 1, || "N, d and s must be positive".to_string())?;
    precondition(r > 0.0 && p >= 1.0, || format!("need r > 0 and p >= 1, got r = {r}, p = {p}"))?;
    let mf = m as f64;
    let density = s as f64 / (n as f64).powi(d as i32);
    let base = mf * density.powf(2.0 / p) / mf.ln();
    let data_driven = base.powf(1.0 / (2.0 * r + d as f64)).ceil().max(1.0) as usize;
    let floor = 4 * n;
    Ok(Resolution { n_star: data_driven.max(floor), data_driven, floored: data_driven < floor })
}

/// `s / (2 N^d N_star^(1 + p r))`.
pub fn choose_tau(s: usize, n: usize, d: usize, n_star: usize, r: f64, p: f64) -> Result<f64> {
    precondition(n_star >= 1, || format!("N_star must be at least 1, got {n_star}"))?;
    precondition(s >= 1 && n >= 1 && d >= 1, || "N, d and s must be positive".to_string())?;
    let nd = (n as f64).powi(d as i32);
    Ok(s as f64 / (2.0 * nd * (n_star as f64).powf(1.0 + p * r)))
}

/// `max(2 N^d N_star^(1+pr) / s, N_star^(2d+r) (N^d/s)^(1/p))`, all
/// constants set to one.
pub fn weight_bound(s: usize, n: usize, d: usize, n_star: usize, r: f64, p: f64) -> f64 {
    let nd = (n as f64).powi(d as i32);
    let ns = n_star as f64;
    let first = 2.0 * nd * ns.powf(1.0 + p * r) / s as f64;
    let second = ns.powf(2.0 * d as f64 + r) * (nd / s as f64).powf(1.0 / p);
    first.max(second)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n: usize,
    pub s: usize,
    pub d: usize,
    pub r: f64,
    pub p: f64,
    pub n_star: usize,
    pub tau: f64,
    /// Local polynomial degree.
    pub u: u32,
    /// Parameter bound `R`; larger entries are clipped.
    pub weight_bound: f64,
    pub eps: GateEps,
}

impl Hyperparams {
    pub fn new(n: usize, s: usize, d: usize, r: f64, p: f64, n_star: usize) -> Result<Self> {
        precondition(n_star >= 4 * n, || format!("N_star = {n_star} must be at least 4N = {}", 4 * n))?;
        let cells = (n as u64).checked_pow(d as u32).unwrap_or(u64::MAX);
        precondition(s >= 1 && s as u64 <= cells, || format!("s = {s} outside [1, N^d]"))?;
        let tau = choose_tau(s, n, d, n_star, r, p)?;
        let (u, _) = smoothness_split(r);
        Ok(Self {
            n,
            s,
            d,
            r,
            p,
            n_star,
            tau,
            u,
            weight_bound: weight_bound(s, n, d, n_star, r, p),
            eps: GateEps::Default,
        })
    }

    /// Parameters with `N_star` chosen from the sample size.
    pub fn for_sample(m: usize, n: usize, s: usize, d: usize, r: f64, p: f64) -> Result<(Self, Resolution)> {
        let res = choose_resolution(m, s, n, d, r, p)?;
        Ok((Self::new(n, s, d, r, p, res.n_star)?, res))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_rule() {
        let base: f64 = 65536.0 * 0.25 / 65536f64.ln();
        assert_eq!(base.powf(1.0 / 6.0).ceil(), 4.0);
        let r = choose_resolution(65536, 4, 4, 2, 2.0, 2.0).unwrap();
        assert_eq!((r.n_star, r.data_driven, r.floored), (16, 4, true));
        let tiny = choose_resolution(2, 1, 3, 1, 1.0, 2.0).unwrap();
        assert_eq!(tiny.n_star, 12);
        assert!(tiny.floored);
        let big = choose_resolution(1 << 20, 2, 2, 1, 1.0, 2.0).unwrap();
        assert!(!big.floored && big.n_star == big.data_driven);
        let mut prev = 0;
        for k in 1..24 {
            let n = choose_resolution(1 << k, 1, 1, 1, 1.0, 2.0).unwrap().n_star;
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn tau_and_bound() {
        assert_eq!(choose_tau(1, 2, 1, 8, 1.0, 2.0).unwrap(), 1.0 / 2048.0);
        let full = choose_tau(9, 3, 2, 12, 1.5, 2.0).unwrap();
        assert!((full - 0.5 / 12f64.powf(4.0)).abs() < 1e-18);
        assert!(choose_tau(1, 2, 1, 0, 1.0, 2.0).is_err());
        let hp = Hyperparams::new(2, 1, 1, 1.0, 2.0, 8).unwrap();
        assert!(hp.weight_bound >= 1.0 / hp.tau);
        assert_eq!(hp.u, 0);
        assert!(Hyperparams::new(2, 1, 1, 1.0, 2.0, 7).is_err());
    }
}
