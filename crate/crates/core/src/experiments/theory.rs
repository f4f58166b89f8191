use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCheck {
    pub satisfied: bool,
    /// `(m / ln m) s / N^(2r + 2d)`.
    pub ratio: f64,
}

/// Whether `m / ln m >= C* N^(2r+2d) / s` holds with `C*` replaced by the
/// supplied proxy. The true constant is not identifiable.
pub fn sample_size_gate_check(m: usize, n: usize, s: usize, d: usize, r: f64, cstar_proxy: f64) -> Result<GateCheck> {
    precondition(m >= 2, || format!("m must be at least 2, got {m}"))?;
    let mf = m as f64;
    let ratio = mf / mf.ln() * s as f64 / (n as f64).powf(2.0 * r + 2.0 * d as f64);
    Ok(GateCheck { satisfied: ratio >= cstar_proxy, ratio })
}

/// `3 (L+1)^2 n ln(c7 R D_max) + n ln(1/eps)`, the logarithm of the
/// covering number bound for the hypothesis space. A theory annotation with
/// a user-supplied constant, not a measured quantity.
pub fn covering_bound_log(n: f64, depth: f64, r_bound: f64, d_max: f64, eps: f64, c7: f64) -> Result<f64> {
    precondition([n, depth, r_bound, d_max, eps, c7].iter().all(|v| *v > 0.0 && v.is_finite()), || {
        "covering bound arguments must be positive".to_string()
    })?;
    Ok(3.0 * (depth + 1.0).powi(2) * n * (c7 * r_bound * d_max).ln() + n * (1.0 / eps).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_ratios() {
        let g = sample_size_gate_check(1_000_000, 2, 1, 1, 1.0, 1.0).unwrap();
        assert!((g.ratio - 1e6 / 1e6f64.ln() / 16.0).abs() < 1e-9);
        assert!((g.ratio - 4524.0).abs() < 1.0 && g.satisfied);
        let small = sample_size_gate_check(16, 8, 1, 2, 2.0, 1.0).unwrap();
        assert!(!small.satisfied && small.ratio < 1e-6);
        let n: usize = 3;
        let s = n.pow(6);
        let c = sample_size_gate_check(100, n, s, 2, 1.0, 1.0).unwrap();
        assert!((c.ratio - 100.0 / 100f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn covering_log() {
        let c7 = 0.5;
        let v = covering_bound_log(1.0, 1.0, std::f64::consts::E / c7, 1.0, 1.0, c7).unwrap();
        assert!((v - 12.0).abs() < 1e-12);
        assert_eq!(covering_bound_log(4.0, 2.0, 2.0, 0.5, 1.0, 1.0).unwrap(), 0.0);
        let a = covering_bound_log(3.0, 2.0, 5.0, 2.0, 0.1, 1.0).unwrap();
        let b = covering_bound_log(6.0, 2.0, 5.0, 2.0, 0.1, 1.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-9);
        assert!(covering_bound_log(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }
}
