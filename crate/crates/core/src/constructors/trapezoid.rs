//! Trapezoid gates and the two-hidden-layer bump net built from them.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::net::block::Affine;
use crate::net::{Block, ConstructionTag, ReluNet};
use crate::sparse::SparseMatrix;

/// Plateau `[a, b]` with linear ramps of width `tau` on both sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidSpec {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
}

impl TrapezoidSpec {
    pub fn new(a: f64, b: f64, tau: f64) -> Result<Self> {
        let spec = Self { a, b, tau };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        precondition(self.a.is_finite() && self.b.is_finite() && self.a < self.b, || {
            format!("trapezoid needs finite a < b, got a = {}, b = {}", self.a, self.b)
        })?;
        precondition(self.tau > 0.0 && self.tau <= 1.0, || format!("tau must lie in (0, 1], got {}", self.tau))
    }
}

/// Closed-form value of the trapezoid.
pub fn trapezoid_value(spec: &TrapezoidSpec, t: f64) -> f64 {
    let TrapezoidSpec { a, b, tau } = *spec;
    if (a..=b).contains(&t) {
        1.0
    } else if t <= a - tau || t >= b + tau {
        0.0
    } else if t > b {
        (b + tau - t) / tau
    } else {
        (t - a + tau) / tau
    }
}

/// Offsets of the four ramp units `relu(t - o)`.
fn ramp_offsets(spec: &TrapezoidSpec) -> [f64; 4] {
    [spec.a - spec.tau, spec.a, spec.b, spec.b + spec.tau]
}

fn ramp_readout(tau: f64) -> [f64; 4] {
    let w = 1.0 / tau;
    [w, -w, -w, w]
}

/// One hidden layer of four units.
pub fn trapezoid_net(spec: &TrapezoidSpec) -> Result<ReluNet> {
    spec.validate()?;
    let offsets = ramp_offsets(spec);
    let w = SparseMatrix::from_dense(4, 1, &[1.0; 4]);
    let layer = crate::net::Layer::new(w, offsets.iter().map(|o| -o).collect())?;
    ReluNet::new(1, vec![layer], ramp_readout(spec.tau).to_vec(), ConstructionTag::Trapezoid)
}

/// `relu(sum_j T(x_j - center_j) - (d - 1))` as a block on `d` inputs.
pub(crate) fn bump_block(spec: &TrapezoidSpec, center: &[f64]) -> Block {
    let d = center.len();
    let offsets = ramp_offsets(spec);
    let readout = ramp_readout(spec.tau);
    let w1 = SparseMatrix::from_triplets(4 * d, d, (0..d).flat_map(|j| (0..4).map(move |q| (4 * j + q, j, 1.0))));
    let b1 = (0..d).flat_map(|j| offsets.iter().map(move |o| -(center[j] + o))).collect();
    let w2 = SparseMatrix::from_triplets(1, 4 * d, (0..4 * d).map(|i| (0, i, readout[i % 4])));
    let b2 = vec![-(d as f64 - 1.0)];
    Block::new(
        d,
        vec![Affine::new(w1, b1), Affine::new(w2, b2)],
        Affine::new(SparseMatrix::identity(1), vec![0.0]),
    )
}

/// Bump net on `R^d`: 1 on `[a,b]^d`, 0 outside `[a-tau, b+tau]^d`.
pub fn bump_net(a: f64, b: f64, tau: f64, d: usize) -> Result<ReluNet> {
    let spec = TrapezoidSpec::new(a, b, tau)?;
    precondition(d >= 1, || "bump net needs d >= 1".into())?;
    bump_block(&spec, &vec![0.0; d]).into_net(ConstructionTag::Bump)
}

/// Closed-form value of the bump net at `x - center`.
pub fn bump_value(spec: &TrapezoidSpec, center: &[f64], x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let s: f64 = x.iter().zip(center).map(|(xi, ci)| trapezoid_value(spec, xi - ci)).sum();
    (s - (d - 1.0)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_pieces() {
        let s = TrapezoidSpec::new(0.0, 1.0, 0.5).unwrap();
        assert_eq!(trapezoid_value(&s, 0.5), 1.0);
        assert_eq!(trapezoid_value(&s, 1.25), 0.5);
        assert_eq!(trapezoid_value(&s, -0.6), 0.0);
        assert_eq!(trapezoid_value(&s, -0.25), 0.5);
    }

    #[test]
    fn net_matches_closed_form() {
        let s = TrapezoidSpec::new(-0.3, 0.7, 0.5).unwrap();
        let net = trapezoid_net(&s).unwrap();
        let st = net.inspect();
        assert_eq!((st.depth, st.widths.clone()), (1, vec![4]));
        for i in 0..=10_000 {
            let t = s.a - 2.0 * s.tau + (s.b - s.a + 4.0 * s.tau) * i as f64 / 10_000.0;
            assert!((net.eval(&[t]).unwrap() - trapezoid_value(&s, t)).abs() < 1e-12);
        }
        assert_eq!(net.eval(&[s.a - s.tau]).unwrap(), 0.0);
        let half = trapezoid_net(&TrapezoidSpec::new(0.0, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(half.eval(&[0.5]).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_specs_rejected() {
        assert!(TrapezoidSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(TrapezoidSpec::new(0.0, 1.0, 1.5).is_err());
        assert!(TrapezoidSpec::new(1.0, 1.0, 0.5).is_err());
        assert!(bump_net(0.0, 1.0, 0.1, 0).is_err());
    }

    #[test]
    fn bump_examples() {
        let net = bump_net(0.0, 1.0, 0.1, 2).unwrap();
        let st = net.inspect();
        assert_eq!(st.depth, 2);
        assert_eq!(st.widths.iter().sum::<usize>(), 9);
        assert!((net.eval(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(net.eval(&[1.2, 0.5]).unwrap(), 0.0);
        assert!((net.eval(&[1.05, 0.5]).unwrap() - 0.5).abs() < 1e-12);
    }
}
