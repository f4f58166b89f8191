//! Property suites behind `verify`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sparsenet::constructors::bump_net;
use sparsenet::net::{deserialize, serialize};
use sparsenet::rng::rng_from;
use sparsenet::ReluNet;

#[derive(Serialize)]
pub struct BumpSummary {
    pub d: usize,
    pub trials: usize,
    pub points_per_net: usize,
    pub seed: u64,
    pub max_deviation: f64,
    pub violations: usize,
}

/// Random `(a, b, tau)` bump nets checked on a tensor grid covering the
/// plateau, the ramps and the zero region.
pub fn bump_exactness(d: usize, trials: usize, points: usize, seed: u64) -> sparsenet::Result<BumpSummary> {
    let mut rng = rng_from(seed, &[d as u64]);
    let per_axis = ((points as f64).powf(1.0 / d as f64).ceil() as usize).max(2);
    let mut worst = 0.0f64;
    let mut violations = 0;
    for _ in 0..trials {
        let a = rng.gen_range(-0.5..0.5);
        let b = a + rng.gen_range(0.05..0.8);
        let tau = rng.gen_range(0.01..0.5);
        let net = bump_net(a, b, tau, d)?;
        let mut ev = net.evaluator();
        let (lo, hi) = (a - 1.5 * tau, b + 1.5 * tau);
        let mut x = vec![0.0; d];
        for idx in 0..per_axis.pow(d as u32) {
            let mut rest = idx;
            for xi in x.iter_mut() {
                *xi = lo + (hi - lo) * (rest % per_axis) as f64 / (per_axis - 1) as f64;
                rest /= per_axis;
            }
            let v = ev.eval(&x);
            let dev = if x.iter().all(|t| (a..=b).contains(t)) {
                (v - 1.0).abs()
            } else if x.iter().any(|t| *t < a - tau || *t > b + tau) {
                v.abs()
            } else {
                (-v).max(v - 1.0).max(0.0)
            };
            worst = worst.max(dev);
            if dev > 1e-9 {
                violations += 1;
            }
        }
    }
    Ok(BumpSummary { d, trials, points_per_net: per_axis.pow(d as u32), seed, max_deviation: worst, violations })
}

fn random_net(rng: &mut ChaCha8Rng) -> ReluNet {
    let d0 = rng.gen_range(1..=4usize);
    let depth = rng.gen_range(1..=4usize);
    let mut prev = d0;
    let mut layers = Vec::with_capacity(depth);
    for _ in 0..depth {
        let w = rng.gen_range(1..=8usize);
        let weights = (0..w * prev).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-5.0..5.0) }).collect();
        let bias = (0..w).map(|_| rng.gen_range(-1.0..1.0)).collect();
        layers.push((weights, bias));
        prev = w;
    }
    let readout = (0..prev).map(|_| rng.gen_range(-1e3..1e3)).collect();
    ReluNet::from_dense(d0, &layers, readout).expect("shapes chain by construction")
}

#[derive(Serialize)]
pub struct RoundtripSummary {
    pub nets: usize,
    pub seed: u64,
    pub bit_exact: usize,
    pub failures: usize,
}

pub fn roundtrips(nets: usize, seed: u64) -> sparsenet::Result<RoundtripSummary> {
    let mut rng = rng_from(seed, &[0x52]);
    let mut exact = 0;
    for _ in 0..nets {
        let net = random_net(&mut rng);
        let text = serialize(&net);
        let back = deserialize(text.as_bytes())?;
        if back == net && serialize(&back) == text {
            exact += 1;
        }
    }
    Ok(RoundtripSummary { nets, seed, bit_exact: exact, failures: nets - exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_are_seeded() {
        let a = bump_exactness(2, 5, 100, 3).unwrap();
        assert_eq!(a.violations, 0);
        assert_eq!(a.points_per_net, 100);
        assert_eq!(a.max_deviation, bump_exactness(2, 5, 100, 3).unwrap().max_deviation);
        assert_eq!(roundtrips(20, 9).unwrap().failures, 0);
    }
}
