//! Sampled Hölder checks of order-`u` derivatives.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructors::taylor::smoothness_split;
use crate::error::{precondition, Result};
use crate::eval::Smooth;
use crate::poly::multi_indices_of_order;
use crate::rng::rng_from;
use crate::targets::target::SparseSmoothTarget;

/// Pair categories, following where the two points fall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStratum {
    SameCell,
    DifferentCells,
    OneInside,
    BothOutside,
}

const STRATA: [PairStratum; 4] =
    [PairStratum::SameCell, PairStratum::DifferentCells, PairStratum::OneInside, PairStratum::BothOutside];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumSummary {
    pub stratum: PairStratum,
    pub pairs: usize,
    pub max_ratio: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub r: f64,
    pub c0: f64,
    pub tol: f64,
    pub pairs: usize,
    pub seed: u64,
    /// Largest `|d^alpha f(x) - d^alpha f(x')| / |x - x'|^v` seen.
    pub max_ratio: f64,
    /// Pairs with ratio above `c0 (1 + tol)`.
    pub violations: usize,
    pub strata: Vec<StratumSummary>,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn uniform_in_cell(rng: &mut ChaCha8Rng, lo: &[f64], side: f64) -> Vec<f64> {
    lo.iter().map(|&l| l + side * rng.gen::<f64>()).collect()
}

fn cell_corner(part: &crate::constructors::partition::CubicPartition, k: usize) -> Vec<f64> {
    let side = part.side();
    part.multi_index(k).into_iter().map(|i| i as f64 * side).collect()
}

fn point_in_support(f: &SparseSmoothTarget, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sup = f.support();
    let j = sup.indices[rng.gen_range(0..sup.s())];
    uniform_in_cell(rng, &cell_corner(&sup.partition, j), sup.partition.side())
}

fn point_outside(f: &SparseSmoothTarget, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    if f.support().is_full() {
        return None;
    }
    let d = f.support().dim();
    loop {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        if !f.support().contains(&x) {
            return Some(x);
        }
    }
}

/// Two points in one smooth piece: the second is displaced from the first
/// by a log-uniform distance in a random direction and kept in the cell.
fn same_cell_pair(f: &SparseSmoothTarget, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let part = f.piece_partition();
    let x = point_in_support(f, rng);
    let k = part.cell_of(&x);
    let lo = cell_corner(part, k);
    let side = part.side();
    let d = x.len();
    let dist = side * 10f64.powf(rng.gen_range(-4.0..0.0));
    let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = dir.iter().map(|t| t * t).sum::<f64>().sqrt().max(1e-12);
    let y = x
        .iter()
        .zip(&dir)
        .zip(&lo)
        .map(|((&xi, &di), &l)| (xi + dist * di / norm).clamp(l, l + side))
        .collect();
    (x, y)
}

fn sample_pair(f: &SparseSmoothTarget, stratum: PairStratum, rng: &mut ChaCha8Rng) -> Option<(Vec<f64>, Vec<f64>)> {
    match stratum {
        PairStratum::SameCell => Some(same_cell_pair(f, rng)),
        PairStratum::DifferentCells => Some((point_in_support(f, rng), point_in_support(f, rng))),
        PairStratum::OneInside => Some((point_in_support(f, rng), point_outside(f, rng)?)),
        PairStratum::BothOutside => Some((point_outside(f, rng)?, point_outside(f, rng)?)),
    }
}

/// Sample `n_pairs` pairs split evenly over the four strata and compare the
/// Hölder ratios of all order-`u` derivatives to `c0 (1 + tol)`.
pub fn verify_lipschitz(
    f: &SparseSmoothTarget,
    r: f64,
    c0: f64,
    n_pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<LipschitzReport> {
    precondition(r > 0.0 && c0 > 0.0 && tol >= 0.0, || "r and c0 must be positive, tol nonnegative".into())?;
    let (u, v) = smoothness_split(r);
    let d = f.support().dim();
    let alphas = multi_indices_of_order(d, u);
    let limit = c0 * (1.0 + tol);
    let per = n_pairs / 4;
    let mut strata = Vec::with_capacity(4);
    for (si, &stratum) in STRATA.iter().enumerate() {
        let count = if si < n_pairs % 4 { per + 1 } else { per };
        let mut rng = rng_from(seed, &[0x11u64, si as u64]);
        let mut summary = StratumSummary { stratum, pairs: 0, max_ratio: 0.0, violations: 0 };
        for _ in 0..count {
            let Some((x, y)) = sample_pair(f, stratum, &mut rng) else { break };
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if dist == 0.0 {
                continue;
            }
            let mut ratio = 0.0f64;
            for alpha in &alphas {
                let diff = (f.partial(alpha, &x)? - f.partial(alpha, &y)?).abs();
                ratio = ratio.max(diff / dist.powf(v));
            }
            summary.pairs += 1;
            summary.max_ratio = summary.max_ratio.max(ratio);
            if ratio > limit {
                summary.violations += 1;
            }
        }
        strata.push(summary);
    }
    Ok(LipschitzReport {
        r,
        c0,
        tol,
        pairs: strata.iter().map(|s| s.pairs).sum(),
        seed,
        max_ratio: strata.iter().map(|s| s.max_ratio).fold(0.0, f64::max),
        violations: strata.iter().map(|s| s.violations).sum(),
        strata,
    })
}
