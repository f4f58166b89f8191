use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constructors::partition::{CubicPartition, PartitionIndex};
use crate::constructors::taylor::smoothness_split;
use crate::error::{precondition, Error, Result};
use crate::eval::{Evaluable, Smooth};
use crate::poly::{binomial, multi_indices, order, MultiIndex, Polynomial};
use crate::rng::rng_from;
use crate::targets::profile::{bump_profile, SmoothBumpProfile};
use crate::targets::support::{make_support, SparsitySupport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Random-sign scaled bumps on the fine cells inside the support.
    RademacherBump,
    /// A random polynomial times a smooth bump on every support cell.
    CellwisePolynomialBump,
}

#[derive(Clone, Debug)]
enum Pieces {
    Rademacher {
        fine: CubicPartition,
        profile: SmoothBumpProfile,
        /// Sign per fine cell; 0 for cells not contained in the support.
        signs: Vec<i8>,
    },
    Cellwise {
        profile: SmoothBumpProfile,
        /// Local polynomial per coarse cell, in coordinates `N (x - center)`.
        polys: Vec<Option<Polynomial>>,
    },
}

/// A smooth function supported on a union of coarse cells.
#[derive(Clone, Debug)]
pub struct SparseSmoothTarget {
    support: SparsitySupport,
    kind: TargetKind,
    r: f64,
    c0: f64,
    sup_bound: f64,
    factor: f64,
    pieces: Pieces,
}

/// `f = sum_k eps_k (N*)^-r g(N* (x - xi_k))` over the fine cells contained
/// in the support, with fair random signs; zero elsewhere.
///
/// The class constant is the matched value `H 2^(1-v)`, where `H` is the
/// Hölder constant of the profile's order-`u` derivatives.
pub fn rademacher_sparse_target(
    support: &SparsitySupport,
    n_star: usize,
    r: f64,
    profile: &SmoothBumpProfile,
    seed: u64,
) -> Result<SparseSmoothTarget> {
    precondition(r > 0.0, || format!("r must be positive, got {r}"))?;
    precondition(profile.dim() == support.dim(), || "profile dimension differs from support".into())?;
    let part = PartitionIndex { coarse: support.partition.clone(), fine: CubicPartition::new(n_star, support.dim())? };
    let mut rng = rng_from(seed, &[0xAu64, n_star as u64]);
    let signs = (0..part.fine.len())
        .map(|k| {
            let sign: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
            match part.enclosing_coarse(k) {
                Some(j) if support.contains_cell(j) => sign,
                _ => 0,
            }
        })
        .collect();
    let (_, v) = smoothness_split(r);
    let c0 = profile.holder_constant() * 2f64.powf(1.0 - v);
    let sup_bound = (n_star as f64).powf(-r) * profile.amplitude().abs();
    Ok(SparseSmoothTarget {
        support: support.clone(),
        kind: TargetKind::RademacherBump,
        r,
        c0,
        sup_bound,
        factor: 1.0,
        pieces: Pieces::Rademacher { fine: part.fine, profile: profile.clone(), signs },
    })
}

/// Coefficients of the local polynomial of coarse cell `j`: constant term
/// of magnitude in `[0.5, 1]` with random sign, the rest in `[-0.5, 0.5]`.
fn cell_polynomial(d: usize, u: u32, seed: u64, j: usize) -> Polynomial {
    let mut rng = rng_from(seed, &[0xCu64, j as u64]);
    let terms: Vec<(MultiIndex, f64)> = multi_indices(d, u)
        .into_iter()
        .map(|a| {
            let c = if order(&a) == 0 {
                let m: f64 = rng.gen_range(0.5..=1.0);
                if rng.gen_bool(0.5) { m } else { -m }
            } else {
                rng.gen_range(-0.5..=0.5)
            };
            (a, c)
        })
        .collect();
    Polynomial::at_origin(d, terms).expect("consistent")
}

/// `f(x) = q_j(z) prod_i phi(z_i)` with `z = N (x - zeta_j)` on each support
/// cell `j`, where `phi` has plateau `[-1/4, 1/4]` and vanishes with all
/// derivatives on the cell boundary. The polynomial of a cell depends only on
/// `(seed, j)`. The class constant is `H 2^(1-v)` with `H` the estimated
/// within-cell Hölder constant; the factor covers pairs in different cells.
pub fn cellwise_polynomial_target(support: &SparsitySupport, r: f64, seed: u64) -> Result<SparseSmoothTarget> {
    precondition(r > 0.0, || format!("r must be positive, got {r}"))?;
    let d = support.dim();
    let (u, _) = smoothness_split(r);
    let profile = SmoothBumpProfile::with_half_plateau(r, d, 0.25);
    let mut polys = vec![None; support.partition.len()];
    let mut sup_bound = 0.0f64;
    for &j in &support.indices {
        let q = cell_polynomial(d, u, seed, j);
        let bound: f64 = q.terms().iter().map(|(a, c)| c.abs() * 0.5f64.powi(order(a) as i32)).sum();
        sup_bound = sup_bound.max(bound);
        polys[j] = Some(q);
    }
    let mut target = SparseSmoothTarget {
        support: support.clone(),
        kind: TargetKind::CellwisePolynomialBump,
        r,
        c0: 0.0,
        sup_bound,
        factor: 1.0,
        pieces: Pieces::Cellwise { profile, polys },
    };
    let (_, v) = smoothness_split(r);
    target.c0 = target.cellwise_holder_constant() * 2f64.powf(1.0 - v);
    Ok(target)
}

impl SparseSmoothTarget {
    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn support(&self) -> &SparsitySupport {
        &self.support
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Class constant the target was built for.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub(crate) fn set_c0(&mut self, c0: f64) {
        self.c0 = c0;
    }

    /// Bound on `|f|` over `R^d`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Fine resolution of the rademacher kind.
    pub fn n_star(&self) -> Option<usize> {
        match &self.pieces {
            Pieces::Rademacher { fine, .. } => Some(fine.per_axis()),
            Pieces::Cellwise { .. } => None,
        }
    }

    /// Sign vector of the rademacher kind (0 off the support).
    pub fn signs(&self) -> Option<&[i8]> {
        match &self.pieces {
            Pieces::Rademacher { signs, .. } => Some(signs),
            Pieces::Cellwise { .. } => None,
        }
    }

    /// The partition whose cells carry one smooth piece each.
    pub fn piece_partition(&self) -> &CubicPartition {
        match &self.pieces {
            Pieces::Rademacher { fine, .. } => fine,
            Pieces::Cellwise { .. } => &self.support.partition,
        }
    }

    /// `factor * f`; the class constant and sup bound are kept from `f`
    /// except for the sup bound, which scales.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { factor: self.factor * factor, sup_bound: self.sup_bound * factor.abs(), ..self.clone() }
    }

    fn in_cube(x: &[f64]) -> bool {
        x.iter().all(|t| (0.0..=1.0).contains(t))
    }

    fn partial_unchecked(&self, alpha: &[u32], x: &[f64]) -> f64 {
        if !Self::in_cube(x) {
            return 0.0;
        }
        let v = match &self.pieces {
            Pieces::Rademacher { fine, profile, signs } => {
                let k = fine.cell_of(x);
                let sign = signs[k];
                if sign == 0 {
                    return 0.0;
                }
                let ns = fine.per_axis() as f64;
                let z: Vec<f64> = x.iter().zip(fine.center(k)).map(|(t, c)| ns * (t - c)).collect();
                sign as f64 * ns.powf(order(alpha) as f64 - self.r) * profile.partial(alpha, &z)
            }
            Pieces::Cellwise { profile, polys } => {
                let coarse = &self.support.partition;
                let j = coarse.cell_of(x);
                let Some(q) = &polys[j] else { return 0.0 };
                let n = coarse.per_axis() as f64;
                let z: Vec<f64> = x.iter().zip(coarse.center(j)).map(|(t, c)| n * (t - c)).collect();
                n.powi(order(alpha) as i32) * leibniz(q, profile, alpha, &z)
            }
        };
        self.factor * v
    }

    /// Hölder constant of the order-`u` derivatives over all support cells,
    /// estimated on a grid in local coordinates.
    fn cellwise_holder_constant(&self) -> f64 {
        let Pieces::Cellwise { profile, polys } = &self.pieces else { unreachable!() };
        let d = self.support.dim();
        let (u, v) = smoothness_split(self.r);
        let n = self.support.n() as f64;
        let per_axis: usize = match d {
            1 => 4001,
            2 => 201,
            3 => 41,
            _ => 15,
        };
        let total = (per_axis as usize).pow(d as u32);
        let mut best = 0.0f64;
        for q in polys.iter().flatten() {
            for alpha in crate::poly::multi_indices_of_order(d, u) {
                let (mut lip, mut hi, mut lo) = (0.0f64, f64::NEG_INFINITY, f64::INFINITY);
                let mut z = vec![0.0; d];
                for flat in 0..total {
                    let mut rest = flat;
                    for zi in z.iter_mut().rev() {
                        *zi = -0.5 + (rest % per_axis) as f64 / (per_axis - 1) as f64;
                        rest /= per_axis;
                    }
                    let h = leibniz(q, profile, &alpha, &z);
                    hi = hi.max(h);
                    lo = lo.min(h);
                    let mut g2 = 0.0;
                    for i in 0..d {
                        let mut beta = alpha.clone();
                        beta[i] += 1;
                        let gi = leibniz(q, profile, &beta, &z);
                        g2 += gi * gi;
                    }
                    lip = lip.max(g2.sqrt());
                }
                // derivatives in x carry N^|alpha| and the distance another N^v
                let scale = n.powf(u as f64 + v);
                let c = if v >= 1.0 { lip } else { lip.powf(v) * (hi - lo).powf(1.0 - v) };
                best = best.max(c * scale);
            }
        }
        best * self.factor.abs()
    }
}

/// `d^alpha [q(z) prod_i phi(z_i)]` by the Leibniz rule.
fn leibniz(q: &Polynomial, profile: &SmoothBumpProfile, alpha: &[u32], z: &[f64]) -> f64 {
    let d = alpha.len();
    let mut beta = vec![0u32; d];
    let mut acc = 0.0;
    loop {
        let weight: f64 = alpha.iter().zip(&beta).map(|(&a, &b)| binomial(a as u64, b as u64) as f64).product();
        let q_part = q.partial_at(&beta, z);
        if q_part != 0.0 {
            let rest: Vec<u32> = alpha.iter().zip(&beta).map(|(a, b)| a - b).collect();
            acc += weight * q_part * profile.partial(&rest, z);
        }
        // next beta <= alpha in odometer order
        let mut i = 0;
        loop {
            if i == d {
                return acc;
            }
            if beta[i] < alpha[i] {
                beta[i] += 1;
                break;
            }
            beta[i] = 0;
            i += 1;
        }
    }
}

impl Evaluable for SparseSmoothTarget {
    fn dim(&self) -> usize {
        self.support.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.partial_unchecked(&vec![0; x.len()], x)
    }
}

impl Smooth for SparseSmoothTarget {
    fn partial(&self, alpha: &[u32], x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d || alpha.len() != d {
            return Err(Error::Shape { expected: d, got: x.len().max(alpha.len()) });
        }
        Ok(self.partial_unchecked(alpha, x))
    }
}

/// Serializable description of a built-in target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: TargetKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub s: usize,
    /// Fine resolution; required for the rademacher kind.
    #[serde(rename = "N_star", default, skip_serializing_if = "Option::is_none")]
    pub n_star: Option<usize>,
    pub r: f64,
    /// Class constant; `None` uses the constant matched to the construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    pub seed: u64,
}

impl TargetSpec {
    pub fn build(&self) -> Result<SparseSmoothTarget> {
        let support = make_support(self.n, self.d, self.s, self.seed)?;
        let mut target = match self.kind {
            TargetKind::RademacherBump => {
                let n_star = self
                    .n_star
                    .ok_or_else(|| Error::Precondition("rademacher targets need N_star".into()))?;
                rademacher_sparse_target(&support, n_star, self.r, &bump_profile(self.r, self.d), self.seed)?
            }
            TargetKind::CellwisePolynomialBump => cellwise_polynomial_target(&support, self.r, self.seed)?,
        };
        if let Some(c0) = self.c0 {
            precondition(c0 > 0.0, || format!("c0 must be positive, got {c0}"))?;
            target.set_c0(c0);
        }
        Ok(target)
    }
}
