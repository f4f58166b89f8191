//! Sparse local Taylor assemblies.
//!
//! The exact hybrid `N_2(x) = sum_k p_k(x) L_k(x)` multiplies local
//! polynomials `p_k` by the localized nets `L_k`. Its network realization
//! `N_3` replaces `p_k` by a polynomial gate and the product by a pair gate:
//! `N_3 = (B + 1) sum_k pair(h_k / (B + 1), L_k)`, where `B` bounds every
//! `|p_k|` on the support of `L_k`, so the gate inputs stay in `[-1, 1]`
//! wherever `L_k` is nonzero. Elsewhere the pair gate clamps its first
//! input and multiplies it by an exact zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructors::localized::{active_cells, check_tau_for_assembly, localized_block, localized_value};
use crate::constructors::partition::PartitionIndex;
use crate::constructors::poly_gate::poly_block;
use crate::constructors::product::{pair_block, sawtooth_count};
use crate::constructors::taylor::{smoothness_split, taylor_poly};
use crate::error::{precondition, Result};
use crate::eval::{Evaluable, Smooth};
use crate::net::{Block, ConstructionTag, ReluNet};
use crate::poly::Polynomial;

/// Accuracy of the polynomial and pair gates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateEps {
    /// `(N_star)^-(d + r)` for both gates.
    Default,
    Fixed { poly: f64, pair: f64 },
}

impl GateEps {
    pub fn resolve(&self, n_star: usize, d: usize, r: f64) -> (f64, f64) {
        match *self {
            GateEps::Default => {
                let e = (n_star as f64).powf(-(d as f64 + r));
                (e, e)
            }
            GateEps::Fixed { poly, pair } => (poly, pair),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyParams {
    /// Smoothness order.
    pub r: f64,
    /// Number of coarse cells in the support.
    pub s: usize,
    /// Norm exponent of the error bound the width is tuned for.
    pub p: f64,
    /// Localization width; `None` selects the largest admissible value.
    pub tau: Option<f64>,
    pub eps: GateEps,
}

impl AssemblyParams {
    pub fn new(r: f64, s: usize) -> Self {
        Self { r, s, p: 2.0, tau: None, eps: GateEps::Default }
    }

    /// `s / (2 N^d N_star^(1 + p r))`.
    pub fn max_tau(&self, partition: &PartitionIndex) -> f64 {
        let d = partition.dim() as i32;
        let n = partition.n() as f64;
        let ns = partition.n_star() as f64;
        self.s as f64 / (2.0 * n.powi(d) * ns.powf(1.0 + self.p * self.r))
    }

    pub fn resolve_tau(&self, partition: &PartitionIndex) -> Result<f64> {
        let max = self.max_tau(partition);
        let tau = self.tau.unwrap_or(max);
        precondition(tau > 0.0 && tau <= max, || format!("tau = {tau} outside the admissible range (0, {max}]"))?;
        Ok(tau)
    }

    fn validate(&self, partition: &PartitionIndex) -> Result<()> {
        precondition(self.r > 0.0 && self.r.is_finite(), || format!("r must be positive, got {}", self.r))?;
        precondition(self.p >= 1.0, || format!("p must be at least 1, got {}", self.p))?;
        let cells = partition.coarse.len();
        precondition(self.s >= 1 && self.s <= cells, || format!("s = {} outside [1, {cells}]", self.s))
    }
}

/// The exact hybrid evaluator `sum_k p_k(x) L_k(x)`.
#[derive(Clone, Debug)]
pub struct LocalTaylorSum {
    partition: PartitionIndex,
    tau: f64,
    cells: Vec<Option<Polynomial>>,
}

impl LocalTaylorSum {
    pub fn from_polynomials(partition: PartitionIndex, tau: f64, polys: Vec<(usize, Polynomial)>) -> Result<Self> {
        check_tau_for_assembly(&partition, tau)?;
        let mut cells = vec![None; partition.fine.len()];
        for (k, p) in polys {
            partition.fine.check_index(k)?;
            cells[k] = Some(p);
        }
        Ok(Self { partition, tau, cells })
    }

    pub fn partition(&self) -> &PartitionIndex {
        &self.partition
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Nonzero local polynomials in ascending cell order.
    pub fn polynomials(&self) -> Vec<(usize, Polynomial)> {
        self.cells.iter().enumerate().filter_map(|(k, p)| p.clone().map(|p| (k, p))).collect()
    }
}

impl Evaluable for LocalTaylorSum {
    fn dim(&self) -> usize {
        self.partition.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        active_cells(&self.partition, self.tau, x)
            .into_iter()
            .filter_map(|k| self.cells[k].as_ref().map(|p| (k, p)))
            .map(|(k, p)| p.eval(x) * localized_value(&self.partition, k, self.tau, x))
            .sum()
    }
}

fn local_taylor_polys<F: Smooth + ?Sized>(f: &F, partition: &PartitionIndex, r: f64) -> Result<Vec<(usize, Polynomial)>> {
    let (u, _) = smoothness_split(r);
    let found: Result<Vec<Option<(usize, Polynomial)>>> = (0..partition.fine.len())
        .into_par_iter()
        .map(|k| {
            let t = taylor_poly(f, u, &partition.fine.center(k))?;
            Ok((!t.is_zero()).then(|| (k, t.to_polynomial())))
        })
        .collect();
    Ok(found?.into_iter().flatten().collect())
}

/// Exact localized Taylor sum of `f` with degree `u = ceil(r) - 1`.
pub fn hybrid_local_taylor<F: Smooth + ?Sized>(
    f: &F,
    partition: &PartitionIndex,
    params: &AssemblyParams,
) -> Result<LocalTaylorSum> {
    params.validate(partition)?;
    let tau = params.resolve_tau(partition)?;
    let polys = local_taylor_polys(f, partition, params.r)?;
    LocalTaylorSum::from_polynomials(partition.clone(), tau, polys)
}

/// A realized assembly together with its construction constants.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub net: ReluNet,
    /// Grid sup of each local polynomial on the support of its localized net.
    pub b_hat: f64,
    /// Output normalization `b_hat + 1`.
    pub scale: f64,
    /// `(3^d + 1)(b_hat + 1)`.
    pub sup_bound: f64,
    pub tau: f64,
    pub eps_poly: f64,
    pub eps_pair: f64,
    pub active_cells: usize,
    /// `ln(max weight outside the localized nets) / ln(N_star)`.
    pub weight_exponent: f64,
}

fn grid_per_axis(d: usize) -> usize {
    ((4096f64).powf(1.0 / d as f64).floor() as usize).clamp(3, 17)
}

/// Sup of `|p|` over the enlarged cell `B_k` (clipped to the unit cube).
fn local_sup(partition: &PartitionIndex, k: usize, tau: f64, p: &Polynomial, per_axis: usize) -> f64 {
    let half = 0.5 / partition.n_star() as f64 + tau;
    let c = partition.fine.center(k);
    let lo: Vec<f64> = c.iter().map(|v| (v - half).max(0.0)).collect();
    let hi: Vec<f64> = c.iter().map(|v| (v + half).min(1.0)).collect();
    p.grid_sup_on_box(&lo, &hi, per_axis)
}

/// Realize `sum_k p_k L_k` for the given local polynomials as one ReLU net.
pub fn assemble_local_polynomials(
    partition: &PartitionIndex,
    polys: &[(usize, Polynomial)],
    tau: f64,
    eps_poly: f64,
    eps_pair: f64,
) -> Result<Assembled> {
    check_tau_for_assembly(partition, tau)?;
    precondition(eps_poly > 0.0 && eps_poly < 1.0 && eps_pair > 0.0 && eps_pair < 1.0, || {
        format!("gate accuracies must lie in (0, 1), got {eps_poly} and {eps_pair}")
    })?;
    let d = partition.dim();
    for (k, p) in polys {
        partition.fine.check_index(*k)?;
        precondition(p.dim() == d, || format!("polynomial for cell {k} has dimension {}", p.dim()))?;
    }
    let per_axis = grid_per_axis(d);
    let b_hat = polys
        .par_iter()
        .map(|(k, p)| local_sup(partition, *k, tau, p, per_axis))
        .reduce(|| 0.0, f64::max);
    let scale = b_hat + 1.0;
    let sup_bound = (3f64.powi(d as i32) + 1.0) * scale;
    let pair = pair_block(eps_pair);
    let active: Vec<&(usize, Polynomial)> = polys.iter().filter(|(_, p)| !p.is_zero()).collect();

    let mut net = if active.is_empty() {
        ReluNet::zero(d)
    } else {
        let cells: Result<Vec<(Block, f64)>> = active
            .par_iter()
            .map(|(k, p)| {
                let h = poly_block(p, eps_poly).scale_output(1.0 / scale);
                let h_max = h.max_abs();
                let block = Block::stack(vec![h, localized_block(partition, *k, tau)?]).then(&pair);
                Ok((block, h_max))
            })
            .collect();
        let cells = cells?;
        let poly_max = cells.iter().map(|(_, m)| *m).fold(0.0, f64::max);
        let n_cells = cells.len();
        let sum = Block::stack(cells.into_iter().map(|(b, _)| b).collect()).weighted_sum(&vec![scale; n_cells]);
        let mut net = sum.into_net(ConstructionTag::N3Assembly)?;
        net.insert_info("poly_gate_max_weight", poly_max);
        net
    };
    net.set_tag(ConstructionTag::N3Assembly);
    let realized = net.inspect().max_abs_weight;
    net.set_declared_weight_bound(realized.max(1.0 / tau));

    let nonlocal = net
        .metadata()
        .info
        .get("poly_gate_max_weight")
        .copied()
        .unwrap_or(0.0)
        .max(pair.max_abs())
        .max(2.0 * scale);
    let weight_exponent = nonlocal.ln() / (partition.n_star() as f64).ln();
    for (key, v) in [
        ("tau", tau),
        ("eps_poly", eps_poly),
        ("eps_pair", eps_pair),
        ("b_hat", b_hat),
        ("scale", scale),
        ("sup_bound", sup_bound),
        ("active_cells", active.len() as f64),
        ("weight_exponent", weight_exponent),
        ("sawtooth_count", sawtooth_count(eps_pair) as f64),
        ("n_star", partition.n_star() as f64),
    ] {
        net.insert_info(key, v);
    }
    Ok(Assembled {
        net,
        b_hat,
        scale,
        sup_bound,
        tau,
        eps_poly,
        eps_pair,
        active_cells: active.len(),
        weight_exponent,
    })
}

/// Network approximant of `f` from its local Taylor data on the fine cells.
pub fn sparse_approx_net<F: Smooth + ?Sized>(
    f: &F,
    partition: &PartitionIndex,
    params: &AssemblyParams,
) -> Result<Assembled> {
    partition.require_refined()?;
    let hybrid = hybrid_local_taylor(f, partition, params)?;
    let (eps_poly, eps_pair) = params.eps.resolve(partition.n_star(), partition.dim(), params.r);
    assemble_local_polynomials(partition, &hybrid.polynomials(), hybrid.tau(), eps_poly, eps_pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::FnEval;
    use crate::poly::Polynomial;

    struct Zero;
    impl Evaluable for Zero {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, _: &[f64]) -> f64 {
            0.0
        }
    }
    impl Smooth for Zero {
        fn partial(&self, _: &[u32], _: &[f64]) -> Result<f64> {
            Ok(0.0)
        }
    }

    #[test]
    fn zero_target_gives_zero() {
        let part = PartitionIndex::new(2, 8, 1).unwrap();
        let params = AssemblyParams::new(1.0, 1);
        let hybrid = hybrid_local_taylor(&Zero, &part, &params).unwrap();
        assert!(hybrid.polynomials().is_empty());
        let a = sparse_approx_net(&Zero, &part, &params).unwrap();
        for i in 0..=100 {
            assert_eq!(a.net.eval(&[i as f64 / 100.0]).unwrap(), 0.0);
        }
        let _ = FnEval::new(1, |_: &[f64]| 0.0);
    }

    #[test]
    fn interior_points_see_own_polynomial() {
        let part = PartitionIndex::new(1, 4, 1).unwrap();
        let polys: Vec<(usize, Polynomial)> = (0..4)
            .map(|k| (k, Polynomial::new(part.fine.center(k), vec![(vec![0], k as f64 + 1.0), (vec![1], 0.5)]).unwrap()))
            .collect();
        let tau = 0.01;
        let hybrid = LocalTaylorSum::from_polynomials(part.clone(), tau, polys.clone()).unwrap();
        let x = [0.3];
        let own = &polys[1].1;
        assert!((hybrid.value(&x) - own.eval(&x)).abs() < 1e-12);
        let a = assemble_local_polynomials(&part, &polys, tau, 1e-4, 1e-4).unwrap();
        let st = a.net.inspect();
        assert!(st.max_abs_weight <= a.net.metadata().declared_weight_bound);
        for i in 0..=200 {
            let x = [i as f64 / 200.0];
            let (net, exact) = (a.net.eval(&x).unwrap(), hybrid.value(&x));
            assert!((net - exact).abs() <= 3.0 * a.scale * 1e-4, "x = {x:?}: {net} vs {exact}");
            assert!(net.abs() <= a.sup_bound);
        }
    }

    #[test]
    fn tau_range_enforced() {
        let part = PartitionIndex::new(2, 8, 1).unwrap();
        let mut params = AssemblyParams::new(1.0, 1);
        assert_eq!(params.max_tau(&part), 1.0 / 2048.0);
        params.tau = Some(1e-2);
        assert!(hybrid_local_taylor(&Zero, &part, &params).is_err());
        let coarse = PartitionIndex::new(2, 4, 1).unwrap();
        assert!(sparse_approx_net(&Zero, &coarse, &AssemblyParams::new(1.0, 1)).is_err());
    }
}
