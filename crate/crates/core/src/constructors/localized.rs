//! Localized nets: bump nets centered on fine cells.

use crate::constructors::partition::PartitionIndex;
use crate::constructors::trapezoid::{bump_block, bump_value, TrapezoidSpec};
use crate::error::{precondition, Result};
use crate::net::{Block, ConstructionTag, ReluNet};

fn cell_spec(n_star: usize, tau: f64) -> Result<TrapezoidSpec> {
    let h = 0.5 / n_star as f64;
    TrapezoidSpec::new(-h, h, tau)
}

pub(crate) fn localized_block(partition: &PartitionIndex, k: usize, tau: f64) -> Result<Block> {
    partition.fine.check_index(k)?;
    let spec = cell_spec(partition.n_star(), tau)?;
    Ok(bump_block(&spec, &partition.fine.center(k)))
}

/// Equals 1 on the fine cell `B_k`, 0 outside `B_k` enlarged by `tau`.
pub fn localized_net(partition: &PartitionIndex, k: usize, tau: f64) -> Result<ReluNet> {
    localized_block(partition, k, tau)?.into_net(ConstructionTag::Localized)
}

/// Closed-form value of [`localized_net`].
pub fn localized_value(partition: &PartitionIndex, k: usize, tau: f64, x: &[f64]) -> f64 {
    let h = 0.5 / partition.n_star() as f64;
    let spec = TrapezoidSpec { a: -h, b: h, tau };
    bump_value(&spec, &partition.fine.center(k), x)
}

/// Fine cells whose localized net can be nonzero at `x`.
pub fn active_cells(partition: &PartitionIndex, tau: f64, x: &[f64]) -> Vec<usize> {
    let ns = partition.n_star();
    let h = 0.5 / ns as f64;
    let ranges: Vec<(usize, usize)> = x
        .iter()
        .map(|&t| {
            // centers (i + 1/2)/ns strictly within h + tau of t
            let lo = ((t - h - tau) * ns as f64 - 0.5).floor().max(0.0) as usize;
            let hi = (((t + h + tau) * ns as f64 - 0.5).ceil().max(0.0) as usize).min(ns - 1);
            (lo.min(ns - 1), hi)
        })
        .collect();
    let mut out = vec![0usize];
    for &(lo, hi) in &ranges {
        let mut next = Vec::with_capacity(out.len() * (hi - lo + 1));
        for &base in &out {
            for i in lo..=hi {
                next.push(base * ns + i);
            }
        }
        out = next;
    }
    out
}

/// Admissible localization widths must not exceed half a fine cell.
pub(crate) fn check_tau_for_assembly(partition: &PartitionIndex, tau: f64) -> Result<()> {
    precondition(tau > 0.0 && tau <= 0.5 / partition.n_star() as f64, || {
        format!("tau = {tau} must lie in (0, 1/(2 N_star)] = (0, {}]", 0.5 / partition.n_star() as f64)
    })
}
