//! Axis-aligned cubic partitions of `[0,1]^d`.
//!
//! Cells are indexed lexicographically from 0 with the first coordinate most
//! significant. A point on a shared face belongs to the cell with the
//! smallest index.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicPartition {
    per_axis: usize,
    d: usize,
}

impl CubicPartition {
    pub fn new(per_axis: usize, d: usize) -> Result<Self> {
        precondition(per_axis >= 1 && d >= 1, || format!("partition needs n >= 1 and d >= 1, got n = {per_axis}, d = {d}"))?;
        precondition(per_axis.checked_pow(d as u32).is_some(), || "partition too large".into())?;
        Ok(Self { per_axis, d })
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn side(&self) -> f64 {
        1.0 / self.per_axis as f64
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k < self.len() {
            Ok(())
        } else {
            Err(Error::Index { index: k, limit: self.len() })
        }
    }

    pub fn multi_index(&self, k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        let mut rest = k;
        for slot in idx.iter_mut().rev() {
            *slot = rest % self.per_axis;
            rest /= self.per_axis;
        }
        idx
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.per_axis + i)
    }

    pub fn center(&self, k: usize) -> Vec<f64> {
        let n = self.per_axis as f64;
        self.multi_index(k).into_iter().map(|i| (i as f64 + 0.5) / n).collect()
    }

    /// Axis index of the cell containing coordinate `t`, ties to the lower cell.
    pub fn axis_cell(&self, t: f64) -> usize {
        let n = self.per_axis;
        let raw = (t * n as f64).ceil() as i64 - 1;
        raw.clamp(0, n as i64 - 1) as usize
    }

    /// Own cell of `x` (coordinates outside `[0,1]` are clamped).
    pub fn cell_of(&self, x: &[f64]) -> usize {
        x.iter().fold(0, |acc, &t| acc * self.per_axis + self.axis_cell(t))
    }

    /// Closed cell `k` contains `x`.
    pub fn contains(&self, k: usize, x: &[f64]) -> bool {
        let n = self.per_axis as f64;
        self.multi_index(k).iter().zip(x).all(|(&i, &t)| t >= i as f64 / n && t <= (i + 1) as f64 / n)
    }
}

/// A coarse partition (`N` per axis, carrying the sparsity pattern) paired
/// with a fine one (`N_star` per axis, carrying the localized nets).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionIndex {
    pub coarse: CubicPartition,
    pub fine: CubicPartition,
}

impl PartitionIndex {
    pub fn new(n: usize, n_star: usize, d: usize) -> Result<Self> {
        Ok(Self { coarse: CubicPartition::new(n, d)?, fine: CubicPartition::new(n_star, d)? })
    }

    pub fn n(&self) -> usize {
        self.coarse.per_axis()
    }

    pub fn n_star(&self) -> usize {
        self.fine.per_axis()
    }

    pub fn dim(&self) -> usize {
        self.fine.dim()
    }

    /// Fine resolution is at least four times the coarse one.
    pub fn require_refined(&self) -> Result<()> {
        precondition(self.n_star() >= 4 * self.n(), || {
            format!("N_star = {} must be at least 4N = {}", self.n_star(), 4 * self.n())
        })
    }

    /// The coarse cell that contains fine cell `k` entirely, if any.
    pub fn enclosing_coarse(&self, k: usize) -> Option<usize> {
        let (n, ns) = (self.n(), self.n_star());
        let mut coarse = Vec::with_capacity(self.dim());
        for i in self.fine.multi_index(k) {
            // exact integer test of [i/ns, (i+1)/ns] within [j/n, (j+1)/n]
            let j = i * n / ns;
            if (i + 1) * n <= (j + 1) * ns {
                coarse.push(j);
            } else {
                return None;
            }
        }
        Some(self.coarse.linear_index(&coarse))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let p = CubicPartition::new(3, 2).unwrap();
        assert_eq!(p.len(), 9);
        for k in 0..9 {
            assert_eq!(p.linear_index(&p.multi_index(k)), k);
            assert_eq!(p.cell_of(&p.center(k)), k);
        }
        assert_eq!(p.multi_index(5), vec![1, 2]);
        assert_eq!(p.center(5), vec![0.5, 2.5 / 3.0]);
        assert!(p.check_index(9).is_err());
    }

    #[test]
    fn faces_go_to_smaller_index() {
        let p = CubicPartition::new(4, 2).unwrap();
        assert_eq!(p.cell_of(&[0.25, 0.5]), p.linear_index(&[0, 1]));
        assert_eq!(p.cell_of(&[0.0, 1.0]), p.linear_index(&[0, 3]));
    }

    #[test]
    fn enclosing_coarse_cells() {
        let p = PartitionIndex::new(2, 8, 1).unwrap();
        assert_eq!(p.enclosing_coarse(3), Some(0));
        assert_eq!(p.enclosing_coarse(4), Some(1));
        let q = PartitionIndex::new(3, 4, 1).unwrap();
        assert_eq!(q.enclosing_coarse(0), Some(0));
        assert_eq!(q.enclosing_coarse(1), None);
        assert!(q.require_refined().is_err());
    }
}
