use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::constructors::partition::CubicPartition;
use crate::error::{precondition, Result};
use crate::rng::rng_from;

/// The `s` coarse cells carrying a sparse target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsitySupport {
    pub partition: CubicPartition,
    /// Zero-based cell indices, ascending.
    pub indices: Vec<usize>,
    pub seed: u64,
}

/// Uniformly random `s`-subset of the `N^d` coarse cells.
///
/// The cells are a prefix of one seeded permutation, so supports drawn with
/// the same seed are nested in `s`.
pub fn make_support(n: usize, d: usize, s: usize, seed: u64) -> Result<SparsitySupport> {
    let partition = CubicPartition::new(n, d)?;
    let total = partition.len();
    precondition(s >= 1 && s <= total, || format!("s = {s} must lie in [1, {total}]"))?;
    let mut all: Vec<usize> = (0..total).collect();
    all.shuffle(&mut rng_from(seed, &[0x5u64, n as u64, d as u64]));
    let mut indices = all[..s].to_vec();
    indices.sort_unstable();
    Ok(SparsitySupport { partition, indices, seed })
}

impl SparsitySupport {
    pub fn s(&self) -> usize {
        self.indices.len()
    }

    pub fn n(&self) -> usize {
        self.partition.per_axis()
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn contains_cell(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// `x` lies in the union of the support cells.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|t| (0.0..=1.0).contains(t)) && self.contains_cell(self.partition.cell_of(x))
    }

    pub fn is_full(&self) -> bool {
        self.s() == self.partition.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_examples() {
        assert_eq!(make_support(2, 1, 2, 99).unwrap().indices, vec![0, 1]);
        let one = make_support(4, 2, 1, 3).unwrap();
        assert_eq!(one.s(), 1);
        assert!(one.indices[0] < 16);
        assert_eq!(make_support(4, 2, 5, 8).unwrap(), make_support(4, 2, 5, 8).unwrap());
        assert!(make_support(2, 2, 5, 0).is_err());
        assert!(make_support(2, 2, 0, 0).is_err());
    }

    #[test]
    fn supports_are_nested_in_s() {
        let small = make_support(4, 2, 3, 21).unwrap();
        let big = make_support(4, 2, 9, 21).unwrap();
        assert!(small.indices.iter().all(|j| big.contains_cell(*j)));
    }
}
