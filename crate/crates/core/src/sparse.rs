//! Compressed sparse row matrices.
//!
//! Constructed networks are block structured (one block per fine cell), so
//! layers are stored in CSR form. Exact zeros are never stored; the stored
//! pattern is the set of free parameters of a layer.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    /// Build from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        let mut i = 0;
        while i < t.len() {
            let (r, c, mut v) = t[i];
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            i += 1;
            while i < t.len() && t[i].0 == r && t[i].1 == c {
                v += t[i].2;
                i += 1;
            }
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { rows, cols, row_ptr, col_idx, values }
    }

    /// Row-major dense input.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self::from_triplets(
            rows,
            cols,
            data.iter().enumerate().map(|(k, &v)| (k / cols.max(1), k % cols.max(1), v)),
        )
    }

    /// Raw CSR parts; validated.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Option<Self> {
        if row_ptr.len() != rows + 1
            || row_ptr[0] != 0
            || row_ptr[rows] != col_idx.len()
            || col_idx.len() != values.len()
            || row_ptr.windows(2).any(|w| w[0] > w[1])
            || col_idx.iter().any(|&c| c >= cols)
        {
            return None;
        }
        for r in 0..rows {
            let cs = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cs.windows(2).any(|w| w[0] >= w[1]) {
                return None;
            }
        }
        Some(Self { rows, cols, row_ptr, col_idx, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.col_idx[lo..hi].binary_search(&c) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (r, c, v) in self.triplets() {
            out[r * self.cols + c] = v;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `out = self * x + bias`.
    #[inline]
    pub fn affine_into(&self, x: &[f64], bias: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = bias[r];
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            out[r] = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.affine_into(x, &vec![0.0; self.rows], &mut out);
        out
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0f64; other.cols];
        let mut seen = vec![false; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != 0.0 {
                    col_idx.push(c);
                    values.push(acc[c]);
                }
                acc[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { rows: self.rows, cols: other.cols, row_ptr, col_idx, values }
    }

    /// Stack matrices sharing a column space on top of each other.
    pub fn vstack(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut out = SparseMatrix::zeros(0, cols);
        out.row_ptr = vec![0];
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column mismatch");
            let base = out.col_idx.len();
            out.col_idx.extend_from_slice(&b.col_idx);
            out.values.extend_from_slice(&b.values);
            out.row_ptr.extend(b.row_ptr[1..].iter().map(|p| p + base));
            out.rows += b.rows;
        }
        out
    }

    /// Block-diagonal arrangement.
    pub fn block_diag(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = SparseMatrix::zeros(0, cols);
        out.row_ptr = vec![0];
        let mut col_off = 0;
        for b in blocks {
            let base = out.col_idx.len();
            out.col_idx.extend(b.col_idx.iter().map(|c| c + col_off));
            out.values.extend_from_slice(&b.values);
            out.row_ptr.extend(b.row_ptr[1..].iter().map(|p| p + base));
            out.rows += b.rows;
            col_off += b.cols;
        }
        out
    }

    /// Multiply every stored value by `factor`.
    pub fn scaled(&self, factor: f64) -> SparseMatrix {
        SparseMatrix::from_triplets(self.rows, self.cols, self.triplets().map(|(r, c, v)| (r, c, v * factor)))
    }

    /// Apply `f` to stored values, keeping the pattern (values mapped to zero
    /// are dropped).
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> SparseMatrix {
        SparseMatrix::from_triplets(self.rows, self.cols, self.triplets().map(|(r, c, v)| (r, c, f(v))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(2, 3, [(0, 1, 2.0), (0, 1, -2.0), (1, 2, 1.5), (1, 0, 1.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.to_dense(), vec![0.0, 0.0, 0.0, 1.0, 0.0, 1.5]);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseMatrix::from_dense(2, 3, &[1.0, 0.0, 2.0, -1.0, 3.0, 0.0]);
        let b = SparseMatrix::from_dense(3, 2, &[0.0, 1.0, 2.0, 0.0, 1.0, 1.0]);
        let c = a.matmul(&b);
        assert_eq!(c.to_dense(), vec![2.0, 3.0, 6.0, -1.0]);
    }

    #[test]
    fn stacking() {
        let a = SparseMatrix::identity(2);
        let b = SparseMatrix::from_dense(1, 2, &[1.0, 1.0]);
        let v = SparseMatrix::vstack(&[&a, &b]);
        assert_eq!(v.rows(), 3);
        assert_eq!(v.mul_vec(&[2.0, 3.0]), vec![2.0, 3.0, 5.0]);
        let d = SparseMatrix::block_diag(&[&a, &b]);
        assert_eq!((d.rows(), d.cols()), (3, 4));
        assert_eq!(d.mul_vec(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 7.0]);
    }

    #[test]
    fn csr_validation() {
        assert!(SparseMatrix::from_csr(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_none());
        assert!(SparseMatrix::from_csr(1, 2, vec![0, 2], vec![0, 1], vec![1.0, 1.0]).is_some());
    }
}
