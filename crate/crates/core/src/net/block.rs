//! Multi-output building blocks for constructions.
//!
//! A [`Block`] is a stack of ReLU layers followed by an affine output map
//! (with bias). Composition fuses the inner output map into the outer first
//! layer, so composing blocks never adds an extra layer. Parallel branches
//! are padded with identity pairs `t = relu(t) - relu(-t)` to equal depth.

use crate::error::{Error, Result};
use crate::net::{ConstructionTag, Layer, ReluNet};
use crate::sparse::SparseMatrix;

#[derive(Clone, Debug)]
pub(crate) struct Affine {
    pub w: SparseMatrix,
    pub b: Vec<f64>,
}

impl Affine {
    pub fn new(w: SparseMatrix, b: Vec<f64>) -> Self {
        assert_eq!(w.rows(), b.len());
        Self { w, b }
    }

    /// `self ∘ inner`.
    fn after(&self, inner: &Affine) -> Affine {
        let w = self.w.matmul(&inner.w);
        let wb = self.w.mul_vec(&inner.b);
        let b = wb.iter().zip(&self.b).map(|(x, y)| x + y).collect();
        Affine { w, b }
    }

    fn out_dim(&self) -> usize {
        self.b.len()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Block {
    input_dim: usize,
    hidden: Vec<Affine>,
    output: Affine,
}

impl Block {
    pub fn new(input_dim: usize, hidden: Vec<Affine>, output: Affine) -> Self {
        let mut prev = input_dim;
        for h in &hidden {
            assert_eq!(h.w.cols(), prev, "hidden layer chain mismatch");
            prev = h.out_dim();
        }
        assert_eq!(output.w.cols(), prev, "output map mismatch");
        Self { input_dim, hidden, output }
    }

    /// Depth-zero block computing `w x + b`.
    pub fn affine(w: SparseMatrix, b: Vec<f64>) -> Self {
        let input_dim = w.cols();
        Self::new(input_dim, Vec::new(), Affine::new(w, b))
    }

    /// Depth-zero block returning the listed coordinates (repeats allowed).
    pub fn select(input_dim: usize, idx: &[usize]) -> Self {
        let w = SparseMatrix::from_triplets(idx.len(), input_dim, idx.iter().enumerate().map(|(r, &c)| (r, c, 1.0)));
        Self::affine(w, vec![0.0; idx.len()])
    }

    /// `relu(t)`, `relu(-t)` per coordinate, recombined linearly.
    pub fn identity_pairs(n: usize) -> Self {
        let w = SparseMatrix::from_triplets(2 * n, n, (0..n).flat_map(|i| [(2 * i, i, 1.0), (2 * i + 1, i, -1.0)]));
        let out = SparseMatrix::from_triplets(n, 2 * n, (0..n).flat_map(|i| [(i, 2 * i, 1.0), (i, 2 * i + 1, -1.0)]));
        Self::new(n, vec![Affine::new(w, vec![0.0; 2 * n])], Affine::new(out, vec![0.0; n]))
    }

    pub fn output_dim(&self) -> usize {
        self.output.out_dim()
    }

    pub fn depth(&self) -> usize {
        self.hidden.len()
    }

    /// `outer ∘ self`.
    pub fn then(self, outer: &Block) -> Block {
        assert_eq!(outer.input_dim, self.output_dim(), "composition dimension mismatch");
        let Block { input_dim, mut hidden, output } = self;
        if outer.hidden.is_empty() {
            let fused = outer.output.after(&output);
            return Block { input_dim, hidden, output: fused };
        }
        hidden.push(outer.hidden[0].after(&output));
        hidden.extend(outer.hidden[1..].iter().cloned());
        Block { input_dim, hidden, output: outer.output.clone() }
    }

    /// Largest stored weight or bias magnitude.
    pub fn max_abs(&self) -> f64 {
        let of = |a: &Affine| a.b.iter().fold(a.w.max_abs(), |m, v| m.max(v.abs()));
        self.hidden.iter().map(of).fold(of(&self.output), f64::max)
    }

    /// Post-compose with the affine map `w y + b`.
    pub fn map_output(self, w: SparseMatrix, b: Vec<f64>) -> Block {
        self.then(&Block::affine(w, b))
    }

    pub fn scale_output(self, factor: f64) -> Block {
        let n = self.output_dim();
        self.map_output(SparseMatrix::identity(n).scaled(factor), vec![0.0; n])
    }

    /// Pre-compose with `x -> w x + b`.
    pub fn pre_affine(self, w: SparseMatrix, b: Vec<f64>) -> Block {
        Block::affine(w, b).then(&self)
    }

    pub fn padded(mut self, depth: usize) -> Block {
        while self.depth() < depth {
            let pad = Block::identity_pairs(self.output_dim());
            self = self.then(&pad);
        }
        self
    }

    /// Run blocks on the same input and concatenate their outputs.
    pub fn stack(blocks: Vec<Block>) -> Block {
        assert!(!blocks.is_empty());
        let input_dim = blocks[0].input_dim;
        assert!(blocks.iter().all(|b| b.input_dim == input_dim), "stack needs a shared input");
        Self::combine_parallel(blocks, input_dim, false)
    }

    /// Run blocks on disjoint slices of a concatenated input.
    pub fn diag(blocks: Vec<Block>) -> Block {
        assert!(!blocks.is_empty());
        let input_dim = blocks.iter().map(|b| b.input_dim).sum();
        Self::combine_parallel(blocks, input_dim, true)
    }

    fn combine_parallel(blocks: Vec<Block>, input_dim: usize, disjoint_inputs: bool) -> Block {
        let depth = blocks.iter().map(Block::depth).max().unwrap_or(0);
        let blocks: Vec<Block> = blocks.into_iter().map(|b| b.padded(depth)).collect();
        let join = |mats: Vec<&SparseMatrix>, first: bool| {
            if first && !disjoint_inputs {
                SparseMatrix::vstack(&mats)
            } else {
                SparseMatrix::block_diag(&mats)
            }
        };
        let mut hidden = Vec::with_capacity(depth);
        for k in 0..depth {
            let w = join(blocks.iter().map(|b| &b.hidden[k].w).collect(), k == 0);
            let b = blocks.iter().flat_map(|bl| bl.hidden[k].b.iter().copied()).collect();
            hidden.push(Affine::new(w, b));
        }
        let w = join(blocks.iter().map(|b| &b.output.w).collect(), depth == 0);
        let b = blocks.iter().flat_map(|bl| bl.output.b.iter().copied()).collect();
        Block::new(input_dim, hidden, Affine::new(w, b))
    }

    /// Collapse all outputs into one: `sum_i weights[i] * y_i`.
    pub fn weighted_sum(self, weights: &[f64]) -> Block {
        assert_eq!(weights.len(), self.output_dim());
        let w = SparseMatrix::from_triplets(1, weights.len(), weights.iter().enumerate().map(|(i, &v)| (0, i, v)));
        self.map_output(w, vec![0.0])
    }

    pub fn from_net(net: &ReluNet) -> Block {
        let hidden = net
            .layers()
            .iter()
            .map(|l| Affine::new(l.weights().clone(), l.bias().to_vec()))
            .collect();
        let width = net.readout().len();
        let out = SparseMatrix::from_triplets(1, width, net.readout().iter().enumerate().map(|(i, &a)| (0, i, a)));
        Block::new(net.input_dim(), hidden, Affine::new(out, vec![0.0]))
    }

    /// Finish a single-output block as a [`ReluNet`]. An output offset is
    /// carried by a constant unit `relu(1)` appended to the last layer.
    pub fn into_net(self, tag: ConstructionTag) -> Result<ReluNet> {
        if self.output_dim() != 1 {
            return Err(Error::Incompatible(format!(
                "a net has one output, block has {}",
                self.output_dim()
            )));
        }
        let block = if self.depth() == 0 { self.padded(1) } else { self };
        let Block { input_dim, hidden, output } = block;
        let offset = output.b[0];
        let mut layers: Vec<Layer> = Vec::with_capacity(hidden.len());
        let last = hidden.len() - 1;
        let mut readout: Vec<f64> = Vec::new();
        for (k, h) in hidden.into_iter().enumerate() {
            if k == last {
                let width = h.out_dim();
                readout = (0..width).map(|i| output.w.get(0, i)).collect();
                if offset != 0.0 {
                    let w = SparseMatrix::vstack(&[&h.w, &SparseMatrix::zeros(1, h.w.cols())]);
                    let mut b = h.b;
                    b.push(1.0);
                    readout.push(offset);
                    layers.push(Layer::new(w, b)?);
                    continue;
                }
            }
            layers.push(Layer::new(h.w, h.b)?);
        }
        ReluNet::new(input_dim, layers, readout, tag)
    }

    /// Evaluate all outputs directly (used in tests of constructions).
    #[cfg(test)]
    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        for h in &self.hidden {
            let mut next = vec![0.0; h.out_dim()];
            h.w.affine_into(&cur, &h.b, &mut next);
            next.iter_mut().for_each(|v| *v = v.max(0.0));
            cur = next;
        }
        let mut out = vec![0.0; self.output_dim()];
        self.output.w.affine_into(&cur, &self.output.b, &mut out);
        out
    }
}
