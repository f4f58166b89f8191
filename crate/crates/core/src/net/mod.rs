//! Feedforward ReLU networks `x -> a . h_L(x)` with
//! `h_k = relu(W_k h_{k-1} + b_k)` and `h_0 = x`.
//!
//! The readout `a` is a linear layer without activation and without bias;
//! offsets must be carried by a hidden unit. Networks are immutable once
//! built and can be evaluated from many threads at once.

pub(crate) mod block;
mod combine;
mod io;

pub(crate) use block::Block;
pub use combine::{combine, CombineMode};
pub use io::{deserialize, load, save, serialize, FORMAT_VERSION};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Evaluable;
use crate::sparse::SparseMatrix;

/// One affine map followed by a componentwise ReLU.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    weights: SparseMatrix,
    bias: Vec<f64>,
}

impl Layer {
    pub fn new(weights: SparseMatrix, bias: Vec<f64>) -> Result<Self> {
        if weights.rows() != bias.len() {
            return Err(Error::Incompatible(format!(
                "layer has {} rows but bias of length {}",
                weights.rows(),
                bias.len()
            )));
        }
        Ok(Self { weights, bias })
    }

    pub fn weights(&self) -> &SparseMatrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn width(&self) -> usize {
        self.bias.len()
    }

    fn max_abs(&self) -> f64 {
        self.bias.iter().fold(self.weights.max_abs(), |m, b| m.max(b.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionTag {
    Trapezoid,
    Bump,
    Localized,
    ProductGate,
    PolyGate,
    N3Assembly,
    Learned,
    Other,
}

/// Structural claims recorded by the constructor that built a net.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetMetadata {
    pub declared_depth: usize,
    pub declared_param_count: usize,
    pub declared_weight_bound: f64,
    pub construction_tag: ConstructionTag,
    /// Construction parameters worth keeping with the net (gate accuracy,
    /// sawtooth count, normalization constant, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, f64>,
}

/// Structural statistics of a network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetStats {
    pub depth: usize,
    pub widths: Vec<usize>,
    pub param_count: usize,
    pub max_abs_weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReluNet {
    input_dim: usize,
    layers: Vec<Layer>,
    readout: Vec<f64>,
    metadata: NetMetadata,
}

impl ReluNet {
    /// Assemble a net and check the dimension chain. The metadata is filled
    /// from the stored entries with `tag`.
    pub fn new(input_dim: usize, layers: Vec<Layer>, readout: Vec<f64>, tag: ConstructionTag) -> Result<Self> {
        let mut net = Self {
            input_dim,
            layers,
            readout,
            metadata: NetMetadata {
                declared_depth: 0,
                declared_param_count: 0,
                declared_weight_bound: 0.0,
                construction_tag: tag,
                info: BTreeMap::new(),
            },
        };
        net.validate()?;
        let stats = net.inspect();
        net.metadata.declared_depth = stats.depth;
        net.metadata.declared_param_count = stats.param_count;
        net.metadata.declared_weight_bound = stats.max_abs_weight;
        Ok(net)
    }

    /// Assemble with explicit metadata (used when loading from disk).
    pub fn with_metadata(
        input_dim: usize,
        layers: Vec<Layer>,
        readout: Vec<f64>,
        metadata: NetMetadata,
    ) -> Result<Self> {
        let net = Self { input_dim, layers, readout, metadata };
        net.validate()?;
        Ok(net)
    }

    /// Dense single-layer-per-entry convenience constructor; `layers` holds
    /// `(row-major W, b)` pairs.
    pub fn from_dense(input_dim: usize, layers: &[(Vec<f64>, Vec<f64>)], readout: Vec<f64>) -> Result<Self> {
        let mut prev = input_dim;
        let mut out = Vec::with_capacity(layers.len());
        for (w, b) in layers {
            if w.len() != b.len() * prev {
                return Err(Error::Incompatible(format!(
                    "dense layer with {} entries cannot be {}x{}",
                    w.len(),
                    b.len(),
                    prev
                )));
            }
            out.push(Layer::new(SparseMatrix::from_dense(b.len(), prev, w), b.clone())?);
            prev = b.len();
        }
        Self::new(input_dim, out, readout, ConstructionTag::Other)
    }

    /// A net that is identically zero on `R^d`.
    pub fn zero(input_dim: usize) -> Self {
        let layer = Layer::new(SparseMatrix::zeros(1, input_dim), vec![0.0]).expect("consistent");
        Self::new(input_dim, vec![layer], vec![0.0], ConstructionTag::Other).expect("consistent")
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Incompatible("input dimension must be positive".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::Incompatible("a net needs at least one hidden layer".into()));
        }
        let mut prev = self.input_dim;
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.weights.cols() != prev {
                return Err(Error::Incompatible(format!(
                    "layer {k} expects {} inputs but receives {prev}",
                    layer.weights.cols()
                )));
            }
            prev = layer.width();
        }
        if self.readout.len() != prev {
            return Err(Error::Incompatible(format!(
                "readout has length {} but last layer width is {prev}",
                self.readout.len()
            )));
        }
        let finite = self.layers.iter().all(|l| {
            l.weights.values().iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite())
        }) && self.readout.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("network entries must be finite".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn readout(&self) -> &[f64] {
        &self.readout
    }

    pub fn metadata(&self) -> &NetMetadata {
        &self.metadata
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub(crate) fn set_declared_weight_bound(&mut self, bound: f64) {
        self.metadata.declared_weight_bound = bound;
    }

    pub(crate) fn set_tag(&mut self, tag: ConstructionTag) {
        self.metadata.construction_tag = tag;
    }

    pub(crate) fn insert_info(&mut self, key: &str, value: f64) {
        self.metadata.info.insert(key.to_string(), value);
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::Shape { expected: self.input_dim, got: x.len() });
        }
        Ok(self.evaluator().eval(x))
    }

    /// Reusable evaluation buffers for repeated calls.
    pub fn evaluator(&self) -> Evaluator<'_> {
        let max_w = self.layers.iter().map(Layer::width).max().unwrap_or(0).max(self.input_dim);
        Evaluator { net: self, a: vec![0.0; max_w], b: vec![0.0; max_w] }
    }

    pub fn inspect(&self) -> NetStats {
        let mut params = self.readout.iter().filter(|v| **v != 0.0).count();
        let mut max_abs = self.readout.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for l in &self.layers {
            params += l.weights.nnz() + l.bias.iter().filter(|v| **v != 0.0).count();
            max_abs = max_abs.max(l.max_abs());
        }
        NetStats {
            depth: self.layers.len(),
            widths: self.layers.iter().map(Layer::width).collect(),
            param_count: params,
            max_abs_weight: max_abs,
        }
    }

    /// Copy with every parameter clamped to `[-bound, bound]`; also returns
    /// how many entries were changed.
    pub fn clipped(&self, bound: f64) -> (ReluNet, usize) {
        let mut count = 0usize;
        let mut clip = |v: f64| {
            if v.abs() > bound {
                count += 1;
                v.signum() * bound
            } else {
                v
            }
        };
        let layers: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer { weights: l.weights.map_values(&mut clip), bias: l.bias.iter().map(|&b| clip(b)).collect() })
            .collect();
        let readout = self.readout.iter().map(|&a| clip(a)).collect();
        let mut metadata = self.metadata.clone();
        metadata.declared_weight_bound = metadata.declared_weight_bound.min(bound);
        (ReluNet { input_dim: self.input_dim, layers, readout, metadata }, count)
    }
}

/// Evaluation scratch space tied to one net.
pub struct Evaluator<'a> {
    net: &'a ReluNet,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Evaluator<'_> {
    /// Forward pass; `x.len()` must equal the net's input dimension.
    pub fn eval(&mut self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.net.input_dim, "input shape mismatch");
        let n0 = x.len();
        self.a[..n0].copy_from_slice(x);
        let mut cur = n0;
        for layer in &self.net.layers {
            let w = layer.width();
            layer.weights.affine_into(&self.a[..cur], &layer.bias, &mut self.b[..w]);
            for v in &mut self.b[..w] {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            std::mem::swap(&mut self.a, &mut self.b);
            cur = w;
        }
        self.a[..cur].iter().zip(&self.net.readout).map(|(h, a)| h * a).sum()
    }
}

impl Evaluable for ReluNet {
    fn dim(&self) -> usize {
        self.input_dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.evaluator().eval(x)
    }

    fn values(&self, xs: &[f64], out: &mut [f64]) {
        let mut ev = self.evaluator();
        for (x, o) in xs.chunks_exact(self.input_dim).zip(out.iter_mut()) {
            *o = ev.eval(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_relu() -> ReluNet {
        ReluNet::from_dense(1, &[(vec![1.0], vec![0.0])], vec![1.0]).unwrap()
    }

    #[test]
    fn relu_kills_negatives_and_passes_positives() {
        let net = unit_relu();
        assert_eq!(net.eval(&[-2.0]).unwrap(), 0.0);
        assert_eq!(net.eval(&[3.0]).unwrap(), 3.0);
    }

    #[test]
    fn shape_errors() {
        let net = unit_relu();
        assert!(matches!(net.eval(&[1.0, 2.0]), Err(Error::Shape { expected: 1, got: 2 })));
        let bad = ReluNet::from_dense(2, &[(vec![1.0, 1.0], vec![0.0]), (vec![1.0, 1.0], vec![0.0])], vec![1.0]);
        assert!(bad.is_err());
        let bad_readout = ReluNet::from_dense(1, &[(vec![1.0], vec![0.0])], vec![1.0, 2.0]);
        assert!(bad_readout.is_err());
        let nan = ReluNet::from_dense(1, &[(vec![f64::NAN], vec![0.0])], vec![1.0]);
        assert!(matches!(nan, Err(Error::Domain(_))));
    }

    #[test]
    fn inspect_counts_stored_entries() {
        let net = ReluNet::from_dense(2, &[(vec![1.0, 0.0, -3.0, 2.0], vec![0.0, 1.0])], vec![0.5, 0.0]).unwrap();
        let s = net.inspect();
        assert_eq!(s.depth, 1);
        assert_eq!(s.widths, vec![2]);
        assert_eq!(s.param_count, 3 + 1 + 1);
        assert_eq!(s.max_abs_weight, 3.0);
        assert_eq!(net.inspect(), s);
        assert_eq!(net.metadata().declared_param_count, s.param_count);
    }

    #[test]
    fn clipping_reports_count() {
        let net = ReluNet::from_dense(1, &[(vec![10.0], vec![-5.0])], vec![0.5]).unwrap();
        let (c, n) = net.clipped(4.0);
        assert_eq!(n, 2);
        assert_eq!(c.inspect().max_abs_weight, 4.0);
        assert_eq!(c.eval(&[2.0]).unwrap(), 0.5 * (8.0 - 4.0));
    }
}
