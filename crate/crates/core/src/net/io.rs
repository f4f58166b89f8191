//! Versioned JSON net files.
//!
//! Layers are written as a dense row-major `W` unless the matrix is large
//! and mostly empty, in which case the stored entries go to `W_csr`. Floats
//! use the shortest round-trippable decimal, so reloading is bit-exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{Layer, NetMetadata, ReluNet};
use crate::sparse::SparseMatrix;

pub const FORMAT_VERSION: u64 = 1;

/// Dense encoding is used up to this many matrix entries regardless of fill.
const DENSE_LIMIT: usize = 4096;

#[derive(Serialize, Deserialize)]
struct CsrEntries {
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    w: Option<Vec<f64>>,
    #[serde(rename = "W_csr", default, skip_serializing_if = "Option::is_none")]
    w_csr: Option<CsrEntries>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetFile {
    version: u64,
    input_dim: usize,
    layers: Vec<LayerFile>,
    readout: Vec<f64>,
    metadata: NetMetadata,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

fn encode_layer(layer: &Layer) -> LayerFile {
    let w = layer.weights();
    let size = w.rows() * w.cols();
    if size <= DENSE_LIMIT || size <= 4 * w.nnz() {
        LayerFile { w: Some(w.to_dense()), w_csr: None, b: layer.bias().to_vec() }
    } else {
        let csr = CsrEntries {
            cols: w.cols(),
            row_ptr: w.row_ptr().to_vec(),
            col_idx: w.col_indices().to_vec(),
            values: w.values().to_vec(),
        };
        LayerFile { w: None, w_csr: Some(csr), b: layer.bias().to_vec() }
    }
}

pub fn serialize(net: &ReluNet) -> String {
    let file = NetFile {
        version: FORMAT_VERSION,
        input_dim: net.input_dim(),
        layers: net.layers().iter().map(encode_layer).collect(),
        readout: net.readout().to_vec(),
        metadata: net.metadata().clone(),
    };
    serde_json::to_string(&file).expect("net entries are finite")
}

fn byte_offset(text: &[u8], err: &serde_json::Error) -> usize {
    let (line, col) = (err.line(), err.column());
    if line == 0 {
        return 0;
    }
    let mut start = 0;
    for _ in 1..line {
        match text[start..].iter().position(|&c| c == b'\n') {
            Some(p) => start += p + 1,
            None => break,
        }
    }
    (start + col.saturating_sub(1)).min(text.len())
}

fn parse_error(text: &[u8], err: serde_json::Error) -> Error {
    Error::Parse { offset: byte_offset(text, &err), message: err.to_string() }
}

pub fn deserialize(bytes: &[u8]) -> Result<ReluNet> {
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(|e| parse_error(bytes, e))?;
    if probe.version != FORMAT_VERSION {
        return Err(Error::Version { found: probe.version, expected: FORMAT_VERSION });
    }
    let file: NetFile = serde_json::from_slice(bytes).map_err(|e| parse_error(bytes, e))?;
    let mut prev = file.input_dim;
    let mut layers = Vec::with_capacity(file.layers.len());
    for (k, lf) in file.layers.into_iter().enumerate() {
        let rows = lf.b.len();
        let weights = match (lf.w, lf.w_csr) {
            (Some(w), None) => {
                if w.len() != rows * prev {
                    return Err(Error::Incompatible(format!(
                        "layer {k}: W has {} entries, expected {rows}x{prev}",
                        w.len()
                    )));
                }
                SparseMatrix::from_dense(rows, prev, &w)
            }
            (None, Some(c)) => SparseMatrix::from_csr(rows, c.cols, c.row_ptr, c.col_idx, c.values)
                .ok_or_else(|| Error::Incompatible(format!("layer {k}: malformed sparse weights")))?,
            _ => return Err(Error::Incompatible(format!("layer {k}: exactly one of W and W_csr is required"))),
        };
        prev = rows;
        layers.push(Layer::new(weights, lf.b)?);
    }
    ReluNet::with_metadata(file.input_dim, layers, file.readout, file.metadata)
}

pub fn save(net: &ReluNet, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, serialize(net))?;
    Ok(())
}

pub fn load(path: &std::path::Path) -> Result<ReluNet> {
    deserialize(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReluNet {
        ReluNet::from_dense(
            2,
            &[(vec![0.1, -1.0 / 3.0, 2.5e-17, 0.0], vec![-0.0, 1e300]), (vec![1.0, 7.0], vec![0.125])],
            vec![std::f64::consts::PI],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let net = sample();
        let text = serialize(&net);
        let back = deserialize(text.as_bytes()).unwrap();
        assert_eq!(back, net);
        assert_eq!(serialize(&back), text);
        assert!(back.layers()[0].bias()[0].is_sign_negative());
    }

    #[test]
    fn sparse_layers_use_csr() {
        let n = 100;
        let w = SparseMatrix::identity(n);
        let layer = Layer::new(w, vec![0.0; n]).unwrap();
        let net = ReluNet::new(n, vec![layer], vec![1.0; n], crate::net::ConstructionTag::Other).unwrap();
        let text = serialize(&net);
        assert!(text.contains("W_csr"));
        assert_eq!(deserialize(text.as_bytes()).unwrap(), net);
    }

    #[test]
    fn malformed_input_reports_offset() {
        let text = serialize(&sample());
        let cut = &text.as_bytes()[..text.len() / 2];
        match deserialize(cut) {
            Err(Error::Parse { offset, .. }) => assert!(offset <= cut.len()),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bumped = text.replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(deserialize(bumped.as_bytes()), Err(Error::Version { found: 2, expected: 1 })));
    }
}
