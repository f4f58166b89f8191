use crate::error::{Error, Result};
use crate::net::{Block, ConstructionTag, ReluNet};
use crate::sparse::SparseMatrix;

/// How [`combine`] joins its parts.
#[derive(Clone, Debug, PartialEq)]
pub enum CombineMode {
    /// `x -> sum_i parts[i](x)`; all parts share the input dimension.
    ParallelSum,
    /// `parts[n-1](... parts[1](parts[0](x)))`; every part after the first
    /// takes one input.
    SerialCompose,
    /// `x -> part(matrix * x + shift)` for a single part.
    AffinePre { matrix: SparseMatrix, shift: Vec<f64> },
    /// `x -> scale * part(x) + shift` for a single part.
    AffinePost { scale: f64, shift: f64 },
}

impl CombineMode {
    /// `x -> part(x + shift)`.
    pub fn shift_input(shift: Vec<f64>) -> Self {
        CombineMode::AffinePre { matrix: SparseMatrix::identity(shift.len()), shift }
    }
}

pub fn combine(parts: &[ReluNet], mode: &CombineMode) -> Result<ReluNet> {
    let first = parts.first().ok_or_else(|| Error::Precondition("combine needs at least one part".into()))?;
    let single = || {
        if parts.len() == 1 {
            Ok(first)
        } else {
            Err(Error::Incompatible(format!("affine reparameterization takes one net, got {}", parts.len())))
        }
    };
    let block = match mode {
        CombineMode::ParallelSum => {
            if let Some(bad) = parts.iter().find(|p| p.input_dim() != first.input_dim()) {
                return Err(Error::Shape { expected: first.input_dim(), got: bad.input_dim() });
            }
            let stacked = Block::stack(parts.iter().map(Block::from_net).collect());
            stacked.weighted_sum(&vec![1.0; parts.len()])
        }
        CombineMode::SerialCompose => {
            let mut block = Block::from_net(first);
            for p in &parts[1..] {
                if p.input_dim() != 1 {
                    return Err(Error::Shape { expected: 1, got: p.input_dim() });
                }
                block = block.then(&Block::from_net(p));
            }
            block
        }
        CombineMode::AffinePre { matrix, shift } => {
            let net = single()?;
            if matrix.rows() != net.input_dim() {
                return Err(Error::Shape { expected: net.input_dim(), got: matrix.rows() });
            }
            if shift.len() != matrix.rows() {
                return Err(Error::Shape { expected: matrix.rows(), got: shift.len() });
            }
            if matrix.cols() == 0 {
                return Err(Error::Incompatible("affine map has no inputs".into()));
            }
            Block::from_net(net).pre_affine(matrix.clone(), shift.clone())
        }
        CombineMode::AffinePost { scale, shift } => {
            let net = single()?;
            Block::from_net(net).map_output(SparseMatrix::from_dense(1, 1, &[*scale]), vec![*shift])
        }
    };
    block.into_net(ConstructionTag::Other)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hat() -> ReluNet {
        // relu(x) - 2 relu(x - 0.5) + relu(x - 1)
        ReluNet::from_dense(1, &[(vec![1.0, 1.0, 1.0], vec![0.0, -0.5, -1.0])], vec![1.0, -2.0, 1.0]).unwrap()
    }

    #[test]
    fn modes_reproduce_pointwise_combinations() {
        let g = hat();
        let sum = combine(&[g.clone(), g.clone()], &CombineMode::ParallelSum).unwrap();
        let comp = combine(&[g.clone(), g.clone()], &CombineMode::SerialCompose).unwrap();
        let pre = combine(&[g.clone()], &CombineMode::shift_input(vec![-0.25])).unwrap();
        let post = combine(&[g.clone()], &CombineMode::AffinePost { scale: 3.0, shift: -1.0 }).unwrap();
        assert_eq!(comp.depth(), 2);
        for i in 0..=40 {
            let t = -0.5 + i as f64 / 20.0;
            let v = g.eval(&[t]).unwrap();
            assert!((sum.eval(&[t]).unwrap() - 2.0 * v).abs() < 1e-12);
            assert!((comp.eval(&[t]).unwrap() - g.eval(&[v]).unwrap()).abs() < 1e-12);
            assert!((pre.eval(&[t]).unwrap() - g.eval(&[t - 0.25]).unwrap()).abs() < 1e-12);
            assert!((post.eval(&[t]).unwrap() - (3.0 * v - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn incompatible_parts_rejected() {
        let g = hat();
        let two = ReluNet::zero(2);
        assert!(matches!(combine(&[g.clone(), two.clone()], &CombineMode::ParallelSum), Err(Error::Shape { .. })));
        assert!(matches!(combine(&[g.clone(), two], &CombineMode::SerialCompose), Err(Error::Shape { .. })));
        assert!(combine(&[], &CombineMode::ParallelSum).is_err());
        let m = CombineMode::AffinePre { matrix: SparseMatrix::identity(2), shift: vec![0.0; 2] };
        assert!(matches!(combine(&[g], &m), Err(Error::Shape { .. })));
    }
}
