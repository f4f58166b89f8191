//! Product gates on `[-1, 1]^ell`.
//!
//! Squaring on `[0,1]` uses the sawtooth expansion
//! `y^2 ~ f_K(y) = y - sum_{s=1..K} g_s(y) / 4^s`, where `g_s` is the s-fold
//! composition of the hat `g(y) = 2relu(y) - 4relu(y - 1/2) + 2relu(y - 1)`.
//! Each stage is one layer of three hat units plus one unit carrying the
//! partial sum, which stays nonnegative. Pairs are multiplied by
//! `xy = 2 (f(|x+y|/2) - f(|x|/2) - f(|y|/2))` after clamping both inputs to
//! `[-1, 1]`; the result is exact whenever one factor is zero.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::net::block::Affine;
use crate::net::{Block, ConstructionTag, ReluNet};
use crate::rng::rng_from;
use crate::sparse::SparseMatrix;

/// Number of sawtooth stages giving pair error below `eps_pair`:
/// the error is at most `1.5 * 4^-K`.
pub fn sawtooth_count(eps_pair: f64) -> u32 {
    ((1.0 / eps_pair).log2() / 2.0).ceil().max(0.0) as u32 + 1
}

fn hat_rows(triplets: &mut Vec<(usize, usize, f64)>, bias: &mut Vec<f64>, base_row: usize, src: &[(usize, f64)]) {
    for (q, off) in [0.0, -0.5, -1.0].into_iter().enumerate() {
        for &(c, w) in src {
            triplets.push((base_row + q, c, w));
        }
        bias.push(off);
    }
}

/// `f_K` on one input in `[0, 1]`.
fn square_block(k: u32) -> Block {
    assert!(k >= 1);
    let mut hidden = Vec::with_capacity(k as usize);
    let (mut t, mut b) = (Vec::new(), Vec::new());
    hat_rows(&mut t, &mut b, 0, &[(0, 1.0)]);
    hidden.push(Affine::new(SparseMatrix::from_triplets(3, 1, t), b));
    let mut acc = 0usize;
    let mut width = 3usize;
    for s in 1..k {
        let g = [(0usize, 2.0), (1, -4.0), (2, 2.0)];
        let (mut t, mut b) = (Vec::new(), Vec::new());
        hat_rows(&mut t, &mut b, 0, &g);
        let damp = 0.25f64.powi(s as i32);
        t.push((3, acc, 1.0));
        for &(c, w) in &g {
            t.push((3, c, -w * damp));
        }
        b.push(0.0);
        hidden.push(Affine::new(SparseMatrix::from_triplets(4, width, t), b));
        acc = 3;
        width = 4;
    }
    let damp = 0.25f64.powi(k as i32);
    let mut out = vec![(0usize, acc, 1.0)];
    out.extend([(0usize, 0usize, -2.0 * damp), (0, 1, 4.0 * damp), (0, 2, -2.0 * damp)]);
    Block::new(1, hidden, Affine::new(SparseMatrix::from_triplets(1, width, out), vec![0.0]))
}

/// Approximate `x * y` for `(x, y)` in `[-1,1]^2` to accuracy `eps_pair`.
pub(crate) fn pair_block(eps_pair: f64) -> Block {
    let k = sawtooth_count(eps_pair);
    // clamp layer: relu(x+1), relu(x-1), relu(y+1), relu(y-1)
    let clamp = Affine::new(
        SparseMatrix::from_triplets(4, 2, [(0, 0, 1.0), (1, 0, 1.0), (2, 1, 1.0), (3, 1, 1.0)]),
        vec![1.0, -1.0, 1.0, -1.0],
    );
    // xc = u0 - u1 - 1, yc = u2 - u3 - 1; units relu(+-(xc+yc)), relu(+-xc), relu(+-yc)
    let sum = [(0usize, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)];
    let xs = [(0usize, 1.0), (1, -1.0)];
    let ys = [(2usize, 1.0), (3, -1.0)];
    let mut t = Vec::new();
    for (r, src) in [&sum[..], &xs[..], &ys[..]].into_iter().enumerate() {
        for &(c, w) in src {
            t.push((2 * r, c, w));
            t.push((2 * r + 1, c, -w));
        }
    }
    let abs = Affine::new(SparseMatrix::from_triplets(6, 4, t), vec![-2.0, 2.0, -1.0, 1.0, -1.0, 1.0]);
    let halves = SparseMatrix::from_triplets(3, 6, (0..6).map(|i| (i / 2, i, 0.5)));
    let front = Block::new(2, vec![clamp, abs], Affine::new(halves, vec![0.0; 3]));
    let chains = Block::diag(vec![square_block(k), square_block(k), square_block(k)]);
    front.then(&chains).weighted_sum(&[2.0, -2.0, -2.0])
}

/// Product of all `ell` inputs by a balanced tree of pair gates.
pub(crate) fn product_block(ell: usize, eps: f64) -> Block {
    assert!(ell >= 1);
    let mut level: Vec<Block> = (0..ell).map(|i| Block::select(ell, &[i])).collect();
    if ell == 1 {
        return level.pop().expect("one factor");
    }
    let pair = pair_block(eps / (2.0 * ell as f64));
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(left) = it.next() {
            match it.next() {
                Some(right) => next.push(Block::stack(vec![left, right]).then(&pair)),
                None => next.push(left),
            }
        }
        level = next;
    }
    level.pop().expect("nonempty tree")
}

/// Net with `ell` inputs whose output is within `eps` of their product on
/// `[-1, 1]^ell`.
pub fn product_gate(ell: usize, eps: f64) -> Result<ReluNet> {
    precondition(ell >= 2, || format!("product gate needs ell >= 2, got {ell}"))?;
    precondition(eps > 0.0 && eps < 1.0, || format!("eps must lie in (0, 1), got {eps}"))?;
    let mut net = product_block(ell, eps).into_net(ConstructionTag::ProductGate)?;
    net.insert_info("eps", eps);
    net.insert_info("ell", ell as f64);
    net.insert_info("sawtooth_count", sawtooth_count(eps / (2.0 * ell as f64)) as f64);
    Ok(net)
}

/// Measured accuracy of one gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub gate: String,
    pub ell: usize,
    pub eps_declared: f64,
    pub eps_measured: f64,
    pub samples: usize,
    pub seed: u64,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.eps_measured <= self.eps_declared
    }

    pub fn csv(reports: &[GateReport]) -> String {
        let mut s = String::from("gate,ell,eps_declared,eps_measured,samples,seed\n");
        for r in reports {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.gate, r.ell, r.eps_declared, r.eps_measured, r.samples, r.seed
            ));
        }
        s
    }
}

/// Max error of [`product_gate`] over `samples` seeded uniform points.
pub fn gate_error_report(ell: usize, eps: f64, samples: usize, seed: u64) -> Result<GateReport> {
    let net = product_gate(ell, eps)?;
    let mut rng = rng_from(seed, &[ell as u64, eps.to_bits()]);
    let mut ev = net.evaluator();
    let mut x = vec![0.0; ell];
    let mut worst = 0.0f64;
    for _ in 0..samples {
        x.iter_mut().for_each(|t| *t = rng.gen_range(-1.0..=1.0));
        let exact: f64 = x.iter().product();
        worst = worst.max((ev.eval(&x) - exact).abs());
    }
    Ok(GateReport { gate: "product".into(), ell, eps_declared: eps, eps_measured: worst, samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squaring_error_bound() {
        for k in 1..6 {
            let b = square_block(k);
            assert_eq!(b.depth(), k as usize);
            let mut worst = 0.0f64;
            for i in 0..=1000 {
                let y = i as f64 / 1000.0;
                worst = worst.max((b.eval_all(&[y])[0] - y * y).abs());
            }
            assert!(worst <= 0.25f64.powi(k as i32 + 1) + 1e-15, "k = {k}: {worst}");
        }
    }

    #[test]
    fn pair_gate_examples() {
        let g = product_gate(2, 1e-3).unwrap();
        assert!((g.eval(&[0.5, 0.5]).unwrap() - 0.25).abs() <= 1e-3);
        assert_eq!(g.eval(&[0.0, 0.7]).unwrap(), 0.0);
        assert_eq!(g.eval(&[-0.3, 0.0]).unwrap(), 0.0);
        let coarse = product_gate(2, 1e-2).unwrap();
        let mut worst = 0.0f64;
        for i in 0..100 {
            for j in 0..100 {
                let (x, y) = (-1.0 + 2.0 * i as f64 / 99.0, -1.0 + 2.0 * j as f64 / 99.0);
                worst = worst.max((coarse.eval(&[x, y]).unwrap() - x * y).abs());
            }
        }
        assert!(worst <= 1e-2, "{worst}");
    }

    #[test]
    fn zero_factor_kills_triple_product() {
        let g = product_gate(3, 1e-3).unwrap();
        let mut rng = rng_from(3, &[]);
        for _ in 0..200 {
            let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            assert!(g.eval(&[0.0, a, b]).unwrap().abs() <= 1e-3);
        }
    }

    #[test]
    fn report_csv() {
        let r = gate_error_report(2, 1e-2, 500, 9).unwrap();
        assert!(r.passed());
        let csv = GateReport::csv(&[r]);
        assert!(csv.starts_with("gate,ell,eps_declared,eps_measured,samples,seed\nproduct,2,0.01,"));
    }
}
