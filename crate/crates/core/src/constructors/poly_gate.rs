//! Polynomial gates: sums of monomial product trees.

use crate::constructors::product::product_block;
use crate::error::{precondition, Result};
use crate::net::{Block, ConstructionTag, ReluNet};
use crate::poly::{order, Polynomial};
use crate::sparse::SparseMatrix;

/// Network realization of `p` accurate to `eps` wherever every shifted
/// coordinate `x_j - center_j` lies in `[-1, 1]`. Degree-0 and degree-1
/// terms are carried exactly by the affine output map.
pub(crate) fn poly_block(p: &Polynomial, eps: f64) -> Block {
    let d = p.dim();
    let center = p.center();
    let mut lin = vec![0.0; d];
    let mut offset = 0.0;
    let mut nonlinear = Vec::new();
    for (alpha, c) in p.terms() {
        if *c == 0.0 {
            continue;
        }
        match order(alpha) {
            0 => offset += c,
            1 => {
                let j = alpha.iter().position(|&a| a == 1).expect("order one");
                lin[j] += c;
                offset -= c * center[j];
            }
            _ => nonlinear.push((alpha, *c)),
        }
    }
    let linear = Block::affine(SparseMatrix::from_dense(1, d, &lin), vec![offset]);
    if nonlinear.is_empty() {
        return linear;
    }
    let budget: f64 = nonlinear.iter().map(|(_, c)| c.abs()).sum();
    let eps_m = eps / budget;
    let mut parts = vec![linear];
    let mut weights = vec![1.0];
    for (alpha, c) in nonlinear {
        let factors: Vec<usize> = alpha.iter().enumerate().flat_map(|(j, &a)| std::iter::repeat(j).take(a as usize)).collect();
        let sel = SparseMatrix::from_triplets(factors.len(), d, factors.iter().enumerate().map(|(r, &j)| (r, j, 1.0)));
        let shift = factors.iter().map(|&j| -center[j]).collect();
        parts.push(product_block(factors.len(), eps_m).pre_affine(sel, shift));
        weights.push(c);
    }
    Block::stack(parts).weighted_sum(&weights)
}

/// Net within `eps` of `p` on `[0,1]^d` provided the expansion center lies
/// in `[0,1]^d` (so every shifted coordinate is in `[-1, 1]`).
pub fn poly_net(p: &Polynomial, eps: f64) -> Result<ReluNet> {
    precondition(eps > 0.0 && eps < 1.0, || format!("eps must lie in (0, 1), got {eps}"))?;
    let mut net = poly_block(p, eps).into_net(ConstructionTag::PolyGate)?;
    net.insert_info("eps", eps);
    net.insert_info("degree", p.degree() as f64);
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use rand::Rng;

    #[test]
    fn bilinear_example() {
        let p = Polynomial::at_origin(2, vec![(vec![1, 1], 1.0)]).unwrap();
        let net = poly_net(&p, 1e-2).unwrap();
        assert!((net.eval(&[0.5, 0.5]).unwrap() - 0.25).abs() <= 1e-2);
    }

    #[test]
    fn affine_polynomials_are_exact() {
        let c = Polynomial::constant(3, -1.75);
        let net = poly_net(&c, 1e-3).unwrap();
        assert_eq!(net.eval(&[0.2, 0.9, 0.4]).unwrap(), -1.75);
        let lin = Polynomial::new(vec![0.5, 0.5], vec![(vec![0, 0], 0.5), (vec![1, 0], 2.0), (vec![0, 1], -1.0)]).unwrap();
        let net = poly_net(&lin, 1e-3).unwrap();
        for &x in &[[0.0, 0.0], [0.25, 1.0], [1.0, 0.5]] {
            assert!((net.eval(&x).unwrap() - lin.eval(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn random_cubic_on_grid() {
        let mut rng = rng_from(11, &[]);
        let terms = crate::poly::multi_indices(2, 3).into_iter().map(|a| (a, rng.gen_range(-1.0..=1.0))).collect();
        let p = Polynomial::new(vec![rng.gen(), rng.gen()], terms).unwrap();
        let eps = 1e-2;
        let net = poly_net(&p, eps).unwrap();
        let mut worst = 0.0f64;
        for i in 0..100 {
            for j in 0..100 {
                let x = [i as f64 / 99.0, j as f64 / 99.0];
                worst = worst.max((net.eval(&x).unwrap() - p.eval(&x)).abs());
            }
        }
        assert!(worst <= eps, "{worst}");
    }
}
