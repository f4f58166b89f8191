use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::eval::Evaluable;
use crate::rng::rng_from;

/// `x -> sign(f(x)) min(|f(x)|, M)`.
#[derive(Clone, Debug)]
pub struct Truncated<E> {
    inner: E,
    bound: f64,
}

impl<E> Truncated<E> {
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }
}

pub fn truncate<E: Evaluable>(f: E, bound: f64) -> Result<Truncated<E>> {
    precondition(bound > 0.0, || format!("truncation level must be positive, got {bound}"))?;
    Ok(Truncated { inner: f, bound })
}

impl<E: Evaluable> Evaluable for Truncated<E> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x).clamp(-self.bound, self.bound)
    }

    fn values(&self, xs: &[f64], out: &mut [f64]) {
        self.inner.values(xs, out);
        for v in out.iter_mut() {
            *v = v.clamp(-self.bound, self.bound);
        }
    }
}

/// Monte Carlo estimate of `∫ (f_hat - f)^2` under the uniform law on the
/// unit cube.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_mc: usize,
}

impl L2Estimate {
    /// Root of the estimate with a delta-method standard error.
    pub fn norm(&self) -> (f64, f64) {
        let root = self.estimate.sqrt();
        let se = if root > 0.0 { self.std_error / (2.0 * root) } else { 0.0 };
        (root, se)
    }
}

const CHUNK: usize = 4096;

pub fn l2_error<A, B>(f_hat: &A, f: &B, n_mc: usize, seed: u64) -> Result<L2Estimate>
where
    A: Evaluable + ?Sized,
    B: Evaluable + ?Sized,
{
    precondition(n_mc >= 100, || format!("need at least 100 Monte Carlo points, got {n_mc}"))?;
    let d = f.dim();
    if f_hat.dim() != d {
        return Err(Error::Shape { expected: d, got: f_hat.dim() });
    }
    let mut rng = rng_from(seed, &[0xE]);
    let xs: Vec<f64> = (0..n_mc * d).map(|_| rng.gen::<f64>()).collect();
    let sq: Vec<f64> = xs
        .par_chunks(CHUNK * d)
        .flat_map_iter(|chunk| {
            let n = chunk.len() / d;
            let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
            f_hat.values(chunk, &mut a);
            f.values(chunk, &mut b);
            a.into_iter().zip(b).map(|(u, v)| (u - v).powi(2))
        })
        .collect();
    let n = n_mc as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(L2Estimate { estimate: mean, std_error: (var / n).sqrt(), n_mc })
}
