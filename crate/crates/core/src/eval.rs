use crate::error::{Error, Result};

/// A real-valued function on `R^d`.
pub trait Evaluable: Sync {
    fn dim(&self) -> usize;

    /// Value at `x`; `x.len()` must equal `dim()`.
    fn value(&self, x: &[f64]) -> f64;

    /// Evaluate a batch of points stored row-major in `xs`.
    fn values(&self, xs: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for (x, o) in xs.chunks_exact(d).zip(out.iter_mut()) {
            *o = self.value(x);
        }
    }
}

/// Functions with access to partial derivatives.
pub trait Smooth: Evaluable {
    /// `∂^alpha f(x)` with `alpha` a multi-index of length `dim()`.
    fn partial(&self, alpha: &[u32], x: &[f64]) -> Result<f64>;
}

impl<T: Evaluable + ?Sized> Evaluable for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn values(&self, xs: &[f64], out: &mut [f64]) {
        (**self).values(xs, out)
    }
}

impl<T: Smooth + ?Sized> Smooth for &T {
    fn partial(&self, alpha: &[u32], x: &[f64]) -> Result<f64> {
        (**self).partial(alpha, x)
    }
}

/// Wraps a closure as an [`Evaluable`].
pub struct FnEval<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnEval<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Evaluable for FnEval<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Supplies partial derivatives of a plain [`Evaluable`] by nested central
/// differences with step `h` per differentiation (truncation error `O(h^2)`,
/// rounding error roughly `eps_machine / h^|alpha|`). The default step
/// `1e-3` is adequate up to order 3.
pub struct FiniteDifference<E> {
    inner: E,
    step: f64,
}

impl<E: Evaluable> FiniteDifference<E> {
    pub const DEFAULT_STEP: f64 = 1e-3;

    pub fn new(inner: E) -> Self {
        Self { inner, step: Self::DEFAULT_STEP }
    }

    pub fn with_step(inner: E, step: f64) -> Self {
        Self { inner, step }
    }

    fn diff(&self, alpha: &mut [u32], x: &mut [f64]) -> f64 {
        let Some(i) = alpha.iter().position(|&a| a > 0) else {
            return self.inner.value(x);
        };
        alpha[i] -= 1;
        let h = self.step;
        let xi = x[i];
        x[i] = xi + h;
        let plus = self.diff(alpha, x);
        x[i] = xi - h;
        let minus = self.diff(alpha, x);
        x[i] = xi;
        alpha[i] += 1;
        (plus - minus) / (2.0 * h)
    }
}

impl<E: Evaluable> Evaluable for FiniteDifference<E> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x)
    }
}

impl<E: Evaluable> Smooth for FiniteDifference<E> {
    fn partial(&self, alpha: &[u32], x: &[f64]) -> Result<f64> {
        if alpha.len() != self.dim() || x.len() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got: alpha.len().min(x.len()) });
        }
        let mut alpha = alpha.to_vec();
        let mut x = x.to_vec();
        Ok(self.diff(&mut alpha, &mut x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_of_cubic() {
        let f = FiniteDifference::new(FnEval::new(2, |x: &[f64]| x[0].powi(3) * x[1]));
        let d = f.partial(&[1, 1], &[0.5, 2.0]).unwrap();
        assert!((d - 0.75).abs() < 1e-5, "{d}");
        let d2 = f.partial(&[2, 0], &[0.5, 2.0]).unwrap();
        assert!((d2 - 6.0).abs() < 1e-4, "{d2}");
    }
}
