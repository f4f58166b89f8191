use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::eval::Evaluable;
use crate::rng::rng_from;
use crate::targets::SparseSmoothTarget;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Standard normal label noise.
    GaussianUnit,
    /// Uniform noise on `[-sigma_b, sigma_b]`.
    BoundedUniform { sigma_b: f64 },
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dim: usize,
    pub points: Vec<(Vec<f64>, f64)>,
    pub noise_model: NoiseModel,
    pub seed: u64,
    /// Label bound used for truncation.
    #[serde(rename = "M")]
    pub label_bound: f64,
}

impl Dataset {
    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Inputs concatenated row-major.
    pub fn inputs_flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|(x, _)| x.iter().copied()).collect()
    }
}

/// Draw `m` pairs with `x` uniform on the unit cube and `y = f(x) + noise`.
///
/// The label bound is `sup|f| + sigma_b` under bounded noise, `sup|f|`
/// without noise, and the largest observed `|y|` under Gaussian noise.
pub fn sample_dataset(f: &SparseSmoothTarget, m: usize, noise: NoiseModel, seed: u64) -> Result<Dataset> {
    precondition(m >= 1, || "a dataset needs at least one sample".to_string())?;
    if let NoiseModel::BoundedUniform { sigma_b } = noise {
        precondition(sigma_b >= 0.0 && sigma_b.is_finite(), || format!("sigma_b must be nonnegative, got {sigma_b}"))?;
    }
    let d = f.dim();
    let mut xr = rng_from(seed, &[0xD, 0]);
    let mut nr = rng_from(seed, &[0xD, 1]);
    let mut points = Vec::with_capacity(m);
    for _ in 0..m {
        let x: Vec<f64> = (0..d).map(|_| xr.gen::<f64>()).collect();
        let e = match noise {
            NoiseModel::GaussianUnit => nr.sample::<f64, _>(StandardNormal),
            NoiseModel::BoundedUniform { sigma_b } if sigma_b > 0.0 => nr.gen_range(-sigma_b..=sigma_b),
            _ => 0.0,
        };
        let y = f.value(&x) + e;
        points.push((x, y));
    }
    let label_bound = match noise {
        NoiseModel::BoundedUniform { sigma_b } => f.sup_bound() + sigma_b,
        NoiseModel::None => f.sup_bound(),
        NoiseModel::GaussianUnit => points.iter().fold(0.0f64, |a, (_, y)| a.max(y.abs())),
    };
    Ok(Dataset { dim: d, points, noise_model: noise, seed, label_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{cellwise_polynomial_target, make_support};

    fn target() -> SparseSmoothTarget {
        cellwise_polynomial_target(&make_support(2, 2, 2, 3).unwrap(), 1.0, 3).unwrap()
    }

    #[test]
    fn noiseless_labels_are_exact() {
        let f = target();
        let data = sample_dataset(&f, 100, NoiseModel::None, 1).unwrap();
        assert_eq!(data.m(), 100);
        for (x, y) in &data.points {
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(*y, f.value(x));
        }
        assert_eq!(data, sample_dataset(&f, 100, NoiseModel::None, 1).unwrap());
        assert!(sample_dataset(&f, 0, NoiseModel::None, 1).is_err());
    }

    #[test]
    fn bounded_labels_respect_bound() {
        let f = target();
        let data = sample_dataset(&f, 2000, NoiseModel::BoundedUniform { sigma_b: 0.5 }, 9).unwrap();
        assert!(data.points.iter().all(|(_, y)| y.abs() <= data.label_bound));
        assert_eq!(data.label_bound, f.sup_bound() + 0.5);
        let g = sample_dataset(&f, 2000, NoiseModel::GaussianUnit, 9).unwrap();
        assert!(g.points.iter().any(|(_, y)| y.abs() > 1.0));
    }
}
