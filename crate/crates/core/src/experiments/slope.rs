use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{precondition, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope.
    pub ci: (f64, f64),
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    precondition(points.len() >= 3, || format!("slope fit needs at least 3 points, got {}", points.len()))?;
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Domain(format!("log-log fit needs positive finite coordinates, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    precondition(sxx > 0.0, || "slope fit needs at least two distinct abscissae".to_string())?;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = n - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).expect("dof >= 1").inverse_cdf(0.975);
    Ok(SlopeFit { slope, intercept, ci: (slope - t * se, slope + t * se) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use rand::Rng;

    #[test]
    fn exact_power_laws() {
        let sq: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, x * x)).collect();
        let f = fit_loglog_slope(&sq).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.ci.1 - f.ci.0).abs() < 1e-9);
        let flat: Vec<(f64, f64)> = [1.0, 3.0, 9.0].iter().map(|&x| (x, 5.0)).collect();
        assert!(fit_loglog_slope(&flat).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = rng_from(11, &[]);
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|k| {
                let x = 2f64.powi(k);
                (x, x.powf(-2.0 / 3.0) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((-0.70..=-0.63).contains(&f.slope), "{f:?}");
        assert!(f.ci.0 <= f.slope && f.slope <= f.ci.1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::Domain(_))));
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }
}
