use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::constructors::{assemble_local_polynomials, PartitionIndex};
use crate::error::{precondition, Result};
use crate::eval::Evaluable;
use crate::learner::{Dataset, Hyperparams};
use crate::net::{ConstructionTag, ReluNet};
use crate::poly::{multi_indices, order, MultiIndex, Polynomial};

const RIDGE_CONDITION: f64 = 1e12;
const RIDGE_SCALE: f64 = 1e-10;

/// A fitted estimator with its fit diagnostics.
#[derive(Clone, Debug)]
pub struct ErmFit {
    pub net: ReluNet,
    /// Nonzero fitted local polynomials in ascending cell order.
    pub polynomials: Vec<(usize, Polynomial)>,
    /// Mean squared residual of `net` on the training data.
    pub empirical_risk: f64,
    /// Parameters clamped to `[-R, R]`.
    pub clipped: usize,
    /// Cells with enough samples to fit.
    pub fitted_cells: usize,
    /// Fitted cells whose normal equations needed the ridge term.
    pub ridge_cells: usize,
    pub n_star: usize,
    pub tau: f64,
}

struct CellFit {
    poly: Option<Polynomial>,
    ridge: bool,
}

/// Least squares in the local coordinates `z = N_star (x - center)`, which
/// keep the design well scaled; coefficients are mapped back to `x`.
fn fit_cell(
    data: &Dataset,
    members: &[usize],
    center: &[f64],
    basis: &[MultiIndex],
    n_star: f64,
) -> CellFit {
    let q = basis.len();
    let rows = members.len();
    let mut design = DMatrix::<f64>::zeros(rows, q);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, &j) in members.iter().enumerate() {
        let (x, y) = &data.points[j];
        rhs[i] = *y;
        for (c, alpha) in basis.iter().enumerate() {
            let mut v = 1.0;
            for ((&a, xi), ci) in alpha.iter().zip(x).zip(center) {
                if a > 0 {
                    v *= (n_star * (xi - ci)).powi(a as i32);
                }
            }
            design[(i, c)] = v;
        }
    }
    let mut gram = design.transpose() * &design;
    let moment = design.transpose() * rhs;
    let eig = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let ridge = lo <= 0.0 || hi / lo > RIDGE_CONDITION;
    if ridge {
        let lambda = RIDGE_SCALE * gram.trace() / q as f64;
        for i in 0..q {
            gram[(i, i)] += lambda;
        }
    }
    let coef = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&moment),
        None => match gram.lu().solve(&moment) {
            Some(c) => c,
            None => return CellFit { poly: None, ridge },
        },
    };
    let terms: Vec<(MultiIndex, f64)> = basis
        .iter()
        .zip(coef.iter())
        .map(|(a, &c)| (a.clone(), c * n_star.powi(order(a) as i32)))
        .collect();
    let poly = Polynomial::new(center.to_vec(), terms).ok().filter(|p| !p.is_zero());
    CellFit { poly, ridge }
}

/// Fit local polynomials cell by cell and realize them as one net.
///
/// Cells with fewer than `C(u + d, d)` samples are left at zero. Returns
/// the clipped net together with its training risk.
pub fn erm_fit(data: &Dataset, hp: &Hyperparams) -> Result<ErmFit> {
    precondition(data.m() >= 1, || "cannot fit an empty dataset".to_string())?;
    precondition(data.dim == hp.d, || format!("dataset has d = {}, parameters have d = {}", data.dim, hp.d))?;
    let partition = PartitionIndex::new(hp.n, hp.n_star, hp.d)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); partition.fine.len()];
    for (i, (x, _)) in data.points.iter().enumerate() {
        members[partition.fine.cell_of(x)].push(i);
    }
    let basis = multi_indices(hp.d, hp.u);
    let threshold = basis.len();
    let n_star = hp.n_star as f64;
    let fits: Vec<(usize, CellFit)> = members
        .par_iter()
        .enumerate()
        .filter(|(_, m)| m.len() >= threshold)
        .map(|(k, m)| (k, fit_cell(data, m, &partition.fine.center(k), &basis, n_star)))
        .collect();
    let fitted_cells = fits.len();
    let ridge_cells = fits.iter().filter(|(_, f)| f.ridge).count();
    let polynomials: Vec<(usize, Polynomial)> = fits.into_iter().filter_map(|(k, f)| f.poly.map(|p| (k, p))).collect();

    let (eps_poly, eps_pair) = hp.eps.resolve(hp.n_star, hp.d, hp.r);
    let assembled = assemble_local_polynomials(&partition, &polynomials, hp.tau, eps_poly, eps_pair)?;
    let (mut net, clipped) = assembled.net.clipped(hp.weight_bound);
    net.set_tag(ConstructionTag::Learned);
    net.insert_info("weight_bound", hp.weight_bound);
    net.insert_info("clipped", clipped as f64);
    net.insert_info("fitted_cells", fitted_cells as f64);

    let empirical_risk = empirical_risk(&net, data);
    if clipped > 0 {
        log::warn!("{clipped} parameters clipped to the bound {}", hp.weight_bound);
    }
    Ok(ErmFit { net, polynomials, empirical_risk, clipped, fitted_cells, ridge_cells, n_star: hp.n_star, tau: hp.tau })
}

/// `(1/m) sum_i (f(x_i) - y_i)^2`, summed in a fixed order.
pub(crate) fn empirical_risk<E: Evaluable + ?Sized>(f: &E, data: &Dataset) -> f64 {
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = data
        .points
        .par_chunks(CHUNK)
        .map(|chunk| {
            let xs: Vec<f64> = chunk.iter().flat_map(|(x, _)| x.iter().copied()).collect();
            let mut out = vec![0.0; chunk.len()];
            f.values(&xs, &mut out);
            out.iter().zip(chunk).map(|(v, (_, y))| (v - y).powi(2)).sum::<f64>()
        })
        .collect();
    partial.iter().sum::<f64>() / data.m() as f64
}
