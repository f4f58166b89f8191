//! Partition least-squares learning over the assembled network class.
//!
//! Within the assembly architecture the only data-dependent parameters are
//! the local polynomial coefficients, so the fit solves one small least
//! squares problem per fine cell and realizes the result as a net. Cells
//! with fewer samples than monomials get the zero polynomial.

mod data;
mod fit;
mod hyper;
mod risk;

pub use data::{sample_dataset, Dataset, NoiseModel};
pub use fit::{erm_fit, ErmFit};
pub use hyper::{choose_resolution, choose_tau, weight_bound, Hyperparams, Resolution};
pub use risk::{l2_error, truncate, L2Estimate, Truncated};
