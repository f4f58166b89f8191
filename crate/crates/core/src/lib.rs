//! Constructive deep ReLU networks for spatially sparse smooth regression.
//!
//! The crate builds explicit networks (trapezoid and bump gates, localized
//! nets, product and polynomial gates, and sparse local Taylor assemblies),
//! generates spatially sparse smooth targets, fits a partition-based least
//! squares estimator realized as a ReLU net, and measures empirical rates.

pub mod constructors;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod learner;
pub mod net;
pub mod poly;
pub mod rng;
pub mod sparse;
pub mod targets;

pub use error::{Error, Result};
pub use eval::{Evaluable, FiniteDifference, FnEval, Smooth};
pub use net::{ConstructionTag, NetMetadata, NetStats, ReluNet};
