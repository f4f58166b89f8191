//! Spatially sparse smooth regression targets.

pub mod lipschitz;
pub mod profile;
pub mod support;
pub mod target;

pub use lipschitz::{verify_lipschitz, LipschitzReport, PairStratum, StratumSummary};
pub use profile::{bump_profile, SmoothBumpProfile};
pub use support::{make_support, SparsitySupport};
pub use target::{cellwise_polynomial_target, rademacher_sparse_target, SparseSmoothTarget, TargetKind, TargetSpec};
