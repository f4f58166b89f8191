//! Explicit network constructions.

pub mod assembly;
pub mod localized;
pub mod partition;
pub mod poly_gate;
pub mod product;
pub mod taylor;
pub mod trapezoid;

pub use assembly::{
    assemble_local_polynomials, hybrid_local_taylor, sparse_approx_net, Assembled, AssemblyParams, GateEps,
    LocalTaylorSum,
};
pub use localized::{localized_net, localized_value};
pub use partition::{CubicPartition, PartitionIndex};
pub use poly_gate::poly_net;
pub use product::{gate_error_report, product_gate, sawtooth_count, GateReport};
pub use taylor::{smoothness_split, taylor_eval, taylor_poly, TaylorPoly};
pub use trapezoid::{bump_net, bump_value, trapezoid_net, trapezoid_value, TrapezoidSpec};
