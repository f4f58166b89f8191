//! Rate sweeps, log-log slope fits and reports.
//!
//! Pass/fail decisions compare fitted exponents with the closed-form rates
//! `-r`, `1/p`, `d/(2r+d)` and `-2r/(2r+d)`; no constant enters them.

mod report;
mod slope;
mod sweep;
mod theory;

pub use report::{emit_report, render_csv, render_fit_csv, render_svg, ReportFormat};
pub use slope::{fit_loglog_slope, SlopeFit};
pub use sweep::{
    approx_rate_sweep, learning_rate_sweep, run_sweep, sparsity_factor_sweep, RateRow, RateTable, SparsityMode,
    SweepAxis, SweepConfig, SweepSpec,
};
pub use theory::{covering_bound_log, sample_size_gate_check, GateCheck};
