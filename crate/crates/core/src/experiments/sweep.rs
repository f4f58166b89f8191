use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructors::{sparse_approx_net, AssemblyParams, PartitionIndex};
use crate::error::{precondition, Error, Result};
use crate::eval::Evaluable;
use crate::experiments::slope::fit_loglog_slope;
use crate::experiments::theory::{sample_size_gate_check, GateCheck};
use crate::learner::{erm_fit, l2_error, sample_dataset, truncate, Hyperparams, NoiseModel};
use crate::rng::derive_seed;
use crate::targets::{SparseSmoothTarget, TargetSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "m")]
    M,
    #[serde(rename = "N_star")]
    NStar,
    #[serde(rename = "s")]
    S,
    #[serde(rename = "N")]
    N,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::NStar => "N_star",
            SweepAxis::S => "s",
            SweepAxis::N => "N",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            SweepAxis::M => 1,
            SweepAxis::NStar => 2,
            SweepAxis::S => 3,
            SweepAxis::N => 4,
        }
    }
}

/// What a sparsity sweep measures at each `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SparsityMode {
    /// L² norm of the approximation error at a fixed `N_star`.
    Approximation,
    /// Mean squared error of the learning pipeline at a fixed sample size.
    Learning { m: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub trials: usize,
    pub seed: u64,
    pub n_mc: usize,
    /// Slope tolerance; `None` selects the default for the sweep kind.
    pub tolerance: Option<f64>,
    pub p: f64,
    pub noise: NoiseModel,
    /// Stand-in for the unidentifiable sample-size constant.
    pub cstar_proxy: f64,
    pub exclude_below_gate: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            trials: 1,
            seed: 0,
            n_mc: 20_000,
            tolerance: None,
            p: 2.0,
            noise: NoiseModel::BoundedUniform { sigma_b: 1.0 },
            cstar_proxy: 1.0,
            exclude_below_gate: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub value: f64,
    /// Abscissa of the fit: the axis value, or `m / ln m` on the `m` axis.
    pub abscissa: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub trials: usize,
    /// Gate-accuracy level below which the error carries no rate information.
    pub floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateCheck>,
    /// Whether the row enters the slope fit.
    pub included: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub axis: SweepAxis,
    /// `l2_norm` or `mse`.
    pub measure: String,
    pub rows: Vec<RateRow>,
    pub fitted_slope: Option<f64>,
    pub intercept: Option<f64>,
    pub slope_ci: Option<(f64, f64)>,
    pub theory_slope: f64,
    /// Second theory exponent where two statements differ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_theory_slope: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// False when every error sits at the gate floor and no fit was made.
    pub informative: bool,
    /// Axis values left out of the fit.
    pub excluded: Vec<f64>,
}

impl RateTable {
    fn finish(axis: SweepAxis, measure: &str, rows: Vec<RateRow>, theory: f64, tolerance: f64) -> Result<Self> {
        let excluded = rows.iter().filter(|r| !r.included).map(|r| r.value).collect();
        let informative = rows.iter().any(|r| r.included && r.mean_error > r.floor);
        let pts: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.included && r.mean_error > 0.0).map(|r| (r.abscissa, r.mean_error)).collect();
        let mut table = RateTable {
            axis,
            measure: measure.to_string(),
            rows,
            fitted_slope: None,
            intercept: None,
            slope_ci: None,
            theory_slope: theory,
            alt_theory_slope: None,
            tolerance,
            pass: false,
            informative,
            excluded,
        };
        if informative && pts.len() >= 3 {
            let fit = fit_loglog_slope(&pts)?;
            table.fitted_slope = Some(fit.slope);
            table.intercept = Some(fit.intercept);
            table.slope_ci = Some(fit.ci);
            table.pass = fit.ci.0 - tolerance <= theory && theory <= fit.ci.1 + tolerance;
        } else {
            log::info!("{} sweep: slope fit skipped (non-informative errors)", axis.name());
        }
        Ok(table)
    }
}

fn check_grid(grid: &[usize]) -> Result<()> {
    precondition(grid.len() >= 3, || format!("a sweep grid needs at least 3 values, got {}", grid.len()))?;
    precondition(grid.windows(2).all(|w| w[0] < w[1]), || format!("sweep grid {grid:?} is not strictly increasing"))
}

fn check_config(cfg: &SweepConfig) -> Result<()> {
    precondition(cfg.trials >= 1, || "trials per point must be at least 1".to_string())?;
    precondition(cfg.n_mc >= 100, || format!("need at least 100 Monte Carlo points, got {}", cfg.n_mc))
}

/// Mean over trials and its standard error; a single trial falls back to
/// its own Monte Carlo error.
fn summarize(samples: &[(f64, f64)]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.0).sum::<f64>() / n;
    if samples.len() == 1 {
        return (mean, samples[0].1);
    }
    let var = samples.iter().map(|s| (s.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn gate_floor(n_star: usize, d: usize, r: f64) -> f64 {
    (n_star as f64).powf(-(d as f64 + r))
}

/// L² norm error of the assembled approximant, one Monte Carlo run per
/// trial.
fn approx_errors(
    target: &SparseSmoothTarget,
    n_star: usize,
    cfg: &SweepConfig,
    tags: [u64; 2],
) -> Result<Vec<(f64, f64)>> {
    let support = target.support();
    let partition = PartitionIndex::new(support.n(), n_star, target.dim())?;
    let params = AssemblyParams { p: cfg.p, ..AssemblyParams::new(target.r(), support.s()) };
    let net = sparse_approx_net(target, &partition, &params)?.net;
    (0..cfg.trials)
        .map(|t| {
            let e = l2_error(&net, target, cfg.n_mc, derive_seed(cfg.seed, &[tags[0], tags[1], t as u64]))?;
            Ok(e.norm())
        })
        .collect()
}

/// One run of sample, fit, truncate and measure; returns the mean squared
/// error and its Monte Carlo standard error.
fn learning_trial(target: &SparseSmoothTarget, m: usize, cfg: &SweepConfig, seed: u64) -> Result<(f64, f64)> {
    let support = target.support();
    let (hp, _) = Hyperparams::for_sample(m, support.n(), support.s(), target.dim(), target.r(), cfg.p)?;
    let data = sample_dataset(target, m, cfg.noise, derive_seed(seed, &[0]))?;
    let fit = erm_fit(&data, &hp)?;
    // A zero label bound (noiseless zero target) truncates to the zero function.
    let est = truncate(&fit.net, data.label_bound.max(f64::MIN_POSITIVE))?;
    let e = l2_error(&est, target, cfg.n_mc, derive_seed(seed, &[1]))?;
    Ok((e.estimate, e.std_error))
}

fn learning_row(
    target: &SparseSmoothTarget,
    m: usize,
    cfg: &SweepConfig,
    tags: [u64; 2],
) -> Result<(Vec<(f64, f64)>, usize)> {
    let support = target.support();
    let res = crate::learner::choose_resolution(m, support.s(), support.n(), target.dim(), target.r(), cfg.p)?;
    let samples = (0..cfg.trials)
        .into_par_iter()
        .map(|t| learning_trial(target, m, cfg, derive_seed(cfg.seed, &[tags[0], tags[1], t as u64])))
        .collect::<Result<Vec<_>>>()?;
    Ok((samples, res.n_star))
}

/// L² approximation error against `N_star`; theory slope `-r`.
pub fn approx_rate_sweep(target: &SparseSmoothTarget, grid: &[usize], cfg: &SweepConfig) -> Result<RateTable> {
    check_grid(grid)?;
    check_config(cfg)?;
    let n = target.support().n();
    if let Some(&bad) = grid.iter().find(|&&g| g < 4 * n) {
        return Err(Error::Precondition(format!("resolution {bad} is below 4N = {}", 4 * n)));
    }
    let axis = SweepAxis::NStar;
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &ns)| {
            let samples = approx_errors(target, ns, cfg, [axis.tag(), i as u64])?;
            let (mean, se) = summarize(&samples);
            Ok(RateRow {
                value: ns as f64,
                abscissa: ns as f64,
                mean_error: mean,
                std_error: se,
                trials: cfg.trials,
                floor: gate_floor(ns, target.dim(), target.r()),
                gate: None,
                included: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RateTable::finish(axis, "l2_norm", rows, -target.r(), cfg.tolerance.unwrap_or(0.3))
}

/// Error against the number of support cells `s` at fixed `N` and `N_star`,
/// with targets rebuilt from `family` for every `s`. Supports are nested
/// across `s`, so the same seed controls the profile throughout.
pub fn sparsity_factor_sweep(
    grid: &[usize],
    n: usize,
    n_star: usize,
    family: &TargetSpec,
    mode: SparsityMode,
    cfg: &SweepConfig,
) -> Result<RateTable> {
    check_grid(grid)?;
    check_config(cfg)?;
    let d = family.d;
    let cells = (n as f64).powi(d as i32);
    if let Some(&bad) = grid.iter().find(|&&s| s as f64 > cells) {
        return Err(Error::Precondition(format!("s = {bad} exceeds N^d = {cells}")));
    }
    let axis = SweepAxis::S;
    let r = family.r;
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let spec = TargetSpec { n, s, ..family.clone() };
            let target = spec.build()?;
            let tags = [axis.tag(), i as u64];
            let (samples, floor, trials) = match mode {
                SparsityMode::Approximation => {
                    (approx_errors(&target, n_star, cfg, tags)?, gate_floor(n_star, d, r), cfg.trials)
                }
                SparsityMode::Learning { m } => {
                    let (samples, ns) = learning_row(&target, m, cfg, tags)?;
                    (samples, gate_floor(ns, d, r).powi(2), cfg.trials)
                }
            };
            let (mean, se) = summarize(&samples);
            Ok(RateRow {
                value: s as f64,
                abscissa: s as f64,
                mean_error: mean,
                std_error: se,
                trials,
                floor,
                gate: None,
                included: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rate = d as f64 / (2.0 * r + d as f64);
    match mode {
        SparsityMode::Approximation => {
            RateTable::finish(axis, "l2_norm", rows, 1.0 / cfg.p, cfg.tolerance.unwrap_or(0.2))
        }
        SparsityMode::Learning { .. } => {
            let mut t = RateTable::finish(axis, "mse", rows, rate, cfg.tolerance.unwrap_or(0.2))?;
            t.alt_theory_slope = Some(2.0 / cfg.p - 2.0 * r / (2.0 * r + d as f64));
            Ok(t)
        }
    }
}

/// Mean squared error of the truncated estimator against `m / ln m`;
/// theory slope `-2r / (2r + d)`. Points outside the sample-size regime
/// are excluded from the fit unless configured otherwise.
pub fn learning_rate_sweep(target: &SparseSmoothTarget, grid: &[usize], cfg: &SweepConfig) -> Result<RateTable> {
    check_grid(grid)?;
    check_config(cfg)?;
    precondition(grid[0] >= 2, || "sample sizes must be at least 2".to_string())?;
    precondition(grid[grid.len() - 1] >= 8 * grid[0], || format!("m grid {grid:?} spans fewer than 3 octaves"))?;
    let (n, s, d, r) = (target.support().n(), target.support().s(), target.dim(), target.r());
    let axis = SweepAxis::M;
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &m)| {
            let (samples, ns) = learning_row(target, m, cfg, [axis.tag(), i as u64])?;
            let (mean, se) = summarize(&samples);
            let gate = sample_size_gate_check(m, n, s, d, r, cfg.cstar_proxy)?;
            let mf = m as f64;
            Ok(RateRow {
                value: mf,
                abscissa: mf / mf.ln(),
                mean_error: mean,
                std_error: se,
                trials: cfg.trials,
                floor: gate_floor(ns, d, r).powi(2),
                gate: Some(gate),
                included: gate.satisfied || !cfg.exclude_below_gate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let theory = -2.0 * r / (2.0 * r + d as f64);
    RateTable::finish(axis, "mse", rows, theory, cfg.tolerance.unwrap_or(0.2))
}

/// Approximation error against the coarse resolution `N` at fixed `s` and
/// `N_star`; theory slope `-d/p`. The exponent describes targets whose
/// fine-scale amplitude does not depend on `N`, such as the rademacher
/// family.
fn coarse_resolution_sweep(grid: &[usize], n_star: usize, family: &TargetSpec, cfg: &SweepConfig) -> Result<RateTable> {
    check_grid(grid)?;
    check_config(cfg)?;
    if let Some(&bad) = grid.iter().find(|&&n| n_star < 4 * n) {
        return Err(Error::Precondition(format!("N_star = {n_star} is below 4N for N = {bad}")));
    }
    let axis = SweepAxis::N;
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let target = TargetSpec { n, ..family.clone() }.build()?;
            let samples = approx_errors(&target, n_star, cfg, [axis.tag(), i as u64])?;
            let (mean, se) = summarize(&samples);
            Ok(RateRow {
                value: n as f64,
                abscissa: n as f64,
                mean_error: mean,
                std_error: se,
                trials: cfg.trials,
                floor: gate_floor(n_star, family.d, family.r),
                gate: None,
                included: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RateTable::finish(axis, "l2_norm", rows, -(family.d as f64) / cfg.p, cfg.tolerance.unwrap_or(0.3))
}

fn default_trials() -> usize {
    1
}
fn default_p() -> f64 {
    2.0
}
fn default_n_mc() -> usize {
    20_000
}
fn default_noise() -> NoiseModel {
    NoiseModel::BoundedUniform { sigma_b: 1.0 }
}
fn default_cstar() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

/// File form of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials_per_point: usize,
    /// Target family; the swept field is overwritten per grid point.
    pub target: TargetSpec,
    /// Fixed fine resolution for sweeps along `s` and `N`.
    #[serde(rename = "N_star", default, skip_serializing_if = "Option::is_none")]
    pub n_star: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity_mode: Option<SparsityMode>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_noise")]
    pub noise: NoiseModel,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default = "default_cstar")]
    pub cstar_proxy: f64,
    #[serde(default = "default_true")]
    pub exclude_below_gate: bool,
    pub seed: u64,
}

impl SweepSpec {
    pub fn config(&self) -> SweepConfig {
        SweepConfig {
            trials: self.trials_per_point,
            seed: self.seed,
            n_mc: self.n_mc,
            tolerance: self.tolerance,
            p: self.p,
            noise: self.noise,
            cstar_proxy: self.cstar_proxy,
            exclude_below_gate: self.exclude_below_gate,
        }
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<RateTable> {
    let cfg = spec.config();
    let need_n_star = || {
        spec.n_star.ok_or_else(|| Error::Precondition(format!("a sweep along {} needs N_star", spec.axis.name())))
    };
    match spec.axis {
        SweepAxis::M => learning_rate_sweep(&spec.target.build()?, &spec.grid, &cfg),
        SweepAxis::NStar => approx_rate_sweep(&spec.target.build()?, &spec.grid, &cfg),
        SweepAxis::S => {
            let mode = spec.sparsity_mode.unwrap_or(SparsityMode::Approximation);
            let n_star = match mode {
                SparsityMode::Approximation => need_n_star()?,
                SparsityMode::Learning { .. } => spec.n_star.unwrap_or(4 * spec.target.n),
            };
            sparsity_factor_sweep(&spec.grid, spec.target.n, n_star, &spec.target, mode, &cfg)
        }
        SweepAxis::N => coarse_resolution_sweep(&spec.grid, need_n_star()?, &spec.target, &cfg),
    }
}
