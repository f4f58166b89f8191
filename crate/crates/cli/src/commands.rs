//! Subcommand bodies. Each one validates its paths first, computes, writes
//! its files and finally the run manifest.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::{info, warn};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use sparsenet::constructors::{
    bump_net, gate_error_report, localized_net, poly_net, product_gate, sparse_approx_net, trapezoid_net,
    AssemblyParams, GateReport, PartitionIndex, TrapezoidSpec,
};
use sparsenet::experiments::{emit_report, run_sweep, ReportFormat, SweepAxis, SweepSpec};
use sparsenet::learner::{erm_fit, l2_error, sample_dataset, truncate, Hyperparams, NoiseModel};
use sparsenet::net::{combine, load, save, CombineMode};
use sparsenet::poly::Polynomial;
use sparsenet::rng::derive_seed;
use sparsenet::targets::{verify_lipschitz, TargetKind, TargetSpec};
use sparsenet::ReluNet;

use crate::args::{
    Cli, Command, ConstructArgs, ConstructKind, EvalArgs, KindArg, LearnArgs, NoiseArg, SweepArgs, SweepKind,
    TargetCommand, VerifyCommand,
};
use crate::checks;
use crate::manifest::RunRecord;

/// Invalid invocation detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub enum Failure {
    /// A property suite ran and found violations.
    Violations(String),
    Other(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Other(e.into())
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

struct Ctx {
    out_dir: Option<PathBuf>,
    record: RunRecord,
}

impl Ctx {
    fn input(&mut self, p: &Path) -> Result<PathBuf> {
        if !p.is_file() {
            return Err(usage(format!("input file {} does not exist", p.display())));
        }
        self.record.input(p);
        Ok(p.to_path_buf())
    }

    fn output(&mut self, p: &Path) -> Result<PathBuf> {
        let p = match &self.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        };
        if let Some(parent) = p.parent().filter(|q| !q.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        Ok(p)
    }

    fn wrote(&mut self, p: &Path) {
        info!("wrote {}", p.display());
        self.record.output(p);
    }

    fn write(&mut self, p: &Path, contents: &str) -> Result<()> {
        std::fs::write(p, contents).with_context(|| format!("writing {}", p.display()))?;
        self.wrote(p);
        Ok(())
    }

    fn finish(self) -> Result<()> {
        if let Some(m) = self.record.finish()? {
            info!("manifest {}", m.display());
        }
        Ok(())
    }
}

fn read_json<T: DeserializeOwned>(p: &Path) -> Result<T> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn run(cli: Cli, argv: Vec<String>) -> std::result::Result<(), Failure> {
    let mut ctx = Ctx { out_dir: cli.out_dir, record: RunRecord::new(argv) };
    match cli.command {
        Command::Construct(a) => construct(&mut ctx, a)?,
        Command::Target(t) => target(&mut ctx, t)?,
        Command::Learn(a) => learn(&mut ctx, a)?,
        Command::Sweep(a) => sweep(&mut ctx, a)?,
        Command::Verify(v) => verify(&mut ctx, v)?,
        Command::Eval(a) => eval(&mut ctx, a)?,
    }
    ctx.finish()?;
    Ok(())
}

fn construct(ctx: &mut Ctx, a: ConstructArgs) -> Result<()> {
    let out = a.out.as_deref().map(|p| ctx.output(p)).transpose()?;
    let mut extra = serde_json::Map::new();
    let net = match a.kind {
        ConstructKind::Trapezoid { a, b, tau } => trapezoid_net(&TrapezoidSpec::new(a, b, tau)?)?,
        ConstructKind::Bump { d, a, b, tau } => bump_net(a, b, tau, d)?,
        ConstructKind::Localized { n, n_star, d, k, tau } => localized_net(&PartitionIndex::new(n, n_star, d)?, k, tau)?,
        ConstructKind::Product { ell, eps } => product_gate(ell, eps)?,
        ConstructKind::Poly { poly, eps } => {
            let raw: Polynomial = read_json(&ctx.input(&poly)?)?;
            let p = Polynomial::new(raw.center().to_vec(), raw.terms().to_vec())?;
            poly_net(&p, eps)?
        }
        ConstructKind::Approx { target_spec, n_star, tau, p } => {
            let spec: TargetSpec = read_json(&ctx.input(&target_spec)?)?;
            let f = spec.build()?;
            ctx.record.seed = Some(spec.seed);
            let partition = PartitionIndex::new(spec.n, n_star, spec.d)?;
            let params = AssemblyParams { p, tau, ..AssemblyParams::new(spec.r, spec.s) };
            let asm = sparse_approx_net(&f, &partition, &params)?;
            extra.insert("b_hat".into(), json!(asm.b_hat));
            extra.insert("tau".into(), json!(asm.tau));
            extra.insert("eps_poly".into(), json!(asm.eps_poly));
            extra.insert("eps_pair".into(), json!(asm.eps_pair));
            extra.insert("active_cells".into(), json!(asm.active_cells));
            extra.insert("weight_exponent".into(), json!(asm.weight_exponent));
            asm.net
        }
    };
    let summary = json!({ "stats": net.inspect(), "metadata": net.metadata(), "construction": extra });
    match out {
        Some(path) => {
            save(&net, &path).with_context(|| format!("writing {}", path.display()))?;
            ctx.wrote(&path);
            print!("{}", pretty(&summary)?);
        }
        None => println!("{}", sparsenet::net::serialize(&net)),
    }
    Ok(())
}

fn target(ctx: &mut Ctx, t: TargetCommand) -> std::result::Result<(), Failure> {
    match t {
        TargetCommand::Gen { kind, n, d, s, n_star, r, c0, seed, out } => {
            let out = ctx.output(&out)?;
            let kind = match kind {
                KindArg::Rademacher => TargetKind::RademacherBump,
                KindArg::Cellwise => TargetKind::CellwisePolynomialBump,
            };
            let spec = TargetSpec { kind, n, d, s, n_star, r, c0, seed };
            let f = spec.build()?;
            ctx.record.seed = Some(seed);
            ctx.write(&out, &pretty(&spec)?)?;
            print!("{}", pretty(&json!({ "c0": f.c0(), "sup_bound": f.sup_bound() }))?);
        }
        TargetCommand::Verify { spec, pairs, tol, c0, seed, report } => {
            let spec: TargetSpec = read_json(&ctx.input(&spec)?)?;
            let report = report.as_deref().map(|p| ctx.output(p)).transpose()?;
            let f = spec.build()?;
            ctx.record.seed = Some(seed);
            let rep = verify_lipschitz(&f, f.r(), c0.unwrap_or(f.c0()), pairs, seed, tol)?;
            let text = pretty(&rep)?;
            if let Some(p) = report {
                ctx.write(&p, &text)?;
            }
            print!("{text}");
            if !rep.passed() {
                return Err(Failure::Violations(format!("{} Hölder violations", rep.violations)));
            }
        }
    }
    Ok(())
}

/// `clamp(t, -m, m) = relu(t + m) - relu(t - m) - m`, appended to `net`.
fn truncated_net(net: &ReluNet, m: f64) -> Result<ReluNet> {
    let ramp = ReluNet::from_dense(1, &[(vec![1.0, 1.0], vec![m, -m])], vec![1.0, -1.0])?;
    let clamp = combine(&[ramp], &CombineMode::AffinePost { scale: 1.0, shift: -m })?;
    Ok(combine(&[net.clone(), clamp], &CombineMode::SerialCompose)?)
}

fn learn(ctx: &mut Ctx, a: LearnArgs) -> Result<()> {
    let spec: TargetSpec = read_json(&ctx.input(&a.target_spec)?)?;
    let out = ctx.output(&a.out)?;
    let report = ctx.output(&a.report)?;
    let f = spec.build()?;
    ctx.record.seed = Some(a.seed);
    let noise = match a.noise {
        NoiseArg::Gauss => NoiseModel::GaussianUnit,
        NoiseArg::Bounded => NoiseModel::BoundedUniform { sigma_b: a.sigma_b },
        NoiseArg::None => NoiseModel::None,
    };
    let data = sample_dataset(&f, a.m, noise, derive_seed(a.seed, &[0]))?;
    let (hp, res) = Hyperparams::for_sample(a.m, spec.n, spec.s, spec.d, spec.r, a.p)?;
    if res.floored {
        warn!("resolution floored at 4N = {}", res.n_star);
    }
    let fit = erm_fit(&data, &hp)?;
    let bound = data.label_bound.max(f64::MIN_POSITIVE);
    let est = truncate(&fit.net, bound)?;
    let err = l2_error(&est, &f, a.n_mc, derive_seed(a.seed, &[1]))?;
    let (l2_norm, l2_norm_se) = err.norm();
    let net = truncated_net(&fit.net, bound)?;
    save(&net, &out).with_context(|| format!("writing {}", out.display()))?;
    ctx.wrote(&out);
    let summary = json!({
        "m": a.m,
        "seed": a.seed,
        "noise": noise,
        "N_star": fit.n_star,
        "data_driven_N_star": res.data_driven,
        "floored": res.floored,
        "tau": fit.tau,
        "R": hp.weight_bound,
        "M": data.label_bound,
        "clipped": fit.clipped,
        "fitted_cells": fit.fitted_cells,
        "ridge_cells": fit.ridge_cells,
        "empirical_risk": fit.empirical_risk,
        "l2_error_sq": err.estimate,
        "l2_error_sq_std_error": err.std_error,
        "l2_error": l2_norm,
        "l2_error_std_error": l2_norm_se,
        "n_mc": err.n_mc,
    });
    let text = pretty(&summary)?;
    ctx.write(&report, &text)?;
    print!("{text}");
    Ok(())
}

fn sweep(ctx: &mut Ctx, a: SweepArgs) -> Result<()> {
    let spec: SweepSpec = read_json(&ctx.input(&a.spec)?)?;
    let formats = a
        .formats
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<ReportFormat>())
        .collect::<sparsenet::Result<Vec<_>>>()?;
    let allowed: &[SweepAxis] = match a.kind {
        SweepKind::Approx => &[SweepAxis::NStar, SweepAxis::N],
        SweepKind::Sparsity => &[SweepAxis::S],
        SweepKind::Learning => &[SweepAxis::M],
    };
    if !allowed.contains(&spec.axis) {
        return Err(usage(format!("a {:?} sweep cannot run along {}", a.kind, spec.axis.name())));
    }
    let probe = ctx.output(Path::new(&format!("{}.csv", a.stem)))?;
    let dir = probe.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    ctx.record.seed = Some(spec.seed);
    let table = run_sweep(&spec)?;
    for p in emit_report(&table, &dir, &a.stem, &formats)? {
        ctx.wrote(&p);
    }
    if !table.informative {
        warn!("every included row is at the numerical floor");
    }
    let summary = json!({
        "axis": table.axis,
        "fitted_slope": table.fitted_slope,
        "slope_ci": table.slope_ci,
        "theory_slope": table.theory_slope,
        "tolerance": table.tolerance,
        "pass": table.pass,
        "informative": table.informative,
        "excluded": table.excluded,
    });
    print!("{}", pretty(&summary)?);
    Ok(())
}

fn verify(ctx: &mut Ctx, v: VerifyCommand) -> std::result::Result<(), Failure> {
    let (summary, failed) = match v {
        VerifyCommand::Prop1 { d, trials, points, seed } => {
            ctx.record.seed = Some(seed);
            let s = checks::bump_exactness(d, trials, points, seed)?;
            let failed = (s.violations > 0).then(|| format!("{} grid points off the exact bump", s.violations));
            (serde_json::to_value(s)?, failed)
        }
        VerifyCommand::Gates { ell, eps, samples, seed, csv } => {
            let csv = csv.as_deref().map(|p| ctx.output(p)).transpose()?;
            ctx.record.seed = Some(seed);
            let mut reports: Vec<GateReport> = Vec::new();
            for &l in &ell {
                for &e in &eps {
                    reports.push(gate_error_report(l, e, samples, seed)?);
                }
            }
            if let Some(p) = csv {
                ctx.write(&p, &GateReport::csv(&reports))?;
            }
            let bad = reports.iter().filter(|r| !r.passed()).count();
            (serde_json::to_value(&reports)?, (bad > 0).then(|| format!("{bad} gates above their declared accuracy")))
        }
        VerifyCommand::Lipschitz { spec, pairs, tol, seed } => {
            let spec: TargetSpec = read_json(&ctx.input(&spec)?)?;
            let f = spec.build()?;
            ctx.record.seed = Some(seed);
            let rep = verify_lipschitz(&f, f.r(), f.c0(), pairs, seed, tol)?;
            let control = verify_lipschitz(&f.scaled(2.0), f.r(), f.c0(), pairs, seed, tol)?;
            let failed = if rep.violations > 0 {
                Some(format!("{} Hölder violations", rep.violations))
            } else if control.violations == 0 {
                Some("doubled-amplitude control reported no violations".into())
            } else {
                None
            };
            (json!({ "report": rep, "doubled_control": control }), failed)
        }
        VerifyCommand::Roundtrip { nets, seed } => {
            ctx.record.seed = Some(seed);
            let s = checks::roundtrips(nets, seed)?;
            let failed = (s.failures > 0).then(|| format!("{} nets changed in a round trip", s.failures));
            (serde_json::to_value(s)?, failed)
        }
    };
    print!("{}", pretty(&summary)?);
    match failed {
        Some(msg) => Err(Failure::Violations(msg)),
        None => Ok(()),
    }
}

fn eval(ctx: &mut Ctx, a: EvalArgs) -> Result<()> {
    let net = load(&ctx.input(&a.net)?)?;
    let d = net.input_dim();
    let mut points: Vec<Vec<f64>> = Vec::new();
    if !a.x.is_empty() {
        if a.x.len() % d != 0 {
            return Err(usage(format!("--x gave {} coordinates, not a multiple of the input dimension {d}", a.x.len())));
        }
        points.extend(a.x.chunks(d).map(<[f64]>::to_vec));
    }
    if let Some(p) = &a.points {
        let text = std::fs::read_to_string(ctx.input(p)?).with_context(|| format!("reading {}", p.display()))?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let x = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| usage(format!("{}:{}: {e}", p.display(), i + 1)))?;
            points.push(x);
        }
    }
    if points.is_empty() {
        return Err(usage("no points given; use --x or --points"));
    }
    for x in &points {
        println!("{}", net.eval(x)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_net_clamps_exactly() {
        let line = ReluNet::from_dense(1, &[(vec![10.0, -10.0], vec![0.0, 0.0])], vec![1.0, -1.0]).unwrap();
        let t = truncated_net(&line, 2.5).unwrap();
        for (x, want) in [(-1.0, -2.5), (-0.1, -1.0), (0.0, 0.0), (0.2, 2.0), (0.3, 2.5), (4.0, 2.5)] {
            assert!((t.eval(&[x]).unwrap() - want).abs() < 1e-12, "x = {x}");
        }
    }
}
