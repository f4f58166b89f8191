use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "sparsenet", version, about = "Constructive ReLU networks for spatially sparse regression")]
pub struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = "SPARSENET_OUT_DIR")]
    pub out_dir: Option<PathBuf>,

    /// Worker threads; defaults to the available hardware parallelism.
    #[arg(long, global = true, env = "SPARSENET_THREADS")]
    pub threads: Option<usize>,

    /// Log filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build an explicit network and write it as a net file.
    Construct(ConstructArgs),
    /// Generate or verify target specifications.
    #[command(subcommand)]
    Target(TargetCommand),
    /// Sample data, fit the estimator and report its error.
    Learn(LearnArgs),
    /// Run a rate sweep and write its reports.
    Sweep(SweepArgs),
    /// Property suites for CI.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Evaluate a net file at given points.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[command(subcommand)]
    pub kind: ConstructKind,
    /// Output net file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ConstructKind {
    /// One-input trapezoid gate.
    Trapezoid {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Tensor bump equal to 1 on `[a,b]^d`.
    Bump {
        #[arg(long)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Bump localized on one fine cell.
    Localized {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "N-star")]
        n_star: usize,
        #[arg(long)]
        d: usize,
        /// Fine cell index (0-based, lexicographic).
        #[arg(long)]
        k: usize,
        #[arg(long)]
        tau: f64,
    },
    /// Approximate product of `ell` inputs.
    Product {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Polynomial gate for a polynomial given as JSON `{center, terms}`.
    Poly {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Sparse local Taylor assembly approximating a target.
    Approx {
        #[arg(long)]
        target_spec: PathBuf,
        #[arg(long = "N-star")]
        n_star: usize,
        /// Localization width; defaults to the largest admissible value.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Rademacher,
    Cellwise,
}

#[derive(Subcommand, Debug)]
pub enum TargetCommand {
    /// Write a target specification file.
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long = "N-star")]
        n_star: Option<usize>,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sampled Hölder check of a target against its class constant.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Constant to check against; defaults to the target's own.
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NoiseArg {
    Gauss,
    Bounded,
    None,
}

#[derive(Args, Debug)]
pub struct LearnArgs {
    #[arg(long)]
    pub target_spec: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_enum, default_value = "bounded")]
    pub noise: NoiseArg,
    /// Half-width of the bounded noise.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_b: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 20_000)]
    pub n_mc: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Approx,
    Sparsity,
    Learning,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    /// Sweep definition file (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Comma-separated report formats: csv, svg, json.
    #[arg(long, default_value = "csv,svg")]
    pub formats: String,
    /// File name stem of the reports.
    #[arg(long, default_value = "sweep")]
    pub stem: String,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Exactness of random bump nets on their plateau and outside support.
    Prop1 {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Measured product gate accuracy.
    Gates {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        ell: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Also write the reports as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sampled Hölder check with a doubled-amplitude negative control.
    Lipschitz {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Serialization round trips of random nets.
    Roundtrip {
        #[arg(long, default_value_t = 100)]
        nets: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// One point as comma-separated coordinates; repeatable.
    #[arg(long = "x", value_delimiter = ',', action = clap::ArgAction::Append, allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// CSV file with one point per line.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn eval_points_accept_negative_coordinates() {
        let cli = Cli::try_parse_from(["sparsenet", "eval", "--net", "n.json", "--x", "-0.5,1", "--x", "2,-3"]).unwrap();
        match cli.command {
            Command::Eval(a) => assert_eq!(a.x, vec![-0.5, 1.0, 2.0, -3.0]),
            other => panic!("parsed {other:?}"),
        }
    }
}
