//! Command-line front end. Every subcommand resolves its arguments into a
//! [`RunConfig`], runs it, and writes the resolved config next to its outputs
//! so that `replay` can reproduce them.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{
    execute, AlphaSpec, Backend, BenchConfig, EvaluateConfig, LogisticConfig, LowerboundConfig, MuSpec, RunConfig,
    SampleConfig, ScoreRequest, ScoresConfig, Strategy, BENCH_HEADER, CONFIG_FILE,
};

use crate::error::{Error, Result};
use crate::matrix::MatrixFormat;
use crate::sampling::{Loss, Scheme};
use crate::seed;

#[derive(Debug, Parser)]
#[command(
    name = "lpcoreset",
    version,
    about = "Sensitivity scores, coresets and distortion checks for ℓp-type losses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute per-row importance scores.
    Scores(ScoresArgs),
    /// Build a sampling plan and draw one weighted sample.
    Sample(SampleArgs),
    /// Estimate the distortion of a weighted sample.
    Evaluate(EvaluateArgs),
    /// Rank-loss experiment on the block instance.
    Lowerbound(LowerboundArgs),
    /// Logistic-regression coreset and its quality report.
    Logistic(LogisticArgs),
    /// Distortion sweep over schemes, alphas and seeds.
    Bench(BenchArgs),
    /// Re-run a saved config.json.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "csv")]
    format: MatrixFormat,
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum KindArg {
    L2,
    Lp,
    LpExact,
    LpUpper,
    Lewis,
}

#[derive(Debug, Args)]
struct ScoresArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// `lp` defers to --backend.
    #[arg(long, value_enum, default_value = "lp")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "oracle")]
    backend: Backend,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct AlphaArgs {
    #[arg(long, conflicts_with_all = ["epsilon", "expected_size"])]
    alpha: Option<f64>,
    /// Take alpha from the bundled calibration at this epsilon.
    #[arg(long, conflicts_with = "expected_size")]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Scale the plan to this expected size.
    #[arg(long)]
    expected_size: Option<f64>,
}

impl AlphaArgs {
    fn resolve(&self) -> Result<AlphaSpec> {
        match (self.alpha, self.epsilon, self.expected_size) {
            (Some(a), _, _) => Ok(AlphaSpec::Explicit(a)),
            (_, Some(epsilon), _) => Ok(AlphaSpec::Calibrated {
                epsilon,
                delta: self.delta,
            }),
            (_, _, Some(m)) => Ok(AlphaSpec::ExpectedSize(m)),
            _ => Err(Error::InvalidArgument(
                "one of --alpha, --epsilon or --expected-size is required".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value = "augmented")]
    scheme: Scheme,
    #[arg(long, value_enum, default_value = "oracle")]
    backend: Backend,
    #[command(flatten)]
    alpha: AlphaArgs,
    /// A number >= 1, or `auto` for the safety factor times the estimate.
    #[arg(long, default_value = "1")]
    mu: MuSpec,
    #[arg(long, default_value_t = 2.0)]
    mu_safety: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Sample CSV with header `index,weight`.
    #[arg(long)]
    sample: PathBuf,
    /// `abs:<p>`, `relu:<p>` or `logistic`.
    #[arg(long, default_value = "abs:1")]
    loss: Loss,
    #[arg(long, value_enum, default_value = "ascent")]
    strategy: Strategy,
    #[arg(long, default_value_t = 10_000)]
    dirs: usize,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[arg(long, default_value_t = 1_000_000)]
    resolution: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct LowerboundArgs {
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    copies: usize,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Pure-ℓp budgets `k`, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    budgets: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = crate::hardness::ORACLE_MAX_ROWS)]
    oracle_max_rows: usize,
    /// Relative singular-value cutoff for the rank checks.
    #[arg(long, default_value_t = crate::matrix::DEFAULT_RANK_TOL)]
    rank_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct LogisticArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Input is a CSV whose last column is a ±1 label.
    #[arg(long)]
    labeled: bool,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value = "auto")]
    mu: MuSpec,
    #[arg(long, default_value_t = 2.0)]
    mu_safety: f64,
    #[arg(long, default_value_t = 100)]
    probes: usize,
    #[arg(long, default_value_t = crate::hardness::ORACLE_MAX_ROWS)]
    oracle_max_rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value = "abs:1")]
    loss: Loss,
    #[arg(long, value_enum, default_value = "oracle")]
    backend: Backend,
    #[arg(long, value_delimiter = ',', default_value = "augmented")]
    schemes: Vec<Scheme>,
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<f64>,
    /// Explicit seeds; otherwise `--num-seeds` seeds derived from `--seed`.
    #[arg(long, value_delimiter = ',', conflicts_with = "num_seeds")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 10)]
    num_seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1")]
    mu: MuSpec,
    #[arg(long, default_value_t = 2.0)]
    mu_safety: f64,
    #[arg(long, default_value_t = 10_000)]
    dirs: usize,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    config: PathBuf,
    /// Defaults to the directory holding the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

fn into_config(command: Command) -> Result<(RunConfig, PathBuf)> {
    Ok(match command {
        Command::Scores(a) => {
            let kind = match (a.kind, a.backend) {
                (KindArg::L2, _) => ScoreRequest::L2,
                (KindArg::LpExact, _) | (KindArg::Lp, Backend::Oracle) => ScoreRequest::LpExact,
                (KindArg::LpUpper, _) | (KindArg::Lp, Backend::L2relax) => ScoreRequest::LpUpper,
                (KindArg::Lewis, _) | (KindArg::Lp, Backend::Lewis) => ScoreRequest::Lewis,
            };
            let c = ScoresConfig {
                input: absolute(&a.input.input)?,
                format: a.input.format,
                p: a.p,
                kind,
                tol: a.tol,
                max_iters: a.max_iters,
            };
            (RunConfig::Scores(c), a.out.out_dir)
        }
        Command::Sample(a) => {
            let c = SampleConfig {
                input: absolute(&a.input.input)?,
                format: a.input.format,
                p: a.p,
                scheme: a.scheme,
                backend: a.backend,
                alpha: a.alpha.resolve()?,
                mu: a.mu,
                mu_safety: a.mu_safety,
                seed: a.seed,
            };
            (RunConfig::Sample(c), a.out.out_dir)
        }
        Command::Evaluate(a) => {
            let c = EvaluateConfig {
                input: absolute(&a.input.input)?,
                format: a.input.format,
                sample: absolute(&a.sample)?,
                loss: a.loss,
                strategy: a.strategy,
                dirs: a.dirs,
                restarts: a.restarts,
                steps: a.steps,
                resolution: a.resolution,
                seed: a.seed,
            };
            (RunConfig::Evaluate(c), a.out.out_dir)
        }
        Command::Lowerbound(a) => {
            let c = LowerboundConfig {
                d: a.d,
                n: a.n,
                copies: a.copies,
                p: a.p,
                budgets: a.budgets,
                trials: a.trials,
                oracle_max_rows: a.oracle_max_rows,
                rank_tol: a.rank_tol,
                seed: a.seed,
            };
            (RunConfig::Lowerbound(c), a.out.out_dir)
        }
        Command::Logistic(a) => {
            let c = LogisticConfig {
                input: absolute(&a.input.input)?,
                format: a.input.format,
                labeled: a.labeled,
                epsilon: a.epsilon,
                delta: a.delta,
                alpha: a.alpha,
                mu: a.mu,
                mu_safety: a.mu_safety,
                probes: a.probes,
                oracle_max_rows: a.oracle_max_rows,
                seed: a.seed,
            };
            (RunConfig::Logistic(c), a.out.out_dir)
        }
        Command::Bench(a) => {
            let seeds = if a.seeds.is_empty() {
                (0..a.num_seeds as u64).map(|k| seed::derive_seed(a.seed, k)).collect()
            } else {
                a.seeds
            };
            let c = BenchConfig {
                input: absolute(&a.input.input)?,
                format: a.input.format,
                p: a.p,
                loss: a.loss,
                backend: a.backend,
                schemes: a.schemes,
                alphas: a.alphas,
                seeds,
                mu: a.mu,
                mu_safety: a.mu_safety,
                dirs: a.dirs,
                restarts: a.restarts,
                steps: a.steps,
            };
            (RunConfig::Bench(c), a.out.out_dir)
        }
        Command::Replay(a) => {
            let config = RunConfig::load(&a.config)?;
            let out = match a.out_dir {
                Some(dir) => dir,
                None => a.config.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            (config, out)
        }
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 for usage and input errors, 3 when μ is
/// unbounded, 4 when a numerical routine fails.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = into_config(cli.command).and_then(|(config, out_dir)| execute(&config, &out_dir));
    match outcome {
        Ok((_, lines)) => {
            for line in lines {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
