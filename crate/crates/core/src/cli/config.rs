use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibration::{fingerprint, Calibration};
use crate::distortion::{
    distortion_random, estimate_distortion, grid_certify, l2_distortion_exact, AscentOptions, DistortionReport,
};
use crate::error::{Error, Result};
use crate::hardness::{hard_instance_with_threshold, lowerbound_csv, lowerbound_experiment_with_tol, ScoreMethod};
use crate::logistic::{coreset_quality_report, logistic_coreset, random_probes, LogisticOptions, TrainOptions};
use crate::matrix::{load_labeled_csv, load_matrix, orthonormal_basis, DenseMatrix, MatrixFormat};
use crate::sampling::{
    alpha_for_expected_size, augmented_importance, lewis_plan, pure_lp_plan, uniform_plan, Loss, SamplingPlan, Scheme,
    WeightedSample,
};
use crate::scores::{
    l2_leverage, l2_relax_upper_bounds, lewis_weights, mu_estimate, LewisOptions, OracleOptions, ScoreVector,
    SensitivityOracle,
};
use crate::{matrix_format, seed};

/// Source of ℓp importance scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Oracle,
    L2relax,
    Lewis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreRequest {
    L2,
    LpExact,
    LpUpper,
    Lewis,
}

/// A fixed `mu`, or `safety` times the heuristic estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSpec {
    Fixed(f64),
    Auto,
}

impl FromStr for MuSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("mu must be a number >= 1 or \"auto\", got {s:?}")))?;
        if !(v >= 1.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be >= 1, got {v}")));
        }
        Ok(Self::Fixed(v))
    }
}

impl fmt::Display for MuSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(v) => write!(f, "{v}"),
            Self::Auto => f.write_str("auto"),
        }
    }
}

/// How the oversampling factor is chosen. Execution replaces the last two
/// variants by `Explicit` in the written config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSpec {
    Explicit(f64),
    Calibrated { epsilon: f64, delta: f64 },
    ExpectedSize(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Ascent,
    Grid,
    ExactL2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresConfig {
    pub input: PathBuf,
    pub format: MatrixFormat,
    pub p: f64,
    pub kind: ScoreRequest,
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub input: PathBuf,
    pub format: MatrixFormat,
    pub p: f64,
    pub scheme: Scheme,
    pub backend: Backend,
    pub alpha: AlphaSpec,
    pub mu: MuSpec,
    pub mu_safety: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateConfig {
    pub input: PathBuf,
    pub format: MatrixFormat,
    pub sample: PathBuf,
    pub loss: Loss,
    pub strategy: Strategy,
    pub dirs: usize,
    pub restarts: usize,
    pub steps: usize,
    pub resolution: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerboundConfig {
    pub d: usize,
    pub n: usize,
    pub copies: usize,
    pub p: f64,
    pub budgets: Vec<f64>,
    pub trials: usize,
    pub oracle_max_rows: usize,
    pub rank_tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub input: PathBuf,
    pub format: MatrixFormat,
    pub labeled: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: Option<f64>,
    pub mu: MuSpec,
    pub mu_safety: f64,
    pub probes: usize,
    pub oracle_max_rows: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub input: PathBuf,
    pub format: MatrixFormat,
    pub p: f64,
    pub loss: Loss,
    pub backend: Backend,
    pub schemes: Vec<Scheme>,
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub mu: MuSpec,
    pub mu_safety: f64,
    pub dirs: usize,
    pub restarts: usize,
    pub steps: usize,
}

/// A fully resolved command; `config.json` in every output directory holds one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Scores(ScoresConfig),
    Sample(SampleConfig),
    Evaluate(EvaluateConfig),
    Lowerbound(LowerboundConfig),
    Logistic(LogisticConfig),
    Bench(BenchConfig),
}

pub const CONFIG_FILE: &str = "config.json";

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Runs `config`, writing outputs and the resolved config into `out_dir`.
/// Returns the resolved config and human-readable summary lines.
pub fn execute(config: &RunConfig, out_dir: &Path) -> Result<(RunConfig, Vec<String>)> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let (resolved, lines) = match config {
        RunConfig::Scores(c) => exec_scores(c, out_dir).map(|l| (config.clone(), l))?,
        RunConfig::Sample(c) => {
            let (c, l) = exec_sample(c, out_dir)?;
            (RunConfig::Sample(c), l)
        }
        RunConfig::Evaluate(c) => exec_evaluate(c, out_dir).map(|l| (config.clone(), l))?,
        RunConfig::Lowerbound(c) => exec_lowerbound(c, out_dir).map(|l| (config.clone(), l))?,
        RunConfig::Logistic(c) => {
            let (c, l) = exec_logistic(c, out_dir)?;
            (RunConfig::Logistic(c), l)
        }
        RunConfig::Bench(c) => {
            let (c, l) = exec_bench(c, out_dir)?;
            (RunConfig::Bench(c), l)
        }
    };
    write(out_dir.join(CONFIG_FILE), resolved.to_json()?)?;
    Ok((resolved, lines))
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn load(input: &Path, format: MatrixFormat) -> Result<DenseMatrix> {
    load_matrix(input, format)
}

fn exec_scores(c: &ScoresConfig, out: &Path) -> Result<Vec<String>> {
    let a = load(&c.input, c.format)?;
    let s = match c.kind {
        ScoreRequest::L2 => l2_leverage(&a),
        ScoreRequest::LpExact => SensitivityOracle::new(
            &a,
            c.p,
            OracleOptions {
                tol: c.tol,
                max_iters: c.max_iters,
            },
        )?
        .all()?,
        ScoreRequest::LpUpper => l2_relax_upper_bounds(&a, c.p)?,
        ScoreRequest::Lewis => lewis_weights(
            &a,
            c.p,
            LewisOptions {
                iters: c.max_iters,
                tol: c.tol,
            },
        )?,
    };
    s.save(out.join("scores.csv"), out.join("scores.json"))?;
    Ok(vec![format!(
        "kind {} total {}",
        s.kind().as_str(),
        matrix_format(s.total())
    )])
}

fn lp_scores(a: &DenseMatrix, p: f64, backend: Backend) -> Result<ScoreVector> {
    match backend {
        Backend::Oracle => SensitivityOracle::new(a, p, OracleOptions::default())?.all(),
        Backend::L2relax => l2_relax_upper_bounds(a, p),
        Backend::Lewis => lewis_weights(a, p, LewisOptions::default()),
    }
}

fn resolve_mu(a: &DenseMatrix, p: f64, mu: MuSpec, safety: f64, seed: u64) -> Result<f64> {
    match mu {
        MuSpec::Fixed(v) => Ok(v),
        MuSpec::Auto => {
            if !(safety >= 1.0 && safety.is_finite()) {
                return Err(Error::InvalidArgument(format!("mu safety must be >= 1, got {safety}")));
            }
            let est = mu_estimate(a, p, 16, 60, seed::derive_seed(seed, 0))?;
            est.mu_hat.map(|m| (safety * m).max(1.0)).ok_or(Error::MuUnbounded)
        }
    }
}

/// Scores computed once per input, reused across the plans of a sweep.
struct PlanInputs {
    n: usize,
    d: usize,
    p: f64,
    mu: f64,
    lp: Option<ScoreVector>,
    l2: Option<ScoreVector>,
    lewis: Option<ScoreVector>,
}

impl PlanInputs {
    fn new(a: &DenseMatrix, p: f64, mu: f64, backend: Backend, schemes: &[Scheme]) -> Result<Self> {
        let needs_lp = schemes
            .iter()
            .any(|s| matches!(s, Scheme::Augmented | Scheme::PureLp | Scheme::Uniform));
        if needs_lp && backend == Backend::Lewis {
            return Err(Error::InvalidArgument(
                "the lewis backend only serves the lewis scheme; use oracle or l2relax".into(),
            ));
        }
        let needs_l2 = schemes.iter().any(|s| matches!(s, Scheme::Augmented | Scheme::Uniform));
        Ok(Self {
            n: a.nrows(),
            d: a.ncols(),
            p,
            mu,
            lp: if needs_lp {
                Some(lp_scores(a, p, backend)?)
            } else {
                None
            },
            l2: if needs_l2 { Some(l2_leverage(a)) } else { None },
            lewis: if schemes.contains(&Scheme::Lewis) {
                Some(lewis_weights(a, p, LewisOptions::default())?)
            } else {
                None
            },
        })
    }

    fn augmented_importance(&self) -> Result<Vec<f64>> {
        let (lp, l2) = (self.lp.as_ref().unwrap(), self.l2.as_ref().unwrap());
        augmented_importance(lp, l2, self.mu, 1.0 / self.n as f64)
    }

    /// Resolves the scale (alpha, or k for pure ℓp and Lewis, or the expected
    /// size for uniform) and builds the plan.
    fn plan(&self, scheme: Scheme, alpha: AlphaSpec) -> Result<(f64, SamplingPlan)> {
        let importance: Vec<f64> = match scheme {
            Scheme::Augmented => self.augmented_importance()?,
            Scheme::PureLp => self.lp.as_ref().unwrap().values().to_vec(),
            Scheme::Lewis => self.lewis.as_ref().unwrap().values().to_vec(),
            Scheme::Uniform => vec![1.0; self.n],
        };
        let scale = match alpha {
            AlphaSpec::Explicit(v) => v,
            AlphaSpec::Calibrated { epsilon, delta } => {
                Calibration::bundled()?.alpha(epsilon, delta, self.d, self.mu)?
            }
            AlphaSpec::ExpectedSize(m) => {
                if scheme == Scheme::Uniform {
                    m
                } else {
                    alpha_for_expected_size(&importance, m)?
                }
            }
        };
        let plan = match scheme {
            Scheme::Augmented => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidArgument(format!("alpha must be positive, got {scale}")));
                }
                SamplingPlan::from_importance(&importance, scale, self.mu, self.p, Scheme::Augmented)
            }
            Scheme::PureLp => pure_lp_plan(self.lp.as_ref().unwrap(), scale)?,
            Scheme::Lewis => lewis_plan(self.lewis.as_ref().unwrap(), scale)?,
            Scheme::Uniform => uniform_plan(self.n, scale)?,
        };
        Ok((scale, plan))
    }
}

fn exec_sample(c: &SampleConfig, out: &Path) -> Result<(SampleConfig, Vec<String>)> {
    let a = load(&c.input, c.format)?;
    if c.scheme == Scheme::Uniform && !matches!(c.alpha, AlphaSpec::ExpectedSize(_) | AlphaSpec::Explicit(_)) {
        return Err(Error::InvalidArgument(
            "the uniform scheme needs --expected-size".into(),
        ));
    }
    let mu = resolve_mu(&a, c.p, c.mu, c.mu_safety, c.seed)?;
    let inputs = PlanInputs::new(&a, c.p, mu, c.backend, &[c.scheme])?;
    let (scale, plan) = inputs.plan(c.scheme, c.alpha)?;
    plan.save(out.join("plan.json"), out.join("probs.csv"))?;
    let sample = plan.draw(c.seed);
    sample.save(out.join("sample.csv"))?;
    let resolved = SampleConfig {
        alpha: if c.scheme == Scheme::Uniform {
            AlphaSpec::ExpectedSize(scale)
        } else {
            AlphaSpec::Explicit(scale)
        },
        mu: MuSpec::Fixed(mu),
        ..c.clone()
    };
    Ok((
        resolved,
        vec![
            format!("expected_size {}", matrix_format(plan.expected_size())),
            format!("realized_size {}", sample.len()),
        ],
    ))
}

fn evaluate(a: &DenseMatrix, sample: &WeightedSample, c: &EvalParams) -> Result<DistortionReport> {
    match c.strategy {
        Strategy::Random => distortion_random(a, sample, c.loss, c.dirs, c.seed),
        Strategy::Ascent => estimate_distortion(
            a,
            sample,
            c.loss,
            c.dirs,
            AscentOptions {
                restarts: c.restarts,
                steps: c.steps,
                ..AscentOptions::default()
            },
            c.seed,
        ),
        Strategy::Grid => grid_certify(a, sample, c.loss, c.resolution),
        Strategy::ExactL2 => {
            if c.loss != Loss::AbsP(2.0) {
                return Err(Error::InvalidArgument("exact_l2 needs the loss abs:2".into()));
            }
            l2_distortion_exact(&orthonormal_basis(a), sample)
        }
    }
}

struct EvalParams {
    loss: Loss,
    strategy: Strategy,
    dirs: usize,
    restarts: usize,
    steps: usize,
    resolution: usize,
    seed: u64,
}

fn exec_evaluate(c: &EvaluateConfig, out: &Path) -> Result<Vec<String>> {
    let a = load(&c.input, c.format)?;
    let sample = WeightedSample::load(&c.sample, a.nrows())?;
    let rep = evaluate(
        &a,
        &sample,
        &EvalParams {
            loss: c.loss,
            strategy: c.strategy,
            dirs: c.dirs,
            restarts: c.restarts,
            steps: c.steps,
            resolution: c.resolution,
            seed: c.seed,
        },
    )?;
    write(out.join("report.json"), rep.to_json()? + "\n")?;
    Ok(vec![format!("max_ratio {}", matrix_format(rep.max_ratio))])
}

#[derive(Serialize)]
struct InstanceSummary {
    d: usize,
    n: usize,
    copies: usize,
    p: f64,
    measured_totals: (f64, f64),
    method: ScoreMethod,
    fingerprint: String,
}

fn exec_lowerbound(c: &LowerboundConfig, out: &Path) -> Result<Vec<String>> {
    if c.budgets.is_empty() {
        return Err(Error::InvalidArgument("at least one budget is required".into()));
    }
    let inst = hard_instance_with_threshold(c.d, c.n, c.copies, c.p, c.seed, c.oracle_max_rows)?;
    let rows = lowerbound_experiment_with_tol(&inst, &c.budgets, c.trials, seed::derive_seed(c.seed, 1), c.rank_tol)?;
    write(out.join("lowerbound.csv"), lowerbound_csv(&rows))?;
    let summary = InstanceSummary {
        d: c.d,
        n: c.n,
        copies: c.copies,
        p: c.p,
        measured_totals: inst.measured_totals,
        method: inst.method,
        fingerprint: fingerprint(&inst.matrix),
    };
    write(
        out.join("instance.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(rows
        .iter()
        .map(|r| {
            format!(
                "{} k={} expected={:.2} success={:.3}",
                r.scheme, r.k, r.expected_size, r.success_fraction
            )
        })
        .collect())
}

fn exec_logistic(c: &LogisticConfig, out: &Path) -> Result<(LogisticConfig, Vec<String>)> {
    let a = if c.labeled {
        load_labeled_csv(&c.input)?
    } else {
        load(&c.input, c.format)?
    };
    let opts = LogisticOptions {
        epsilon: c.epsilon,
        delta: c.delta,
        mu_override: match c.mu {
            MuSpec::Fixed(v) => Some(v),
            MuSpec::Auto => None,
        },
        mu_safety: c.mu_safety,
        alpha: c.alpha,
        oracle_max_rows: c.oracle_max_rows,
        seed: c.seed,
        ..LogisticOptions::default()
    };
    let core = logistic_coreset(&a, &opts)?;
    core.sample.save(out.join("coreset.csv"))?;
    write(
        out.join("coreset.json"),
        serde_json::to_string_pretty(&core.metadata())? + "\n",
    )?;
    let probes = random_probes(a.ncols(), c.probes.max(1), seed::derive_seed(c.seed, 2));
    let rep = coreset_quality_report(&a, &core.sample, &probes, TrainOptions::default())?;
    write(out.join("quality.json"), serde_json::to_string_pretty(&rep)? + "\n")?;
    let resolved = LogisticConfig {
        alpha: Some(core.alpha),
        mu: MuSpec::Fixed(core.mu_used),
        ..c.clone()
    };
    Ok((
        resolved,
        vec![
            format!("mu_used {}", matrix_format(core.mu_used)),
            format!("alpha {}", matrix_format(core.alpha)),
            format!("coreset_size {}", core.sample.len()),
            format!("max_probe_error {}", matrix_format(rep.max_probe_error)),
            format!("optimum_loss_ratio {}", matrix_format(rep.optimum_loss_ratio)),
        ],
    ))
}

pub const BENCH_HEADER: &str = "scheme,alpha,seed,expected_size,realized_size,max_ratio";

/// One row per (scheme, alpha, seed). Cell samples are drawn with `seed` and
/// evaluated with the ascent strategy under the same seed, as `sample` followed
/// by `evaluate` would. For the uniform scheme the expected size is matched to
/// the augmented plan at the same alpha.
fn exec_bench(c: &BenchConfig, out: &Path) -> Result<(BenchConfig, Vec<String>)> {
    if c.schemes.is_empty() || c.alphas.is_empty() || c.seeds.is_empty() {
        return Err(Error::InvalidArgument("bench needs schemes, alphas and seeds".into()));
    }
    let a = load(&c.input, c.format)?;
    let mu = resolve_mu(&a, c.p, c.mu, c.mu_safety, c.seeds[0])?;
    let inputs = PlanInputs::new(&a, c.p, mu, c.backend, &c.schemes)?;
    let mut csv = format!("{BENCH_HEADER}\n");
    for &scheme in &c.schemes {
        for &alpha in &c.alphas {
            let (_, plan) = if scheme == Scheme::Uniform {
                let (_, aug) = inputs.plan(Scheme::Augmented, AlphaSpec::Explicit(alpha))?;
                inputs.plan(Scheme::Uniform, AlphaSpec::ExpectedSize(aug.expected_size()))?
            } else {
                inputs.plan(scheme, AlphaSpec::Explicit(alpha))?
            };
            for &s in &c.seeds {
                let sample = plan.draw(s);
                let rep = evaluate(
                    &a,
                    &sample,
                    &EvalParams {
                        loss: c.loss,
                        strategy: Strategy::Ascent,
                        dirs: c.dirs,
                        restarts: c.restarts,
                        steps: c.steps,
                        resolution: 0,
                        seed: s,
                    },
                )?;
                csv.push_str(&format!(
                    "{scheme},{},{s},{},{},{}\n",
                    matrix_format(alpha),
                    matrix_format(plan.expected_size()),
                    sample.len(),
                    matrix_format(rep.max_ratio)
                ));
            }
        }
    }
    write(out.join("bench.csv"), &csv)?;
    let rows = c.schemes.len() * c.alphas.len() * c.seeds.len();
    Ok((
        BenchConfig {
            mu: MuSpec::Fixed(mu),
            ..c.clone()
        },
        vec![format!("rows {rows}")],
    ))
}
