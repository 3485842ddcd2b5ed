//! Logistic-regression coresets.
//!
//! Rows are taken in the unlabeled form: the loss is `sum_i ln(1 + e^{a_i x})`
//! (labeled data is folded in by `a_i <- -y_i a_i` on ingestion). Rows are
//! sampled with `p_i = min{1, alpha (mu l_i^(1) + l_i^(2) + mu d / n)}`.

use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::sampling::{augmented_plan_with_floor, loss_eval, sigmoid, Loss, SamplingPlan, WeightedSample};
use crate::scores::{
    exact_lp_sensitivities, l2_leverage, l2_relax_upper_bounds, mu_estimate, MuEstimate, ScoreKind, ScoreVector,
};
use crate::seed;

/// `sum_i w_i ln(1 + e^{a_i x})` evaluated as
/// `sum_i w_i (ln(1 + e^{-|a_i x|}) + max{0, a_i x})`.
pub fn logistic_loss_split(a: &DenseMatrix, x: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    loss_eval(a, x, Loss::Logistic, weights)
}

/// Gradient `sum_i w_i sigmoid(a_i x) a_i`.
pub fn logistic_gradient(a: &DenseMatrix, x: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    a.check_dim(x)?;
    let mut g = vec![0.0; a.ncols()];
    for (i, r) in a.rows_iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let s = w * sigmoid(dot(r, x));
        g.iter_mut().zip(r).for_each(|(gk, rk)| *gk += s * rk);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticOptions {
    pub epsilon: f64,
    pub delta: f64,
    /// Used as-is when set; otherwise `mu_safety` times the estimate.
    pub mu_override: Option<f64>,
    pub mu_safety: f64,
    /// Used as-is when set; otherwise taken from the calibration.
    pub alpha: Option<f64>,
    /// Above this many rows the `(l^2)^{1/2}` bound replaces the exact ℓ1 scores.
    pub oracle_max_rows: usize,
    pub mu_restarts: usize,
    pub mu_steps: usize,
    pub seed: u64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            delta: 0.1,
            mu_override: None,
            mu_safety: 2.0,
            alpha: None,
            oracle_max_rows: 20_000,
            mu_restarts: 16,
            mu_steps: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogisticCoreset {
    pub sample: WeightedSample,
    pub plan: SamplingPlan,
    pub mu_used: f64,
    pub mu_estimate: Option<MuEstimate>,
    pub alpha: f64,
    pub epsilon_target: f64,
    pub delta: f64,
    pub l1_kind: ScoreKind,
    pub l2_kind: ScoreKind,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetMetadata {
    pub mu_used: f64,
    pub alpha: f64,
    pub epsilon_target: f64,
    pub seed: u64,
    pub delta: f64,
    pub l1_kind: ScoreKind,
    pub l2_kind: ScoreKind,
    pub expected_size: f64,
    pub realized_size: usize,
}

impl LogisticCoreset {
    pub fn metadata(&self) -> CoresetMetadata {
        CoresetMetadata {
            mu_used: self.mu_used,
            alpha: self.alpha,
            epsilon_target: self.epsilon_target,
            seed: self.seed,
            delta: self.delta,
            l1_kind: self.l1_kind,
            l2_kind: self.l2_kind,
            expected_size: self.plan.expected_size(),
            realized_size: self.sample.len(),
        }
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 0.3) {
        return Err(Error::InvalidArgument(format!("{name} must lie in (0, 0.3), got {v}")));
    }
    Ok(())
}

/// Resolves `mu`: the override, or `max{1, safety * estimate}`.
/// Fails with [`Error::MuUnbounded`] when the estimate flags one-sided data.
pub fn resolve_mu(a: &DenseMatrix, opts: &LogisticOptions) -> Result<(f64, Option<MuEstimate>)> {
    if let Some(mu) = opts.mu_override {
        if !(mu >= 1.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu override must be >= 1, got {mu}")));
        }
        return Ok((mu, None));
    }
    if !(opts.mu_safety >= 1.0 && opts.mu_safety.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mu safety must be >= 1, got {}",
            opts.mu_safety
        )));
    }
    let est = mu_estimate(
        a,
        1.0,
        opts.mu_restarts.max(1),
        opts.mu_steps,
        seed::derive_seed(opts.seed, 0),
    )?;
    match est.mu_hat {
        None => Err(Error::MuUnbounded),
        Some(m) => Ok(((opts.mu_safety * m).max(1.0), Some(est))),
    }
}

/// Draws one coreset. Seeds: `derive_seed(seed, 0)` for the μ search,
/// `derive_seed(seed, 1)` for the draw.
pub fn logistic_coreset(a: &DenseMatrix, opts: &LogisticOptions) -> Result<LogisticCoreset> {
    check_unit_interval("epsilon", opts.epsilon)?;
    check_unit_interval("delta", opts.delta)?;
    if a.as_slice().iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidArgument("logistic coreset needs a nonzero matrix".into()));
    }
    let l1 = if a.nrows() <= opts.oracle_max_rows {
        exact_lp_sensitivities(a, 1.0, 1e-9)?
    } else {
        l2_relax_upper_bounds(a, 1.0)?
    };
    logistic_coreset_with_scores(a, &l1, opts)
}

/// [`logistic_coreset`] with precomputed ℓ1 scores of `a`.
pub fn logistic_coreset_with_scores(
    a: &DenseMatrix,
    l1: &ScoreVector,
    opts: &LogisticOptions,
) -> Result<LogisticCoreset> {
    check_unit_interval("epsilon", opts.epsilon)?;
    check_unit_interval("delta", opts.delta)?;
    if l1.len() != a.nrows() || l1.p() != Some(1.0) {
        return Err(Error::DimensionMismatch(format!(
            "need {} ℓ1 scores, got {} with p = {:?}",
            a.nrows(),
            l1.len(),
            l1.p()
        )));
    }
    let (mu, est) = resolve_mu(a, opts)?;
    let (n, d) = (a.nrows(), a.ncols());
    let alpha = match opts.alpha {
        Some(al) => al,
        None => Calibration::bundled()?.alpha(opts.epsilon, opts.delta, d, mu)?,
    };
    let l2 = l2_leverage(a);
    let plan = augmented_plan_with_floor(l1, &l2, mu, alpha, mu * d as f64 / n as f64)?;
    let draw_seed = seed::derive_seed(opts.seed, 1);
    let sample = plan.draw(draw_seed);
    Ok(LogisticCoreset {
        sample,
        plan,
        mu_used: mu,
        mu_estimate: est,
        alpha,
        epsilon_target: opts.epsilon,
        delta: opts.delta,
        l1_kind: l1.kind(),
        l2_kind: l2.kind(),
        seed: opts.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub x: Vec<f64>,
    pub loss: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
    /// Loss after every accepted step, starting with the loss at `x0`.
    /// Nonincreasing up to a few ulps once steps fall below rounding.
    pub losses: Vec<f64>,
}

/// Gradient descent with Armijo backtracking on `sum_i w_i ln(1 + e^{a_i x})`.
/// Stops when the gradient norm is at most `tol` or after `max_iters` steps.
pub fn train_weighted_logistic(
    rows: &DenseMatrix,
    weights: &[f64],
    x0: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<TrainResult> {
    rows.check_dim(x0)?;
    if weights.len() != rows.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} rows",
            weights.len(),
            rows.nrows()
        )));
    }
    if weights.iter().chain(x0).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite weight or start".into()));
    }
    let f = |x: &[f64]| logistic_loss_split(rows, x, Some(weights));
    let mut x = x0.to_vec();
    let mut loss = f(&x)?;
    let mut losses = vec![loss];
    // 1/L for the gradient's Lipschitz constant bound (sum_i w_i ||a_i||^2) / 4.
    let lip: f64 = rows.rows_iter().zip(weights).map(|(r, w)| w * dot(r, r)).sum::<f64>() / 4.0;
    let mut step = if lip > 0.0 { 1.0 / lip } else { 1.0 };
    let mut g = logistic_gradient(rows, &x, Some(weights))?;
    let mut gn = dot(&g, &g).sqrt();
    let mut iters = 0;
    while gn > tol && iters < max_iters {
        iters += 1;
        step *= 2.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xv, gv)| xv - step * gv).collect();
            let cl = f(&cand)?;
            if !cl.is_finite() {
                return Err(Error::Diverged { iter: iters, last: x });
            }
            let decrease = 0.5 * step * gn * gn;
            if decrease > 4.0 * f64::EPSILON * loss.abs() {
                if cl <= loss - decrease {
                    accepted = Some((cand, cl, None));
                    break;
                }
            } else if cl <= loss + 4.0 * f64::EPSILON * loss.abs() {
                // The decrease is below rounding: ask for a smaller gradient instead.
                let cg = logistic_gradient(rows, &cand, Some(weights))?;
                let cn = dot(&cg, &cg).sqrt();
                if cn < gn {
                    accepted = Some((cand, cl, Some((cg, cn))));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, cl, grad)) = accepted else {
            break;
        };
        x = cand;
        loss = cl;
        losses.push(loss);
        (g, gn) = match grad {
            Some(pair) => pair,
            None => {
                let g = logistic_gradient(rows, &x, Some(weights))?;
                let gn = dot(&g, &g).sqrt();
                (g, gn)
            }
        };
        if !gn.is_finite() {
            return Err(Error::Diverged { iter: iters, last: x });
        }
    }
    Ok(TrainResult {
        converged: gn <= tol,
        x,
        loss,
        grad_norm: gn,
        iters,
        losses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub probe_errors: Vec<f64>,
    pub max_probe_error: f64,
    pub full_optimum: Vec<f64>,
    pub full_optimum_loss: f64,
    pub coreset_optimum: Vec<f64>,
    /// Relative coreset error at the full-data optimum.
    pub error_at_full_optimum: f64,
    /// Relative coreset error at the coreset optimum.
    pub error_at_coreset_optimum: f64,
    /// Full-data loss at the coreset optimum divided by the full-data optimum loss.
    pub optimum_loss_ratio: f64,
    /// Smallest full loss over the probes and both optima.
    pub min_full_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub max_iters: usize,
    /// Gradient tolerance relative to the number of rows.
    pub rel_tol: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            rel_tol: 1e-8,
        }
    }
}

/// Gaussian probe points, `count` of dimension `d`.
pub fn random_probes(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = seed::rng(seed);
    (0..count)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

fn rel_err(sampled: f64, full: f64) -> f64 {
    (sampled - full).abs() / full
}

/// Relative errors of the coreset loss at each probe and at both optima.
pub fn coreset_quality_report(
    a: &DenseMatrix,
    sample: &WeightedSample,
    probes: &[Vec<f64>],
    train: TrainOptions,
) -> Result<QualityReport> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("quality report needs at least one probe".into()));
    }
    let (rows, w) = sample.gather(a)?;
    let mut probe_errors = Vec::with_capacity(probes.len());
    let mut min_full = f64::INFINITY;
    for x in probes {
        let full = logistic_loss_split(a, x, None)?;
        let sub = logistic_loss_split(&rows, x, Some(&w))?;
        min_full = min_full.min(full);
        probe_errors.push(rel_err(sub, full));
    }
    let zero = vec![0.0; a.ncols()];
    let ones = vec![1.0; a.nrows()];
    let full_opt = train_weighted_logistic(a, &ones, &zero, train.max_iters, train.rel_tol * a.nrows() as f64)?;
    let core_opt = train_weighted_logistic(&rows, &w, &zero, train.max_iters, train.rel_tol * a.nrows() as f64)?;
    let err_full = rel_err(logistic_loss_split(&rows, &full_opt.x, Some(&w))?, full_opt.loss);
    let full_at_core = logistic_loss_split(a, &core_opt.x, None)?;
    let err_core = rel_err(core_opt.loss, full_at_core);
    min_full = min_full.min(full_opt.loss).min(full_at_core);
    Ok(QualityReport {
        max_probe_error: probe_errors.iter().cloned().fold(0.0, f64::max),
        probe_errors,
        full_optimum_loss: full_opt.loss,
        full_optimum: full_opt.x,
        coreset_optimum: core_opt.x,
        error_at_full_optimum: err_full,
        error_at_coreset_optimum: err_core,
        optimum_loss_ratio: full_at_core / full_opt.loss,
        min_full_loss: min_full,
    })
}
