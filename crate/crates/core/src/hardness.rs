//! The block instance on which pure ℓp sensitivity sampling loses rank.
//!
//! The matrix is `diag(G, I_stack)`: a Gaussian block whose rows all have small
//! ℓp sensitivity, next to `copies` stacked identities whose rows each carry
//! sensitivity `1/copies`. Pure ℓp sampling spends almost its whole budget on
//! the identity block and returns too few Gaussian rows to span it.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::distortion::RankChecker;
use crate::error::{Error, Result};
use crate::matrix::{gen_gaussian, gen_stacked_identity, DenseMatrix, DEFAULT_RANK_TOL};
use crate::sampling::{
    alpha_for_expected_size, augmented_importance, pure_lp_plan, uniform_plan, SamplingPlan, Scheme,
};
use crate::scores::{exact_lp_sensitivities, l2_leverage, l2_relax_upper_bounds, ScoreKind, ScoreVector};
use crate::seed;

/// Block sizes up to this many rows get exact oracle scores.
pub const ORACLE_MAX_ROWS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    Oracle,
    L2Relax,
}

#[derive(Debug, Clone)]
pub struct HardInstance {
    pub matrix: DenseMatrix,
    pub d: usize,
    pub n: usize,
    pub copies: usize,
    pub p: f64,
    /// Total ℓp sensitivity of the Gaussian block and of the identity block.
    pub measured_totals: (f64, f64),
    pub method: ScoreMethod,
    /// ℓp scores of every row of `matrix`.
    pub lp_scores: ScoreVector,
    pub l2_scores: ScoreVector,
    pub seed: u64,
}

impl HardInstance {
    pub fn block1_rows(&self) -> Range<usize> {
        0..self.n
    }

    pub fn block2_rows(&self) -> Range<usize> {
        self.n..self.n + self.d * self.copies
    }

    pub fn blocks(&self) -> [Range<usize>; 2] {
        [self.block1_rows(), self.block2_rows()]
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds the instance with scores from the exact oracle for blocks of at most
/// [`ORACLE_MAX_ROWS`] rows and from the `(l^2)^{p/2}` bound otherwise.
///
/// Sensitivities of a block-diagonal matrix are computed block by block: the
/// objective splits across the column blocks, so each row's supremum is taken
/// with the other block's coordinates at zero.
pub fn hard_instance(d: usize, n: usize, copies: usize, p: f64, seed: u64) -> Result<HardInstance> {
    hard_instance_with_threshold(d, n, copies, p, seed, ORACLE_MAX_ROWS)
}

pub fn hard_instance_with_threshold(
    d: usize,
    n: usize,
    copies: usize,
    p: f64,
    seed: u64,
    oracle_max_rows: usize,
) -> Result<HardInstance> {
    if d == 0 || n < d {
        return Err(Error::InvalidArgument(format!(
            "need n >= d >= 1, got n = {n}, d = {d}"
        )));
    }
    if copies == 0 {
        return Err(Error::InvalidArgument("copies must be >= 1".into()));
    }
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [1, 2], got {p}")));
    }
    let g = gen_gaussian(n, d, seed)?;
    let id = gen_stacked_identity(d, copies)?;
    let method = if n.max(d * copies) <= oracle_max_rows {
        ScoreMethod::Oracle
    } else {
        ScoreMethod::L2Relax
    };
    let score = |m: &DenseMatrix| match method {
        ScoreMethod::Oracle => exact_lp_sensitivities(m, p, 1e-9),
        ScoreMethod::L2Relax => l2_relax_upper_bounds(m, p),
    };
    let s1 = score(&g)?;
    let s2 = score(&id)?;
    let measured_totals = (s1.total(), s2.total());
    let lp_scores = ScoreVector::concat(&[&s1, &s2])?;
    let l2_scores = ScoreVector::concat(&[&l2_leverage(&g), &l2_leverage(&id)])?;
    Ok(HardInstance {
        matrix: DenseMatrix::block_diag(&g, &id)?,
        d,
        n,
        copies,
        p,
        measured_totals,
        method,
        lp_scores,
        l2_scores,
        seed,
    })
}

/// Two-sided Clopper-Pearson interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: usize, trials: usize, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials || !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "invalid interval request: {successes}/{trials} at level {level}"
        )));
    }
    let a = (1.0 - level) / 2.0;
    let (k, n) = (successes as f64, trials as f64);
    let beta = |x: f64, y: f64| Beta::new(x, y).map_err(|e| Error::InvalidArgument(e.to_string()));
    let lo = if successes == 0 {
        0.0
    } else {
        beta(k, n - k + 1.0)?.inverse_cdf(a)
    };
    let hi = if successes == trials {
        1.0
    } else {
        beta(k + 1.0, n - k)?.inverse_cdf(1.0 - a)
    };
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRow {
    pub scheme: Scheme,
    pub k: f64,
    pub expected_size: f64,
    pub success_fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_realized_size: f64,
    pub successes: usize,
    pub trials: usize,
}

pub const LOWERBOUND_HEADER: &str = "scheme,k,expected_size,success_fraction,ci_low,ci_high,mean_realized_size";

pub fn lowerbound_csv(rows: &[LowerBoundRow]) -> String {
    let f = crate::matrix_format;
    let mut out = format!("{LOWERBOUND_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scheme,
            f(r.k),
            f(r.expected_size),
            f(r.success_fraction),
            f(r.ci_low),
            f(r.ci_high),
            f(r.mean_realized_size)
        ));
    }
    out
}

/// The three plans compared at pure-ℓp budget `k`: pure ℓp, then augmented
/// (μ = 1) and uniform scaled to the same expected size.
pub fn matched_plans(inst: &HardInstance, k: f64) -> Result<[SamplingPlan; 3]> {
    let pure = pure_lp_plan(&inst.lp_scores, k)?;
    let m = pure.expected_size();
    let n = inst.nrows();
    let imp = augmented_importance(&inst.lp_scores, &inst.l2_scores, 1.0, 1.0 / n as f64)?;
    let alpha = alpha_for_expected_size(&imp, m)?;
    let aug = SamplingPlan::from_importance(&imp, alpha, 1.0, inst.p, Scheme::Augmented);
    let uni = uniform_plan(n, m)?;
    Ok([pure, aug, uni])
}

/// For each budget `k` and scheme, the fraction of `trials` draws that keep the
/// rank of both blocks. Trial `t` of scheme `s` at budget index `b` uses seed
/// `derive_seed(derive_seed(seed, 3b + s), t)`.
pub fn lowerbound_experiment(
    inst: &HardInstance,
    budgets: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<LowerBoundRow>> {
    lowerbound_experiment_with_tol(inst, budgets, trials, seed, DEFAULT_RANK_TOL)
}

/// [`lowerbound_experiment`] with a relative rank tolerance.
pub fn lowerbound_experiment_with_tol(
    inst: &HardInstance,
    budgets: &[f64],
    trials: usize,
    seed: u64,
    rank_tol: f64,
) -> Result<Vec<LowerBoundRow>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if inst.lp_scores.kind() == ScoreKind::L2Leverage {
        return Err(Error::InvalidArgument("instance needs ℓp scores".into()));
    }
    let checker = RankChecker::new(&inst.matrix, Some(&inst.blocks()), rank_tol)?;
    let mut rows = Vec::with_capacity(3 * budgets.len());
    for (b, &k) in budgets.iter().enumerate() {
        let plans = matched_plans(inst, k)?;
        for (s, plan) in plans.iter().enumerate() {
            let base = seed::derive_seed(seed, (3 * b + s) as u64);
            let mut successes = 0;
            let mut size_sum = 0usize;
            for t in 0..trials {
                let sample = plan.draw(seed::derive_seed(base, t as u64));
                size_sum += sample.len();
                if checker.check(&inst.matrix, &sample)?.iter().all(|ok| *ok) {
                    successes += 1;
                }
            }
            let (ci_low, ci_high) = clopper_pearson(successes, trials, 0.95)?;
            rows.push(LowerBoundRow {
                scheme: plan.scheme(),
                k,
                expected_size: plan.expected_size(),
                success_fraction: successes as f64 / trials as f64,
                ci_low,
                ci_high,
                mean_realized_size: size_sum as f64 / trials as f64,
                successes,
                trials,
            });
        }
    }
    Ok(rows)
}
