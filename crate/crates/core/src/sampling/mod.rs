//! Inclusion probabilities and independent (Poisson) row sampling.
//!
//! A sample keeps row indices and weights `1/p_i` side by side. Rows are never
//! rescaled by the weights: no single rescaling of rows can preserve two
//! different ℓp objectives at once.

mod loss;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use loss::{logistic_h, loss_eval, sample_loss, sigmoid, weighted_inf, weighted_inf_p, weighted_norm, Loss};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scores::ScoreVector;
use crate::{matrix_format, parse_index_pairs, parse_index_value_csv, seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Augmented,
    PureLp,
    Uniform,
    Lewis,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Augmented => "augmented",
            Self::PureLp => "pure_lp",
            Self::Uniform => "uniform",
            Self::Lewis => "lewis",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "augmented" => Ok(Self::Augmented),
            "pure_lp" | "pure" => Ok(Self::PureLp),
            "uniform" => Ok(Self::Uniform),
            "lewis" => Ok(Self::Lewis),
            other => Err(Error::InvalidArgument(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Per-row inclusion probabilities plus the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    probs: Vec<f64>,
    alpha: f64,
    mu: f64,
    p: f64,
    scheme: Scheme,
    expected_size: f64,
}

/// JSON form of a plan; the probabilities live in a companion CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub scheme: Scheme,
    pub p: f64,
    pub mu: f64,
    pub alpha: f64,
    pub probs_path: String,
    pub expected_size: f64,
}

fn check_scores(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} scores are empty")));
    }
    for (i, s) in v.iter().enumerate() {
        if !s.is_finite() || *s < 0.0 {
            return Err(Error::InvalidArgument(format!("{name} score {i} is {s}")));
        }
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn norm_p(sv: &ScoreVector) -> f64 {
    sv.p().unwrap_or(2.0)
}

/// Unclamped augmented importances `mu * s_i + l_i + floor`.
pub fn augmented_importance(sp: &ScoreVector, s2: &ScoreVector, mu: f64, floor: f64) -> Result<Vec<f64>> {
    if sp.len() != s2.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} lp scores vs {} l2 scores",
            sp.len(),
            s2.len()
        )));
    }
    check_scores("lp", sp.values())?;
    check_scores("l2", s2.values())?;
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be >= 1, got {mu}")));
    }
    if !(floor >= 0.0 && floor.is_finite()) {
        return Err(Error::InvalidArgument(format!("floor must be >= 0, got {floor}")));
    }
    Ok(sp
        .values()
        .iter()
        .zip(s2.values())
        .map(|(s, l)| mu * s + l + floor)
        .collect())
}

/// `p_i = min{1, alpha * (mu * s_i + l_i + 1/n)}`.
pub fn augmented_plan(sp: &ScoreVector, s2: &ScoreVector, mu: f64, alpha: f64) -> Result<SamplingPlan> {
    augmented_plan_with_floor(sp, s2, mu, alpha, 1.0 / sp.len().max(1) as f64)
}

/// Augmented plan with a custom uniform floor in place of `1/n`.
pub fn augmented_plan_with_floor(
    sp: &ScoreVector,
    s2: &ScoreVector,
    mu: f64,
    alpha: f64,
    floor: f64,
) -> Result<SamplingPlan> {
    check_positive("alpha", alpha)?;
    let imp = augmented_importance(sp, s2, mu, floor)?;
    Ok(SamplingPlan::from_importance(
        &imp,
        alpha,
        mu,
        norm_p(sp),
        Scheme::Augmented,
    ))
}

/// `p_i = min{1, k * s_i}`. Rows with zero score get probability zero.
pub fn pure_lp_plan(sp: &ScoreVector, k: f64) -> Result<SamplingPlan> {
    check_positive("k", k)?;
    check_scores("lp", sp.values())?;
    Ok(SamplingPlan::from_importance(
        sp.values(),
        k,
        1.0,
        norm_p(sp),
        Scheme::PureLp,
    ))
}

/// `p_i = min{1, k * w_i}` for Lewis weights `w`.
pub fn lewis_plan(w: &ScoreVector, k: f64) -> Result<SamplingPlan> {
    check_positive("k", k)?;
    check_scores("lewis", w.values())?;
    Ok(SamplingPlan::from_importance(
        w.values(),
        k,
        1.0,
        norm_p(w),
        Scheme::Lewis,
    ))
}

/// `p_i = m / n` for every row.
pub fn uniform_plan(n: usize, m_target: f64) -> Result<SamplingPlan> {
    if n == 0 {
        return Err(Error::InvalidArgument("uniform plan needs n >= 1".into()));
    }
    check_positive("m_target", m_target)?;
    if m_target > n as f64 {
        return Err(Error::InvalidArgument(format!("m_target {m_target} exceeds n = {n}")));
    }
    let prob = m_target / n as f64;
    Ok(SamplingPlan {
        probs: vec![prob; n],
        alpha: prob,
        mu: 1.0,
        p: 2.0,
        scheme: Scheme::Uniform,
        expected_size: m_target,
    })
}

/// Sum of `min{1, alpha * v_i}`.
pub fn clamped_total(importance: &[f64], alpha: f64) -> f64 {
    importance.iter().map(|v| (alpha * v).min(1.0)).sum()
}

/// The scale `alpha` for which `sum_i min{1, alpha * v_i}` equals `target`,
/// found by bisection on the (monotone) clamped total.
pub fn alpha_for_expected_size(importance: &[f64], target: f64) -> Result<f64> {
    check_scores("importance", importance)?;
    check_positive("target", target)?;
    let support = importance.iter().filter(|v| **v > 0.0).count() as f64;
    if target > support {
        return Err(Error::InvalidArgument(format!(
            "expected size {target} exceeds the {support} rows with positive importance"
        )));
    }
    let total: f64 = importance.iter().sum();
    let mut lo = target / total;
    if clamped_total(importance, lo) >= target {
        return Ok(lo);
    }
    let mut hi = lo * 2.0;
    while clamped_total(importance, hi) < target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::InvalidArgument("expected size is unreachable".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if clamped_total(importance, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

impl SamplingPlan {
    /// Clamps `alpha * importance` to `[0, 1]`.
    pub fn from_importance(importance: &[f64], alpha: f64, mu: f64, p: f64, scheme: Scheme) -> Self {
        let probs: Vec<f64> = importance.iter().map(|v| (alpha * v).min(1.0)).collect();
        let expected_size = probs.iter().sum();
        Self {
            probs,
            alpha,
            mu,
            p,
            scheme,
            expected_size,
        }
    }

    /// Rebuilds a plan from stored probabilities, validating them.
    pub fn from_parts(probs: Vec<f64>, alpha: f64, mu: f64, p: f64, scheme: Scheme) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("plan has no rows".into()));
        }
        if let Some((i, v)) = probs
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0 && **v <= 1.0))
        {
            return Err(Error::InvalidArgument(format!(
                "probability {i} is {v}, outside [0, 1]"
            )));
        }
        let expected_size = probs.iter().sum();
        Ok(Self {
            probs,
            alpha,
            mu,
            p,
            scheme,
            expected_size,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn expected_size(&self) -> f64 {
        self.expected_size
    }

    pub fn probs_csv(&self) -> String {
        let mut out = String::from("index,prob\n");
        for (i, v) in self.probs.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", matrix_format(*v)));
        }
        out
    }

    pub fn record(&self, probs_path: &str) -> PlanRecord {
        PlanRecord {
            scheme: self.scheme,
            p: self.p,
            mu: self.mu,
            alpha: self.alpha,
            probs_path: probs_path.to_string(),
            expected_size: self.expected_size,
        }
    }

    /// Writes the JSON record and the companion probabilities CSV. The record
    /// stores the CSV path relative to the JSON file's directory.
    pub fn save(&self, json_path: impl AsRef<Path>, probs_path: impl AsRef<Path>) -> Result<()> {
        let (json_path, probs_path) = (json_path.as_ref(), probs_path.as_ref());
        std::fs::write(probs_path, self.probs_csv()).map_err(|e| Error::io(probs_path, e))?;
        let rel = match (json_path.parent(), probs_path.parent()) {
            (Some(a), Some(b)) if a == b => probs_path.file_name().map(|s| s.to_string_lossy().into_owned()),
            _ => None,
        }
        .unwrap_or_else(|| probs_path.to_string_lossy().into_owned());
        let json = serde_json::to_string_pretty(&self.record(&rel))?;
        std::fs::write(json_path, json + "\n").map_err(|e| Error::io(json_path, e))
    }

    pub fn load(json_path: impl AsRef<Path>) -> Result<Self> {
        let json_path = json_path.as_ref();
        let text = std::fs::read_to_string(json_path).map_err(|e| Error::io(json_path, e))?;
        let rec: PlanRecord = serde_json::from_str(&text)?;
        let probs_path = json_path
            .parent()
            .map(|d| d.join(&rec.probs_path))
            .unwrap_or_else(|| rec.probs_path.clone().into());
        let csv = std::fs::read_to_string(&probs_path).map_err(|e| Error::io(&probs_path, e))?;
        let probs = parse_index_value_csv(&csv, "prob")?;
        Self::from_parts(probs, rec.alpha, rec.mu, rec.p, rec.scheme)
    }

    /// Includes row `i` independently with probability `p_i`; weight `1/p_i`.
    pub fn draw(&self, seed: u64) -> WeightedSample {
        let mut rng = seed::rng(seed);
        let mut entries = Vec::with_capacity(self.expected_size.ceil() as usize + 16);
        for (i, &prob) in self.probs.iter().enumerate() {
            // One uniform per row keeps the stream aligned across plans.
            let u: f64 = rng.random();
            if prob >= 1.0 || u < prob {
                entries.push(SampleEntry {
                    index: i,
                    weight: 1.0 / prob,
                });
            }
        }
        WeightedSample {
            entries,
            n: self.probs.len(),
            seed,
            scheme: Some(self.scheme),
        }
    }
}

/// `plan.draw(seed)`.
pub fn draw(plan: &SamplingPlan, seed: u64) -> WeightedSample {
    plan.draw(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub index: usize,
    pub weight: f64,
}

/// Row indices (strictly increasing) with their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    entries: Vec<SampleEntry>,
    n: usize,
    seed: u64,
    scheme: Option<Scheme>,
}

impl WeightedSample {
    /// Builds a sample from explicit entries over `n` source rows.
    pub fn from_entries(entries: Vec<SampleEntry>, n: usize, seed: u64) -> Result<Self> {
        for (k, e) in entries.iter().enumerate() {
            if e.index >= n {
                return Err(Error::InvalidArgument(format!(
                    "sample index {} out of range for {n} rows",
                    e.index
                )));
            }
            if k > 0 && entries[k - 1].index >= e.index {
                return Err(Error::InvalidArgument(
                    "sample indices must be strictly increasing".into(),
                ));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "weight of row {} is {}",
                    e.index, e.weight
                )));
            }
        }
        Ok(Self {
            entries,
            n,
            seed,
            scheme: None,
        })
    }

    /// Every row with weight 1.
    pub fn full(n: usize) -> Self {
        Self {
            entries: (0..n).map(|index| SampleEntry { index, weight: 1.0 }).collect(),
            n,
            seed: 0,
            scheme: None,
        }
    }

    pub fn entries(&self) -> &[SampleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_rows(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scheme(&self) -> Option<Scheme> {
        self.scheme
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.weight).collect()
    }

    /// The sampled rows of `a` (unscaled) and their weights.
    pub fn gather(&self, a: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
        if a.nrows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "sample drawn from {} rows, matrix has {}",
                self.n,
                a.nrows()
            )));
        }
        if self.entries.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        Ok((a.select_rows(&self.indices())?, self.weights()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,weight\n");
        for e in &self.entries {
            out.push_str(&format!("{},{}\n", e.index, matrix_format(e.weight)));
        }
        out
    }

    pub fn from_csv(text: &str, n: usize) -> Result<Self> {
        let entries = parse_index_pairs(text, "weight")?
            .into_iter()
            .map(|(index, weight)| SampleEntry { index, weight })
            .collect();
        Self::from_entries(entries, n, 0)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, n)
    }
}
