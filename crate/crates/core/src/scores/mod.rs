//! Per-row importance scores: ℓ2 leverage, exact ℓp sensitivities, cheap
//! upper bounds, Lewis weights, and μ-complexity estimates.

mod lewis;
mod mu;
mod oracle;

pub use lewis::{lewis_weights, LewisOptions};
pub use mu::{mu_estimate, mu_ratio, MuEstimate};
pub use oracle::{exact_lp_sensitivities, exact_lp_sensitivity_row, OracleOptions, SensitivityOracle};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, orthonormal_basis, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    L2Leverage,
    LpSensitivityExact,
    LpSensitivityUpper,
    LewisWeight,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::L2Leverage => "l2_leverage",
            Self::LpSensitivityExact => "lp_sensitivity_exact",
            Self::LpSensitivityUpper => "lp_sensitivity_upper",
            Self::LewisWeight => "lewis_weight",
        }
    }
}

/// Sidecar metadata written next to a score CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMetadata {
    pub kind: ScoreKind,
    pub p: Option<f64>,
    pub total: f64,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    values: Vec<f64>,
    kind: ScoreKind,
    p: Option<f64>,
    total: f64,
    tol: Option<f64>,
}

impl ScoreVector {
    pub fn new(values: Vec<f64>, kind: ScoreKind, p: Option<f64>) -> Self {
        let total = values.iter().sum();
        Self {
            values,
            kind,
            p,
            total,
            tol: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn metadata(&self) -> ScoreMetadata {
        ScoreMetadata {
            kind: self.kind,
            p: self.p,
            total: self.total,
            tol: self.tol,
        }
    }

    /// Concatenates score vectors of the same kind (e.g. per block of a block-diagonal matrix).
    pub fn concat(parts: &[&ScoreVector]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyMatrix)?;
        if parts.iter().any(|s| s.kind != first.kind || s.p != first.p) {
            return Err(Error::InvalidArgument(
                "cannot concatenate scores of different kinds".into(),
            ));
        }
        let values = parts.iter().flat_map(|s| s.values.iter().copied()).collect();
        let mut out = Self::new(values, first.kind, first.p);
        out.tol = first.tol;
        Ok(out)
    }

    /// CSV with header `index,score`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,score\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{i},{}", crate::matrix_format(*v));
        }
        out
    }

    pub fn save(&self, csv_path: impl AsRef<Path>, meta_path: impl AsRef<Path>) -> Result<()> {
        let (csv_path, meta_path) = (csv_path.as_ref(), meta_path.as_ref());
        fs::write(csv_path, self.to_csv()).map_err(|e| Error::io(csv_path, e))?;
        let meta = serde_json::to_string_pretty(&self.metadata())?;
        fs::write(meta_path, meta + "\n").map_err(|e| Error::io(meta_path, e))
    }

    pub fn load(csv_path: impl AsRef<Path>, meta_path: impl AsRef<Path>) -> Result<Self> {
        let (csv_path, meta_path) = (csv_path.as_ref(), meta_path.as_ref());
        let meta: ScoreMetadata =
            serde_json::from_str(&fs::read_to_string(meta_path).map_err(|e| Error::io(meta_path, e))?)?;
        let text = fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
        let values = crate::parse_index_value_csv(&text, "score")?;
        let mut out = Self::new(values, meta.kind, meta.p);
        out.tol = meta.tol;
        Ok(out)
    }
}

/// `l_i = ||e_i^T Q||^2 = a_i (A^T A)^+ a_i^T`; the total equals the rank.
pub fn l2_leverage(a: &DenseMatrix) -> ScoreVector {
    let f = orthonormal_basis(a);
    let values = (0..a.nrows())
        .map(|i| {
            let q = f.q_row(i);
            dot(q, q).min(1.0)
        })
        .collect();
    ScoreVector::new(values, ScoreKind::L2Leverage, None)
}

/// `(l_i^{(2)})^{p/2}`, a pointwise upper bound on the ℓp sensitivities for `p <= 2`,
/// since `|a_i x|^p <= (l_i ||Ax||_2^2)^{p/2} <= l_i^{p/2} ||Ax||_p^p`.
pub fn l2_relax_upper_bounds(a: &DenseMatrix, p: f64) -> Result<ScoreVector> {
    oracle::check_p(p)?;
    let lev = l2_leverage(a);
    let values = lev.values.iter().map(|l| l.powf(p / 2.0)).collect();
    Ok(ScoreVector::new(values, ScoreKind::LpSensitivityUpper, Some(p)))
}
