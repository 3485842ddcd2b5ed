//! The oversampling constant and the `alpha(epsilon, delta, d, mu)` helper.
//!
//! `alpha = c * (ln(d mu ln(1/delta) / epsilon) * ln(d)^2 + ln(1/delta)) / epsilon^2`.
//! The constant `c` is fixed once by a pilot run and stored in the repository's
//! `calibration.json`, together with a fingerprint of the pilot instance.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::io::encode_lpsm;
use crate::matrix::DenseMatrix;

const BUNDLED: &str = include_str!("../../../calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c_alpha: f64,
    pub date: String,
    /// SHA-256 of the pilot instance in LPSM encoding.
    pub instance_fingerprint: String,
    /// Pure-ℓp budget `k` chosen by the pilot for the rank-loss experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowerbound_k: Option<f64>,
}

impl Calibration {
    /// The calibration shipped with the crate.
    pub fn bundled() -> Result<Self> {
        let c: Self = serde_json::from_str(BUNDLED)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: Self = serde_json::from_str(&text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    fn validate(&self) -> Result<()> {
        if !(self.c_alpha > 0.0 && self.c_alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "c_alpha must be positive, got {}",
                self.c_alpha
            )));
        }
        Ok(())
    }

    pub fn alpha(&self, epsilon: f64, delta: f64, d: usize, mu: f64) -> Result<f64> {
        Ok(self.c_alpha * alpha_shape(epsilon, delta, d, mu)?)
    }
}

/// `(ln(d mu ln(1/delta) / epsilon) * ln(d)^2 + ln(1/delta)) / epsilon^2`.
pub fn alpha_shape(epsilon: f64, delta: f64, d: usize, mu: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be >= 1, got {mu}")));
    }
    let ld = (d as f64).ln();
    let li = (1.0 / delta).ln();
    let inner = (d as f64 * mu * li / epsilon).ln().max(0.0);
    Ok((inner * ld * ld + li) / (epsilon * epsilon))
}

/// Lowercase hex SHA-256 of the LPSM encoding of `a`.
pub fn fingerprint(a: &DenseMatrix) -> String {
    Sha256::digest(encode_lpsm(a))
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_value() {
        // d = 10, mu = 1, delta = 0.1, epsilon = 0.25.
        let li = 10f64.ln();
        let want = ((10.0 * li / 0.25f64).ln() * li * li + li) / 0.0625;
        assert!((alpha_shape(0.25, 0.1, 10, 1.0).unwrap() - want).abs() < 1e-12);
        assert!((want - 420.6).abs() < 0.5);
        assert!(alpha_shape(0.0, 0.1, 10, 1.0).is_err());
        assert!(alpha_shape(0.25, 1.0, 10, 1.0).is_err());
        assert!(alpha_shape(0.25, 0.1, 10, 0.5).is_err());
    }

    #[test]
    fn shape_grows_with_mu_and_shrinks_with_epsilon() {
        let base = alpha_shape(0.25, 0.1, 10, 1.0).unwrap();
        assert!(alpha_shape(0.25, 0.1, 10, 2.0).unwrap() > base);
        assert!(alpha_shape(0.5, 0.1, 10, 1.0).unwrap() < base);
    }

    #[test]
    fn bundled_file_parses() {
        let c = Calibration::bundled().unwrap();
        assert_eq!(c.instance_fingerprint.len(), 64);
    }

    #[test]
    fn fingerprint_is_stable() {
        let a = DenseMatrix::identity(2).unwrap();
        assert_eq!(fingerprint(&a), fingerprint(&a.clone()));
        assert_ne!(fingerprint(&a), fingerprint(&a.scaled(2.0).unwrap()));
    }
}
