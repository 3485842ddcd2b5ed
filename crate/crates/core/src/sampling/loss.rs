use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::WeightedSample;
use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

/// Per-row loss `h` in `f(Ax) = sum_i w_i h(a_i x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "snake_case")]
pub enum Loss {
    /// `|t|^p`
    AbsP(f64),
    /// `max{0, t}^p`
    ReluP(f64),
    /// `ln(1 + e^t)`
    Logistic,
}

impl Loss {
    pub fn from_name(name: &str, p: f64) -> Result<Self> {
        let loss = match name {
            "abs" | "abs_p" | "lp" => Self::AbsP(p),
            "relu" | "relu_p" => Self::ReluP(p),
            "logistic" => Self::Logistic,
            other => return Err(Error::InvalidArgument(format!("unknown loss {other:?}"))),
        };
        loss.validate()?;
        Ok(loss)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::AbsP(p) | Self::ReluP(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::InvalidArgument(format!("loss exponent must be >= 1, got {p}")))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::AbsP(p) => pow_abs(t, p),
            Self::ReluP(p) => {
                if t > 0.0 {
                    pow_abs(t, p)
                } else {
                    0.0
                }
            }
            Self::Logistic => logistic_h(t),
        }
    }

    /// A (sub)derivative; at kinks the value 0 is used.
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Self::AbsP(p) => {
                if t == 0.0 {
                    0.0
                } else if p == 1.0 {
                    t.signum()
                } else {
                    p * t.abs().powf(p - 1.0) * t.signum()
                }
            }
            Self::ReluP(p) => {
                if t <= 0.0 {
                    0.0
                } else if p == 1.0 {
                    1.0
                } else {
                    p * t.powf(p - 1.0)
                }
            }
            Self::Logistic => sigmoid(t),
        }
    }

    /// Whether `h(c t) = c^p h(t)` for `c > 0`, making ratios scale-free.
    pub fn is_homogeneous(&self) -> bool {
        !matches!(self, Self::Logistic)
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AbsP(p) => write!(f, "abs_p({p})"),
            Self::ReluP(p) => write!(f, "relu_p({p})"),
            Self::Logistic => write!(f, "logistic"),
        }
    }
}

impl FromStr for Loss {
    type Err = Error;

    /// Accepts `abs`, `relu` (both with p = 1), `abs:1.5`, `relu:2`, `logistic`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((name, p)) => {
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad loss exponent in {s:?}")))?;
                Self::from_name(name, p)
            }
            None => Self::from_name(s, 1.0),
        }
    }
}

#[inline]
fn pow_abs(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        t.abs()
    } else if p == 2.0 {
        t * t
    } else {
        t.abs().powf(p)
    }
}

/// `ln(1 + e^t)` evaluated as `ln(1 + e^{-|t|}) + max{0, t}`; the exponent is never positive.
#[inline]
pub fn logistic_h(t: f64) -> f64 {
    (-t.abs()).exp().ln_1p() + t.max(0.0)
}

#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `sum_i w_i h(a_i x)`, with unit weights when `weights` is `None`.
pub fn loss_eval(a: &DenseMatrix, x: &[f64], loss: Loss, weights: Option<&[f64]>) -> Result<f64> {
    a.check_dim(x)?;
    if let Some(w) = weights {
        if w.len() != a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} rows",
                w.len(),
                a.nrows()
            )));
        }
        Ok(a.rows_iter().zip(w).map(|(r, wi)| wi * loss.value(dot(r, x))).sum())
    } else {
        Ok(a.rows_iter().map(|r| loss.value(dot(r, x))).sum())
    }
}

/// `f_w(SAx) = sum_{i in S} w_i h(a_i x)`.
pub fn sample_loss(a: &DenseMatrix, sample: &WeightedSample, x: &[f64], loss: Loss) -> Result<f64> {
    a.check_dim(x)?;
    let mut s = 0.0;
    for e in sample.entries() {
        if e.index >= a.nrows() {
            return Err(Error::InvalidArgument(format!("sample index {} out of range", e.index)));
        }
        s += e.weight * loss.value(dot(a.row(e.index), x));
    }
    Ok(s)
}

fn check_weights(v: &[f64], w: &[f64]) -> Result<()> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values but {} weights",
            v.len(),
            w.len()
        )));
    }
    Ok(())
}

/// `||v||_{w,p} = (sum_i w_i |v_i|^p)^{1/p}`.
pub fn weighted_norm(v: &[f64], w: &[f64], p: f64) -> Result<f64> {
    check_weights(v, w)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {p}")));
    }
    let s: f64 = v.iter().zip(w).map(|(vi, wi)| wi * vi.abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// `||v||_{w,inf} = max_i |v_i|`: the weights drop out in the limit `p -> inf`.
pub fn weighted_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `||v||_{w,inf,p} = max_i |w_i^{1/p} v_i|`.
pub fn weighted_inf_p(v: &[f64], w: &[f64], p: f64) -> Result<f64> {
    check_weights(v, w)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {p}")));
    }
    Ok(v.iter()
        .zip(w)
        .fold(0.0, |m, (vi, wi)| m.max((wi.powf(1.0 / p) * vi).abs())))
}
