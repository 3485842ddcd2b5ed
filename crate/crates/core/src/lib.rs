//! Weighted row subsamples (coresets) of tall matrices that preserve ℓp,
//! p-ReLU and logistic objectives, built by ℓ2-augmented sensitivity sampling.
//!
//! Sampling probabilities take the form
//! `p_i = min{1, alpha * (mu * s_i + l_i + floor)}` where `s_i` bounds the ℓp
//! sensitivity of row `i` and `l_i` is its ℓ2 leverage score. Rows are drawn
//! independently and keep their weight `1/p_i` alongside the row index; the
//! weights are never folded into the rows.
//!
//! Modules:
//! * [`matrix`]: storage, I/O, generators, orthonormal bases and rank.
//! * [`scores`]: leverage scores, exact sensitivities, upper bounds, Lewis weights, μ.
//! * [`sampling`]: sampling plans, Poisson draws, weighted norms and losses.
//! * [`distortion`]: search-based estimates of the worst-case relative error.
//! * [`hardness`]: the block instance on which pure ℓp sampling loses rank.
//! * [`logistic`]: logistic-regression coresets and weighted training.
//! * [`cli`]: the `lpcoreset` command-line frontend.

pub mod calibration;
pub mod cli;
pub mod distortion;
pub mod error;
pub mod hardness;
pub mod logistic;
pub mod matrix;
pub mod sampling;
pub mod scores;
pub mod seed;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;

pub(crate) use matrix::format_f64 as matrix_format;

/// Parses a two-column CSV with header `index,<name>` into a dense vector.
/// Indices must be `0..n` in order.
pub(crate) fn parse_index_value_csv(text: &str, name: &str) -> Result<Vec<f64>> {
    let pairs = parse_index_pairs(text, name)?;
    let mut out = Vec::with_capacity(pairs.len());
    for (k, (i, v)) in pairs.into_iter().enumerate() {
        if i != k {
            return Err(Error::Parse {
                row: k + 2,
                col: 1,
                msg: format!("expected index {k}, found {i}"),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Parses `index,<name>` lines into `(index, value)` pairs.
pub(crate) fn parse_index_pairs(text: &str, name: &str) -> Result<Vec<(usize, f64)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header = format!("index,{name}");
    match lines.next() {
        Some((_, l)) if l.trim() == header => {}
        Some((ln, l)) => {
            return Err(Error::Parse {
                row: ln + 1,
                col: 1,
                msg: format!("expected header {header:?}, found {l:?}"),
            })
        }
        None => return Err(Error::EmptyMatrix),
    }
    let mut out = Vec::new();
    for (ln, line) in lines {
        let mut it = line.split(',');
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse {
                row: ln + 1,
                col: 1,
                msg: "expected two fields".into(),
            });
        };
        let i: usize = a.trim().parse().map_err(|_| Error::Parse {
            row: ln + 1,
            col: 1,
            msg: format!("bad index {a:?}"),
        })?;
        let v: f64 = b.trim().parse().map_err(|_| Error::Parse {
            row: ln + 1,
            col: 2,
            msg: format!("bad value {b:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite { row: ln + 1, col: 2 });
        }
        out.push((i, v));
    }
    Ok(out)
}
