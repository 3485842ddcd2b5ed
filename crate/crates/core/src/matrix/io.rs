use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DenseMatrix;
use crate::error::{Error, Result};

const LPSM_MAGIC: &[u8; 4] = b"LPSM";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    Lpsm,
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "lpsm" => Ok(Self::Lpsm),
            other => Err(Error::InvalidArgument(format!("unknown matrix format {other:?}"))),
        }
    }
}

pub fn load_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<DenseMatrix> {
    let path = path.as_ref();
    match format {
        MatrixFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_csv(&text)
        }
        MatrixFormat::Lpsm => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_lpsm(&bytes)
        }
    }
}

pub fn save_matrix(a: &DenseMatrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        MatrixFormat::Csv => encode_csv(a).into_bytes(),
        MatrixFormat::Lpsm => encode_lpsm(a),
    };
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// Labeled CSV: the last column is a label in {-1, +1}. Each feature row is
/// multiplied by `-y` so the logistic loss becomes `sum ln(1 + exp(a_i x))`.
pub fn load_labeled_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw = parse_csv(&text)?;
    let d = raw.ncols();
    if d < 2 {
        return Err(Error::InvalidArgument(
            "labeled csv needs at least one feature column and a label column".into(),
        ));
    }
    let mut data = Vec::with_capacity(raw.nrows() * (d - 1));
    for (i, r) in raw.rows_iter().enumerate() {
        let y = r[d - 1];
        if y != 1.0 && y != -1.0 {
            return Err(Error::Parse {
                row: i + 1,
                col: d,
                msg: format!("label must be -1 or +1, got {y}"),
            });
        }
        data.extend(r[..d - 1].iter().map(|v| -y * v));
    }
    DenseMatrix::from_row_major(raw.nrows(), d - 1, data)
}

pub(crate) fn parse_csv(text: &str) -> Result<DenseMatrix> {
    let mut data = Vec::new();
    let mut cols = 0;
    let mut rows = 0;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let start = data.len();
        for (j, field) in line.split(',').enumerate() {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: ln + 1,
                col: j + 1,
                msg: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: ln + 1,
                    col: j + 1,
                });
            }
            data.push(v);
        }
        let width = data.len() - start;
        if rows == 0 {
            cols = width;
        } else if width != cols {
            return Err(Error::Parse {
                row: ln + 1,
                col: width.min(cols) + 1,
                msg: format!("row has {width} fields, expected {cols}"),
            });
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyMatrix);
    }
    DenseMatrix::from_row_major(rows, cols, data)
}

/// Shortest round-trip decimal formatting, so parsing recovers every value exactly.
pub(crate) fn encode_csv(a: &DenseMatrix) -> String {
    let mut out = String::with_capacity(a.nrows() * a.ncols() * 8);
    for r in a.rows_iter() {
        for (j, v) in r.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn format_f64(v: f64) -> String {
    if v == 0.0 {
        // drop the sign of negative zero
        "0".to_string()
    } else {
        format!("{v}")
    }
}

pub(crate) fn encode_lpsm(a: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 8 * a.as_slice().len());
    out.extend_from_slice(LPSM_MAGIC);
    out.extend_from_slice(&(a.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(a.ncols() as u64).to_le_bytes());
    for v in a.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub(crate) fn decode_lpsm(bytes: &[u8]) -> Result<DenseMatrix> {
    let bad = |msg: &str| Error::Parse {
        row: 0,
        col: 0,
        msg: msg.to_string(),
    };
    if bytes.len() < 20 {
        return Err(if bytes.is_empty() {
            Error::EmptyMatrix
        } else {
            bad("truncated LPSM header")
        });
    }
    if &bytes[..4] != LPSM_MAGIC {
        return Err(bad("missing LPSM magic"));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    let expected = n
        .checked_mul(d)
        .and_then(|k| k.checked_mul(8))
        .ok_or_else(|| bad("LPSM dimensions overflow"))?;
    if body.len() != expected {
        return Err(bad(&format!(
            "LPSM body has {} bytes, header promises {expected}",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_row_major(n, d, data)
}
