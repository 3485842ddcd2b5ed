//! Dense row-major matrices, synthetic instance generators, and the
//! factorizations the scoring code is built on.

mod factor;
pub(crate) mod io;

pub use factor::{orthonormal_basis, rank, singular_values, OrthonormalFactor, DEFAULT_RANK_TOL};
pub(crate) use io::format_f64;
pub use io::{load_labeled_csv, load_matrix, save_matrix, MatrixFormat};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{Error, Result};

/// A dense `n x d` real matrix stored row-major. Every entry is finite and
/// both dimensions are at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols + 1,
                col: k % cols + 1,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyMatrix)?;
        let cols = first.len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_row_major(rows, cols, vec![0.0; rows * cols])
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::from_row_major(rows, cols, vec![value; rows * cols])
    }

    pub fn identity(d: usize) -> Result<Self> {
        let mut m = Self::zeros(d, d)?;
        for j in 0..d {
            m.data[j * d + j] = 1.0;
        }
        Ok(m)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows_iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.rows_iter().map(|r| dot(r, x)).collect())
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} entries, matrix has {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok(())
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            if i >= self.rows {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::from_row_major(idx.len(), self.cols, data)
    }

    pub fn select_cols(&self, cols: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in self.rows_iter() {
            for &j in cols {
                data.push(r[j]);
            }
        }
        Self::from_row_major(self.rows, cols.len(), data)
    }

    pub fn vstack(parts: &[&DenseMatrix]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyMatrix)?;
        let cols = first.cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for m in parts {
            if m.cols != cols {
                return Err(Error::DimensionMismatch(format!(
                    "cannot stack {} columns onto {cols}",
                    m.cols
                )));
            }
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        Self::from_row_major(rows, cols, data)
    }

    /// `[[a, 0], [0, b]]`.
    pub fn block_diag(a: &DenseMatrix, b: &DenseMatrix) -> Result<Self> {
        let cols = a.cols + b.cols;
        let mut data = vec![0.0; (a.rows + b.rows) * cols];
        for (i, r) in a.rows_iter().enumerate() {
            data[i * cols..i * cols + a.cols].copy_from_slice(r);
        }
        for (i, r) in b.rows_iter().enumerate() {
            let off = (a.rows + i) * cols + a.cols;
            data[off..off + b.cols].copy_from_slice(r);
        }
        Self::from_row_major(a.rows + b.rows, cols, data)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_row_major(self.rows, self.cols, self.data.iter().map(|v| v * c).collect())
    }

    /// The matrix with every row negated and appended below, `[A; -A]`.
    pub fn with_negated_copy(&self) -> Result<Self> {
        let neg = self.scaled(-1.0)?;
        Self::vstack(&[self, &neg])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_tall(n: usize, d: usize) -> Result<()> {
    if d == 0 || n < d {
        return Err(Error::InvalidArgument(format!(
            "generator needs n >= d >= 1, got n={n}, d={d}"
        )));
    }
    Ok(())
}

/// I.i.d. standard normal entries.
pub fn gen_gaussian(n: usize, d: usize, seed: u64) -> Result<DenseMatrix> {
    check_tall(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
    DenseMatrix::from_row_major(n, d, data)
}

/// The `d x d` identity stacked `copies` times; row `k*d + j` is `e_j`.
pub fn gen_stacked_identity(d: usize, copies: usize) -> Result<DenseMatrix> {
    if d == 0 || copies == 0 {
        return Err(Error::InvalidArgument(format!(
            "stacked identity needs d >= 1 and copies >= 1, got d={d}, copies={copies}"
        )));
    }
    let mut data = vec![0.0; copies * d * d];
    for k in 0..copies {
        for j in 0..d {
            data[(k * d + j) * d + j] = 1.0;
        }
    }
    DenseMatrix::from_row_major(copies * d, d, data)
}

/// I.i.d. Student-t entries with `dof` degrees of freedom (`dof = 1` is Cauchy).
pub fn gen_heavy_tail(n: usize, d: usize, dof: f64, seed: u64) -> Result<DenseMatrix> {
    check_tall(n, d)?;
    if !(dof >= 1.0) || !dof.is_finite() {
        return Err(Error::InvalidArgument(format!("dof must be >= 1, got {dof}")));
    }
    let dist = StudentT::new(dof).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d).map(|_| dist.sample(&mut rng)).collect();
    DenseMatrix::from_row_major(n, d, data)
}

/// Half Gaussian rows, half Cauchy rows (the heavy half below the Gaussian half).
pub fn gen_mixed(n: usize, d: usize, seed: u64) -> Result<DenseMatrix> {
    check_tall(n, d)?;
    let heavy = n / 2;
    let light = n - heavy;
    let g = gen_gaussian(light.max(d), d, crate::seed::derive_seed(seed, 0))?;
    let g = if light < d {
        g.select_rows(&(0..light).collect::<Vec<_>>())?
    } else {
        g
    };
    if heavy < d {
        return Ok(g);
    }
    let c = gen_heavy_tail(heavy, d, 1.0, crate::seed::derive_seed(seed, 1))?;
    DenseMatrix::vstack(&[&g, &c])
}
