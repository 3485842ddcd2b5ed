use nalgebra::{DMatrix, DVector};

use super::{l2_leverage, ScoreKind, ScoreVector};
use crate::error::{Error, Result};
use crate::matrix::{dot, orthonormal_basis, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LewisOptions {
    pub iters: usize,
    pub tol: f64,
}

impl Default for LewisOptions {
    fn default() -> Self {
        Self { iters: 100, tol: 1e-8 }
    }
}

/// ℓp Lewis weights by the fixed-point iteration
/// `w_i <- (a_i (A^T W^{1-2/p} A)^{-1} a_i^T)^{p/2}`, for `p in [1, 2)`.
/// At `p = 2` the weights are the leverage scores and no iteration is run.
pub fn lewis_weights(a: &DenseMatrix, p: f64, opts: LewisOptions) -> Result<ScoreVector> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "Lewis weights need p in [1, 2], got {p}"
        )));
    }
    if p == 2.0 {
        let l = l2_leverage(a);
        return Ok(ScoreVector::new(l.values().to_vec(), ScoreKind::LewisWeight, Some(2.0)));
    }
    let f = orthonormal_basis(a);
    let (n, r) = (f.nrows(), f.rank());
    if r == 0 {
        return Err(Error::Singular("zero matrix has no Lewis weights".into()));
    }
    let mut w: Vec<f64> = (0..n).map(|i| dot(f.q_row(i), f.q_row(i))).collect();
    let expo = 1.0 - 2.0 / p;
    for _ in 0..opts.iters {
        let mut m = DMatrix::<f64>::zeros(r, r);
        for (j, wj) in w.iter().enumerate() {
            if *wj <= 0.0 {
                continue;
            }
            let s = wj.powf(expo);
            let q = f.q_row(j);
            for x in 0..r {
                for y in 0..r {
                    m[(x, y)] += s * q[x] * q[y];
                }
            }
        }
        let inv = m
            .cholesky()
            .ok_or_else(|| Error::Singular("reweighted Gram matrix is not positive definite".into()))?
            .inverse();
        let mut change = 0.0f64;
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let q = DVector::from_column_slice(f.q_row(i));
                let lev = q.dot(&(&inv * &q)).max(0.0);
                let v = lev.powf(p / 2.0);
                if w[i] > 0.0 {
                    change = change.max((v - w[i]).abs() / w[i]);
                }
                v
            })
            .collect();
        w = next;
        if change < opts.tol {
            return Ok(ScoreVector::new(w, ScoreKind::LewisWeight, Some(p)).with_tol(opts.tol));
        }
    }
    Err(Error::NonConvergence {
        iters: opts.iters,
        lower: 0.0,
        upper: w.iter().sum(),
    })
}
