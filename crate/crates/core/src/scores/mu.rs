//! Heuristic lower bounds on the μ-complexity
//! `sup_x ||Ax||_p^p / ||(Ax)^-||_p^p`.
//!
//! The exact program is nonconvex. We run normalized subgradient descent on the
//! unit sphere, minimizing the smaller of the negative and positive mass
//! fractions, from the coordinate directions, their negations, and Gaussian
//! starts. The result is a lower bound on the true μ.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::seed;

/// A mass fraction below this (relative to the total) flags the data as one-sided.
const ONE_SIDED_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    /// `None` when some explored direction had (numerically) no negative mass.
    pub mu_hat: Option<f64>,
    pub witness: Vec<f64>,
    pub restarts_used: usize,
    pub p: f64,
}

impl MuEstimate {
    pub fn is_unbounded(&self) -> bool {
        self.mu_hat.is_none()
    }
}

struct Masses {
    neg: f64,
    pos: f64,
}

fn masses(a: &DenseMatrix, x: &[f64], p: f64) -> Masses {
    let mut neg = 0.0;
    let mut pos = 0.0;
    for r in a.rows_iter() {
        let t = dot(r, x);
        let h = if p == 1.0 { t.abs() } else { t.abs().powf(p) };
        if t < 0.0 {
            neg += h;
        } else {
            pos += h;
        }
    }
    Masses { neg, pos }
}

/// `||Ax||_p^p / ||(Ax)^-||_p^p` at `x` (infinite when the negative part vanishes).
pub fn mu_ratio(a: &DenseMatrix, x: &[f64], p: f64) -> f64 {
    let m = masses(a, x, p);
    (m.neg + m.pos) / m.neg
}

/// Gradient of the negative-mass fraction `neg / (neg + pos)` at `x`.
fn fraction_grad(a: &DenseMatrix, x: &[f64], p: f64, m: &Masses) -> Vec<f64> {
    let total = m.neg + m.pos;
    let frac = m.neg / total;
    let mut g = vec![0.0; x.len()];
    for r in a.rows_iter() {
        let t = dot(r, x);
        if t == 0.0 {
            continue;
        }
        let dh = p * t.abs().powf(p - 1.0);
        // d neg / dx for t < 0 is -dh * a; d total / dx is sign(t) dh a.
        let coef = if t < 0.0 { -dh - frac * (-dh) } else { -frac * dh };
        for (gk, rk) in g.iter_mut().zip(r) {
            *gk += coef * rk;
        }
    }
    g.iter_mut().for_each(|v| *v /= total);
    g
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lower-bound estimate of μ(A) from `restarts` Gaussian starts plus the
/// `2d` signed coordinate directions, each refined by `steps` descent steps.
pub fn mu_estimate(a: &DenseMatrix, p: f64, restarts: usize, steps: usize, seed: u64) -> Result<MuEstimate> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [1, 2], got {p}")));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("mu_estimate needs restarts >= 1".into()));
    }
    if a.as_slice().iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidArgument("mu is undefined for the zero matrix".into()));
    }
    let d = a.ncols();
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(2 * d + restarts);
    for j in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[j] = s;
            starts.push(e);
        }
    }
    let mut rng = seed::rng(seed);
    for _ in 0..restarts {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if normalize(&mut v) == 0.0 {
            v[0] = 1.0;
        }
        starts.push(v);
    }

    // Track the direction with the smallest minority fraction.
    let mut best_frac = f64::INFINITY;
    let mut best_x = starts[0].clone();
    let mut consider = |x: &[f64], m: &Masses| -> bool {
        let total = m.neg + m.pos;
        if total <= 0.0 {
            return false;
        }
        // Orient x so that the negative part is the minority.
        let (frac, oriented): (f64, Vec<f64>) = if m.neg <= m.pos {
            (m.neg / total, x.to_vec())
        } else {
            (m.pos / total, x.iter().map(|v| -v).collect())
        };
        if frac < best_frac {
            best_frac = frac;
            best_x = oriented;
        }
        frac < ONE_SIDED_REL
    };

    let restarts_used = starts.len();
    'outer: for start in starts {
        let mut x = start;
        let mut m = masses(a, &x, p);
        if consider(&x, &m) {
            break 'outer;
        }
        let mut step = 0.5;
        for k in 1..=steps {
            let total = m.neg + m.pos;
            if total <= 0.0 {
                break;
            }
            // Minimize the minority fraction: flip the gradient sign if pos is the minority.
            let mut g = fraction_grad(a, &x, p, &m);
            if m.neg > m.pos {
                g.iter_mut().for_each(|v| *v = -*v);
            }
            let gx = dot(&g, &x);
            g.iter_mut().zip(&x).for_each(|(gv, xv)| *gv -= gx * xv);
            if normalize(&mut g) == 0.0 {
                break;
            }
            let cur = m.neg.min(m.pos) / total;
            let mut eta = step / (k as f64).sqrt();
            let mut moved = false;
            for _ in 0..20 {
                let mut cand: Vec<f64> = x.iter().zip(&g).map(|(xv, gv)| xv - eta * gv).collect();
                normalize(&mut cand);
                let cm = masses(a, &cand, p);
                let ct = cm.neg + cm.pos;
                if ct > 0.0 && cm.neg.min(cm.pos) / ct < cur {
                    x = cand;
                    m = cm;
                    moved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !moved {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
                continue;
            }
            if consider(&x, &m) {
                break 'outer;
            }
        }
    }

    let ratio = mu_ratio(a, &best_x, p);
    let mu_hat = if best_frac < ONE_SIDED_REL || !ratio.is_finite() {
        None
    } else {
        Some(ratio)
    };
    Ok(MuEstimate {
        mu_hat,
        witness: best_x,
        restarts_used,
        p,
    })
}
