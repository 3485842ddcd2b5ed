//! Exact per-row ℓp sensitivities.
//!
//! The sensitivity of row `i` is `sup_x |a_i x|^p / ||Ax||_p^p`, which equals
//! `1 / min { ||Ax||_p^p : a_i x = 1 }`. Everything is solved in the whitened
//! coordinates `Ax = Qy` of an orthonormal basis, so the problems are well
//! conditioned and rank deficiency is harmless. Rows equal up to sign are
//! merged into one row with a multiplicity before solving.
//!
//! * `p = 1`: the minimization is a linear program. It is solved exactly by
//!   pivoting between vertices of the affine slice (at a vertex, `r - 1`
//!   residuals vanish); each vertex carries a dual vector whose feasibility
//!   certifies optimality.
//! * `1 < p <= 2`: iteratively reweighted least squares with a damped Newton
//!   step. Every weighted solve also yields a dual-feasible point, so each
//!   iterate is bracketed by a lower bound from Hölder's inequality.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::{ScoreKind, ScoreVector};
use crate::error::{Error, Result};
use crate::matrix::{dot, orthonormal_basis, DenseMatrix, OrthonormalFactor};

/// Relative smoothing floor on residual magnitudes in the reweighting.
const SMOOTHING_FLOOR: f64 = 1e-12;
/// Plateau rule: stop after this many consecutive iterations with relative
/// objective change below `PLATEAU_REL`.
const PLATEAU_WINDOW: usize = 10;
const PLATEAU_REL: f64 = 1e-9;
/// Dual slack allowed when certifying a p = 1 vertex.
const DUAL_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Target relative duality gap.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 10_000,
        }
    }
}

/// Exact sensitivity solver bound to one matrix and one `p`.
pub struct SensitivityOracle<'a> {
    a: &'a DenseMatrix,
    factor: OrthonormalFactor,
    p: f64,
    opts: OracleOptions,
    /// Basis rows of the distinct nonzero rows, `m x r` row-major.
    uq: Vec<f64>,
    mult: Vec<f64>,
    /// Distinct-row index of each input row (`None` for zero rows).
    group: Vec<Option<usize>>,
}

impl<'a> SensitivityOracle<'a> {
    pub fn new(a: &'a DenseMatrix, p: f64, opts: OracleOptions) -> Result<Self> {
        check_p(p)?;
        if !(opts.tol > 0.0) || opts.max_iters == 0 {
            return Err(Error::InvalidArgument("oracle needs tol > 0 and max_iters >= 1".into()));
        }
        let factor = orthonormal_basis(a);
        let r = factor.rank();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut uq = Vec::new();
        let mut mult = Vec::new();
        let mut group = Vec::with_capacity(a.nrows());
        for i in 0..a.nrows() {
            if r == 0 || a.row(i).iter().all(|v| *v == 0.0) {
                group.push(None);
                continue;
            }
            let key = sign_canonical_key(a.row(i));
            let g = *index.entry(key).or_insert_with(|| {
                uq.extend_from_slice(factor.q_row(i));
                mult.push(0.0);
                mult.len() - 1
            });
            mult[g] += 1.0;
            group.push(Some(g));
        }
        Ok(Self {
            a,
            factor,
            p,
            opts,
            uq,
            mult,
            group,
        })
    }

    pub fn factor(&self) -> &OrthonormalFactor {
        &self.factor
    }

    /// Sensitivity of row `i`, in `[0, 1]`.
    pub fn row(&self, i: usize) -> Result<f64> {
        if i >= self.a.nrows() {
            return Err(Error::InvalidArgument(format!("row {i} out of range")));
        }
        match self.group[i] {
            None => Ok(0.0),
            Some(g) => self.solve_group(g),
        }
    }

    fn solve_group(&self, g: usize) -> Result<f64> {
        let opt = if self.p == 1.0 {
            self.solve_l1(g)?
        } else {
            self.solve_smooth(g)?
        };
        Ok((1.0 / opt).min(1.0))
    }

    /// All rows; each distinct row (up to sign) is solved once.
    pub fn all(&self) -> Result<ScoreVector> {
        let per_group = (0..self.mult.len())
            .map(|g| self.solve_group(g))
            .collect::<Result<Vec<f64>>>()?;
        let values = self.group.iter().map(|g| g.map_or(0.0, |g| per_group[g])).collect();
        Ok(ScoreVector::new(values, ScoreKind::LpSensitivityExact, Some(self.p)).with_tol(self.opts.tol))
    }

    fn rank(&self) -> usize {
        self.factor.rank()
    }

    fn q(&self, g: usize) -> &[f64] {
        let r = self.rank();
        &self.uq[g * r..(g + 1) * r]
    }

    fn residuals(&self, y: &[f64], out: &mut [f64]) {
        for (g, o) in out.iter_mut().enumerate() {
            *o = dot(self.q(g), y);
        }
    }

    fn objective(&self, res: &[f64]) -> f64 {
        let p = self.p;
        let it = res.iter().zip(&self.mult);
        if p == 1.0 {
            it.map(|(v, m)| m * v.abs()).sum()
        } else if p == 2.0 {
            it.map(|(v, m)| m * v * v).sum()
        } else {
            it.map(|(v, m)| m * v.abs().powf(p)).sum()
        }
    }

    /// Damped Newton on `sum m (r^2 + eps^2)^{p/2}` for `1 < p <= 2`, with `eps`
    /// shrunk toward the smoothing floor. Returns the optimal objective.
    ///
    /// Smoothing keeps the curvature of near-zero residuals at `eps^{p-2}`
    /// rather than `(p-1) |r|^{p-2}`, so one step length suits every row even
    /// when `p` is close to 1.
    fn solve_smooth(&self, i: usize) -> Result<f64> {
        let (n, r, p) = (self.mult.len(), self.rank(), self.p);
        let qi = self.q(i);
        let qq = dot(qi, qi);
        let mut y: Vec<f64> = qi.iter().map(|v| v / qq).collect();
        let mut res = vec![0.0; n];
        self.residuals(&y, &mut res);
        let scale = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = SMOOTHING_FLOOR * scale;
        let mut eps = if p == 2.0 { floor } else { 1e-2 * scale };
        let smoothed = |res: &[f64], eps: f64| -> f64 {
            res.iter()
                .zip(&self.mult)
                .map(|(v, m)| m * (v * v + eps * eps).powf(0.5 * p))
                .sum()
        };
        let mut obj = self.objective(&res);
        let mut lower = 0.0f64;
        let dual_exp = p / (p - 1.0);
        let mut plateau = 0;
        let mut trial_res = vec![0.0; n];

        for _ in 0..self.opts.max_iters {
            let mut w = vec![0.0; n];
            let mut curv = vec![0.0; n];
            let mut grad = vec![0.0; r];
            for (j, (v, m)) in res.iter().zip(&self.mult).enumerate() {
                let s = v * v + eps * eps;
                w[j] = m * s.powf(0.5 * p - 1.0);
                curv[j] = w[j] * ((p - 1.0) * v * v + eps * eps) / s;
                let qj = self.q(j);
                for a in 0..r {
                    grad[a] += w[j] * v * qj[a];
                }
            }

            // Any u with sum_j u_j q_j = q_i gives, by Hölder with the
            // multiplicities, 1 <= ||u m^{-1/p}||_q (sum m |q y|^p)^{1/p}.
            // Two candidates: the reweighted least-squares multipliers, and the
            // per-row gradient shifted along the slice normal.
            let z = solve_spd(self.gram(&w), qi)?;
            let from_wls: Vec<f64> = (0..n).map(|j| w[j] * dot(self.q(j), &z)).collect();
            let lam = dot(qi, &grad) / qq;
            let shift: Vec<f64> = qi.iter().zip(&grad).map(|(a, g)| lam * a - g).collect();
            let from_grad: Vec<f64> = (0..n)
                .map(|j| (w[j] * res[j] + self.mult[j] * dot(self.q(j), &shift)) / lam)
                .collect();
            for mut u in [from_wls, from_grad] {
                self.refine_dual(&mut u, qi);
                let uq = self.dual_norm(&u, dual_exp);
                if uq.is_finite() && uq > 0.0 {
                    lower = lower.max(uq.powf(-p));
                }
            }
            if (obj - lower) / obj <= self.opts.tol {
                return Ok(obj);
            }

            // Newton step on the slice q_i y = 1.
            let h = self.gram(&curv);
            let hg = solve_spd(h.clone(), &grad)?;
            let hq = solve_spd(h, qi)?;
            let nu = dot(qi, &hg) / dot(qi, &hq);
            let dir: Vec<f64> = hg.iter().zip(&hq).map(|(a, b)| nu * b - a).collect();
            let slope = dot(&grad, &dir);
            let fe = smoothed(&res, eps);
            let mut t = 1.0;
            let mut accepted = None;
            if slope < 0.0 {
                for _ in 0..60 {
                    let cand: Vec<f64> = y.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                    self.residuals(&cand, &mut trial_res);
                    if smoothed(&trial_res, eps) <= fe + 1e-4 * t * p * slope {
                        accepted = Some(cand);
                        break;
                    }
                    t *= 0.5;
                }
            }
            let stalled = accepted.is_none() || -slope * p <= 1e-13 * fe;
            if let Some(cand) = accepted {
                y = cand;
                std::mem::swap(&mut res, &mut trial_res);
            }
            if stalled || -slope * p <= 1e-6 * fe {
                if eps > floor {
                    eps = (eps * 1e-2).max(floor);
                    plateau = 0;
                    continue;
                }
                if stalled {
                    // No decrease at the final smoothing level: numerically converged.
                    return Ok(obj.min(self.objective(&res)));
                }
            }
            let cobj = self.objective(&res);
            let rel = (obj - cobj) / obj;
            obj = obj.min(cobj);
            if eps <= floor && rel.abs() < PLATEAU_REL {
                plateau += 1;
                if plateau >= PLATEAU_WINDOW {
                    return Ok(obj);
                }
            } else {
                plateau = 0;
            }
        }
        Err(Error::NonConvergence {
            iters: self.opts.max_iters,
            lower: 1.0 / obj,
            upper: if lower > 0.0 { 1.0 / lower } else { 1.0 },
        })
    }

    /// Pushes `u` back onto `sum_j u_j q_j = target`; `sum_j m_j q_j q_j^T = I`
    /// makes one correction exact up to rounding.
    fn refine_dual(&self, u: &mut [f64], target: &[f64]) {
        let r = self.rank();
        for _ in 0..2 {
            let mut e = target.to_vec();
            for (j, uj) in u.iter().enumerate() {
                let qj = self.q(j);
                for a in 0..r {
                    e[a] -= uj * qj[a];
                }
            }
            for (j, uj) in u.iter_mut().enumerate() {
                *uj += self.mult[j] * dot(self.q(j), &e);
            }
        }
    }

    /// `||u m^{-1/p}||_q`, scaled by the largest entry so that `q` near
    /// infinity neither underflows nor overflows.
    fn dual_norm(&self, u: &[f64], q: f64) -> f64 {
        let v: Vec<f64> = u
            .iter()
            .zip(&self.mult)
            .map(|(uj, mj)| uj.abs() * mj.powf(-1.0 / self.p))
            .collect();
        let top = v.iter().fold(0.0f64, |m, x| m.max(*x));
        if top == 0.0 {
            return 0.0;
        }
        top * v.iter().map(|x| (x / top).powf(q)).sum::<f64>().powf(1.0 / q)
    }

    /// `sum_j w_j q_j q_j^T`.
    fn gram(&self, w: &[f64]) -> DMatrix<f64> {
        let r = self.rank();
        let mut m = DMatrix::<f64>::zeros(r, r);
        for (j, wj) in w.iter().enumerate() {
            let qj = self.q(j);
            for a in 0..r {
                let s = wj * qj[a];
                for b in a..r {
                    m[(a, b)] += s * qj[b];
                }
            }
        }
        for a in 0..r {
            for b in 0..a {
                m[(a, b)] = m[(b, a)];
            }
        }
        m
    }

    /// Exact p = 1 solve by vertex pivoting. Returns the optimal objective.
    fn solve_l1(&self, i: usize) -> Result<f64> {
        let (n, r) = (self.mult.len(), self.rank());
        let mult = &self.mult;
        let qi = self.q(i);
        let qq = dot(qi, qi);

        // Start from the ℓ2 solution and pick the r - 1 smallest independent residuals.
        let y2: Vec<f64> = qi.iter().map(|v| v / qq).collect();
        let mut res = vec![0.0; n];
        self.residuals(&y2, &mut res);
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| res[a].abs().total_cmp(&res[b].abs()).then(a.cmp(&b)));
        let mut basis: Vec<Vec<f64>> = vec![qi.iter().map(|v| v / qq.sqrt()).collect()];
        let mut zset: Vec<usize> = Vec::with_capacity(r.saturating_sub(1));
        for &j in &order {
            if zset.len() + 1 == r {
                break;
            }
            let qj = self.q(j);
            let nj = dot(qj, qj).sqrt();
            if nj == 0.0 {
                continue;
            }
            let mut v = qj.to_vec();
            for b in &basis {
                let c = dot(&v, b);
                for (vk, bk) in v.iter_mut().zip(b) {
                    *vk -= c * bk;
                }
            }
            let nv = dot(&v, &v).sqrt();
            if nv > 1e-8 * nj {
                v.iter_mut().for_each(|x| *x /= nv);
                basis.push(v);
                zset.push(j);
            }
        }
        if zset.len() + 1 != r {
            return Err(Error::Singular("could not build an initial vertex".into()));
        }

        let mut in_z = vec![false; n];
        for &j in &zset {
            in_z[j] = true;
        }
        let mut last_degenerate = false;
        let mut best_lower = 0.0f64;
        let mut best_obj = f64::INFINITY;
        let mut sdir = vec![0.0; n];

        for iter in 0..self.opts.max_iters {
            // Vertex: q_i y = 1, q_z y = 0.
            let bmat = DMatrix::from_fn(
                r,
                r,
                |row, col| {
                    if row == 0 {
                        qi[col]
                    } else {
                        self.q(zset[row - 1])[col]
                    }
                },
            );
            let lu = bmat.clone().lu();
            let mut e0 = DVector::zeros(r);
            e0[0] = 1.0;
            let y = lu
                .solve(&e0)
                .ok_or_else(|| Error::Singular("vertex system is singular".into()))?;
            self.residuals(y.as_slice(), &mut res);
            for &j in &zset {
                res[j] = 0.0;
            }
            let scale = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let deg_tol = 1e-12 * scale;
            let obj = self.objective(&res);
            best_obj = best_obj.min(obj);

            // Dual: B^T (m_i - lam, g_z) = -sum_{j not in Z, j != i} m_j sign(res_j) q_j.
            // Any feasible y then has lam = sum_j v_j q_j y with |v_j| <= m_j
            // once g is scaled into the box.
            let mut c = DVector::<f64>::zeros(r);
            for j in 0..n {
                if j == i || in_z[j] || res[j].abs() <= deg_tol {
                    continue;
                }
                let s = mult[j] * res[j].signum();
                for (ck, qk) in c.iter_mut().zip(self.q(j)) {
                    *ck -= s * qk;
                }
            }
            let u = bmat
                .transpose()
                .lu()
                .solve(&c)
                .ok_or_else(|| Error::Singular("dual system is singular".into()))?;
            let lam = mult[i] - u[0];
            let viol = |k: usize| u[k].abs() / mult[zset[k - 1]];
            let gmax = (1..r).map(viol).fold(1.0f64, f64::max);
            if lam > 0.0 {
                best_lower = best_lower.max(lam / gmax);
            }
            if gmax <= 1.0 + DUAL_SLACK || (best_obj - best_lower) / best_obj <= self.opts.tol {
                return Ok(obj);
            }

            // More zero residuals than basis rows: pivoting can cycle, so
            // search the edges of the local cone instead.
            if r >= 2 {
                let zeros: Vec<usize> = (0..n).filter(|&j| j != i && res[j].abs() <= deg_tol).collect();
                if zeros.len() + 1 > r {
                    match self.degenerate_edge(i, &zeros, &res)? {
                        Edge::Optimal => return Ok(obj),
                        Edge::Descent { keep, dir } => {
                            self.residuals(&dir, &mut sdir);
                            let mut slope = 0.0;
                            let mut breaks: Vec<(f64, usize, f64)> = Vec::new();
                            let mut is_zero = vec![false; n];
                            for &j in &zeros {
                                is_zero[j] = true;
                            }
                            for j in 0..n {
                                if j == i || keep.contains(&j) {
                                    continue;
                                }
                                let w = mult[j] * sdir[j].abs();
                                if is_zero[j] {
                                    slope += w;
                                    continue;
                                }
                                if sdir[j].abs() <= 1e-14 {
                                    continue;
                                }
                                let t = -res[j] / sdir[j];
                                if t > 0.0 {
                                    slope -= w;
                                    breaks.push((t, j, w));
                                } else {
                                    slope += w;
                                }
                            }
                            let entering = walk_breakpoints(&mut breaks, slope)
                                .ok_or_else(|| Error::Singular("unbounded edge in l1 solve".into()))?;
                            in_z.iter_mut().for_each(|z| *z = false);
                            zset = keep;
                            zset.push(entering.1);
                            for &j in &zset {
                                in_z[j] = true;
                            }
                            last_degenerate = false;
                            continue;
                        }
                        Edge::TooMany => {}
                    }
                }
            }

            // Leaving row: largest dual violation, or the first violation after a degenerate pivot.
            let mut pos = 1;
            if last_degenerate {
                let mut best_idx = usize::MAX;
                for k in 1..r {
                    if viol(k) > 1.0 + DUAL_SLACK && zset[k - 1] < best_idx {
                        best_idx = zset[k - 1];
                        pos = k;
                    }
                }
            } else {
                for k in 2..r {
                    if viol(k) > viol(pos) {
                        pos = k;
                    }
                }
            }
            let leaving = zset[pos - 1];
            let mut ek = DVector::zeros(r);
            ek[pos] = u[pos].signum();
            let v = lu
                .solve(&ek)
                .ok_or_else(|| Error::Singular("edge system is singular".into()))?;
            self.residuals(v.as_slice(), &mut sdir);
            sdir[i] = 0.0;
            for &j in &zset {
                if j != leaving {
                    sdir[j] = 0.0;
                }
            }

            // Exact line search on the piecewise-linear objective along the edge.
            let mut slope = mult[leaving] * sdir[leaving].abs();
            let mut breaks: Vec<(f64, usize, f64)> = Vec::new();
            for j in 0..n {
                if j == i || j == leaving || (in_z[j] && j != leaving) {
                    continue;
                }
                let s = sdir[j];
                if s.abs() <= 1e-14 {
                    continue;
                }
                let w = mult[j] * s.abs();
                let rj = if res[j].abs() <= deg_tol { 0.0 } else { res[j] };
                let t = -rj / s;
                if t < 0.0 || (t == 0.0 && rj.signum() == s.signum() && rj != 0.0) {
                    slope += w;
                } else {
                    slope -= w;
                    breaks.push((t, j, w));
                }
            }
            if slope >= 0.0 {
                // No descent along this edge: the vertex is optimal up to rounding in the dual.
                if (best_obj - best_lower) / best_obj <= 1e-6 {
                    return Ok(obj);
                }
                return Err(Error::NonConvergence {
                    iters: iter,
                    lower: 1.0 / best_obj,
                    upper: if best_lower > 0.0 { 1.0 / best_lower } else { 1.0 },
                });
            }
            let entering = walk_breakpoints(&mut breaks, slope)
                .ok_or_else(|| Error::Singular("unbounded edge in l1 solve".into()))?;
            last_degenerate = entering.0 <= 0.0;
            in_z[leaving] = false;
            in_z[entering.1] = true;
            zset[pos - 1] = entering.1;
        }
        Err(Error::NonConvergence {
            iters: self.opts.max_iters,
            lower: 1.0 / best_obj,
            upper: if best_lower > 0.0 { 1.0 / best_lower } else { 1.0 },
        })
    }
}

enum Edge {
    Optimal,
    Descent { keep: Vec<usize>, dir: Vec<f64> },
    TooMany,
}

/// Upper limit on the edges examined at one degenerate vertex.
const MAX_EDGES: usize = 50_000;

impl SensitivityOracle<'_> {
    /// At a vertex where every row of `zeros` has zero residual, finds the
    /// steepest edge `{v : q_i v = 0, q_j v = 0 for j in keep}` with `|keep| = r - 2`.
    fn degenerate_edge(&self, i: usize, zeros: &[usize], res: &[f64]) -> Result<Edge> {
        let r = self.rank();
        let k = zeros.len();
        let choose = (0..r - 2).fold(1.0f64, |acc, t| acc * (k - t) as f64 / (t + 1) as f64);
        if choose > MAX_EDGES as f64 {
            return Ok(Edge::TooMany);
        }
        let mut is_zero = vec![false; self.mult.len()];
        for &j in zeros {
            is_zero[j] = true;
        }
        let mut g = vec![0.0; r];
        for (j, rj) in res.iter().enumerate() {
            if j == i || is_zero[j] {
                continue;
            }
            let s = self.mult[j] * rj.signum();
            for (gk, qk) in g.iter_mut().zip(self.q(j)) {
                *gk += s * qk;
            }
        }
        let gnorm = dot(&g, &g).sqrt();
        let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        let mut pick: Vec<usize> = (0..r - 2).collect();
        loop {
            let m = DMatrix::from_fn(r, r, |row, col| match row {
                0 => self.q(i)[col],
                _ if row <= r - 2 => self.q(zeros[pick[row - 1]])[col],
                _ => 0.0,
            });
            let svd = m.svd(false, true);
            let smax = svd.singular_values.max();
            let small: Vec<usize> = (0..r).filter(|&t| svd.singular_values[t] <= 1e-9 * smax).collect();
            if small.len() == 1 {
                let vt = svd.v_t.as_ref().expect("right singular vectors");
                let v: Vec<f64> = (0..r).map(|c| vt[(small[0], c)]).collect();
                let lin = dot(&g, &v);
                let mut kink = 0.0;
                for (t, &j) in zeros.iter().enumerate() {
                    if !pick.contains(&t) {
                        kink += self.mult[j] * dot(self.q(j), &v).abs();
                    }
                }
                let slope = kink - lin.abs();
                if slope < -1e-10 * (gnorm + kink) && best.as_ref().is_none_or(|b| slope < b.0) {
                    let dir = if lin > 0.0 { v.iter().map(|x| -x).collect() } else { v };
                    best = Some((slope, pick.iter().map(|&t| zeros[t]).collect(), dir));
                }
            }
            // Next (r - 2)-subset in lexicographic order.
            let mut t = pick.len();
            loop {
                if t == 0 {
                    return Ok(match best {
                        Some((_, keep, dir)) => Edge::Descent { keep, dir },
                        None => Edge::Optimal,
                    });
                }
                t -= 1;
                if pick[t] < k - (pick.len() - t) {
                    pick[t] += 1;
                    for u in t + 1..pick.len() {
                        pick[u] = pick[u - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

/// Walks breakpoints `(t, row, weight)` in increasing `t` (ties by row index),
/// adding twice the weight to the slope at each, and returns the first `(t, row)` at
/// which the slope turns nonnegative.
fn walk_breakpoints(breaks: &mut [(f64, usize, f64)], mut slope: f64) -> Option<(f64, usize)> {
    let cmp = |a: &(f64, usize, f64), b: &(f64, usize, f64)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    // Usually only a handful of breakpoints are crossed: sort small prefixes first.
    let mut start = 0;
    let mut chunk = 32;
    while start < breaks.len() {
        let end = (start + chunk).min(breaks.len());
        if end < breaks.len() {
            breaks[start..].select_nth_unstable_by(end - start - 1, cmp);
        }
        breaks[start..end].sort_unstable_by(cmp);
        for &(t, j, w) in &breaks[start..end] {
            slope += 2.0 * w;
            if slope >= 0.0 {
                return Some((t, j));
            }
        }
        start = end;
        chunk *= 4;
    }
    None
}

fn solve_spd(m: DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let b = DVector::from_column_slice(rhs);
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.solve(&b).iter().copied().collect());
    }
    m.lu()
        .solve(&b)
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Singular("reweighted Gram matrix is singular".into()))
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [1, 2], got {p}")));
    }
    Ok(())
}

fn sign_canonical_key(row: &[f64]) -> Vec<u64> {
    let flip = row.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0);
    row.iter()
        .map(|v| {
            let v = if flip { -v } else { *v };
            if v == 0.0 {
                0u64
            } else {
                v.to_bits()
            }
        })
        .collect()
}

/// `1 / min { ||Ax||_p^p : a_i x = 1 }` for a single row.
pub fn exact_lp_sensitivity_row(a: &DenseMatrix, p: f64, i: usize, tol: f64, max_iters: usize) -> Result<f64> {
    SensitivityOracle::new(a, p, OracleOptions { tol, max_iters })?.row(i)
}

pub fn exact_lp_sensitivities(a: &DenseMatrix, p: f64, tol: f64) -> Result<ScoreVector> {
    SensitivityOracle::new(
        a,
        p,
        OracleOptions {
            tol,
            ..OracleOptions::default()
        },
    )?
    .all()
}
