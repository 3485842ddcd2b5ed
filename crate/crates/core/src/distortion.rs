//! Search-based estimates of `sup_x |f_w(SAx) - f(Ax)| / f(Ax)` and rank checks.
//!
//! Every estimate here is a lower bound on the true supremum except the grid
//! sweep for `d <= 3` (certified up to grid resolution) and the closed form for
//! the squared ℓ2 loss.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, rank, DenseMatrix, OrthonormalFactor, DEFAULT_RANK_TOL};
use crate::sampling::{Loss, WeightedSample};
use crate::seed;

/// Directions whose full loss falls below this are skipped.
const DEGENERATE_LOSS: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    RandomDirections,
    MultistartAscent,
    GridCertified,
    ExactL2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub max_ratio: f64,
    pub witness: Vec<f64>,
    pub strategy: Strategy,
    pub evaluations: usize,
    pub certified: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid_resolution: Option<usize>,
    /// Directions skipped because `f(Ax)` vanished there.
    #[serde(default)]
    pub skipped: usize,
    /// More than half of the probed directions were skipped.
    #[serde(default)]
    pub one_sided: bool,
}

impl DistortionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full and sampled objectives with their gradients.
struct Evaluator<'a> {
    a: &'a DenseMatrix,
    rows: Vec<f64>,
    weights: Vec<f64>,
    loss: Loss,
}

struct Eval {
    full: f64,
    sampled: f64,
}

impl Eval {
    fn ratio(&self) -> Option<f64> {
        (self.full >= DEGENERATE_LOSS).then(|| (self.sampled - self.full).abs() / self.full)
    }
}

impl<'a> Evaluator<'a> {
    fn new(a: &'a DenseMatrix, sample: &WeightedSample, loss: Loss) -> Result<Self> {
        loss.validate()?;
        if sample.source_rows() != a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "sample drawn from {} rows, matrix has {}",
                sample.source_rows(),
                a.nrows()
            )));
        }
        let d = a.ncols();
        let mut rows = Vec::with_capacity(sample.len() * d);
        for e in sample.entries() {
            rows.extend_from_slice(a.row(e.index));
        }
        Ok(Self {
            a,
            rows,
            weights: sample.weights(),
            loss,
        })
    }

    fn d(&self) -> usize {
        self.a.ncols()
    }

    fn eval(&self, x: &[f64]) -> Eval {
        let loss = self.loss;
        let full = self.a.rows_iter().map(|r| loss.value(dot(r, x))).sum();
        let sampled = self
            .rows
            .chunks_exact(self.d())
            .zip(&self.weights)
            .map(|(r, w)| w * loss.value(dot(r, x)))
            .sum();
        Eval { full, sampled }
    }

    /// Value and gradient of the ratio at `x`, or `None` where `f(Ax)` vanishes.
    fn ratio_grad(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let d = self.d();
        let loss = self.loss;
        let mut full = 0.0;
        let mut gfull = vec![0.0; d];
        for r in self.a.rows_iter() {
            let t = dot(r, x);
            full += loss.value(t);
            let dh = loss.derivative(t);
            if dh != 0.0 {
                gfull.iter_mut().zip(r).for_each(|(g, v)| *g += dh * v);
            }
        }
        if full < DEGENERATE_LOSS {
            return None;
        }
        let mut sampled = 0.0;
        let mut gs = vec![0.0; d];
        for (r, w) in self.rows.chunks_exact(d).zip(&self.weights) {
            let t = dot(r, x);
            sampled += w * loss.value(t);
            let dh = w * loss.derivative(t);
            if dh != 0.0 {
                gs.iter_mut().zip(r).for_each(|(g, v)| *g += dh * v);
            }
        }
        let diff = sampled - full;
        let ratio = diff.abs() / full;
        let sgn = if diff == 0.0 { 0.0 } else { diff.signum() };
        let grad = gs
            .iter()
            .zip(&gfull)
            .map(|(s, f)| (sgn * (s - f) - ratio * f) / full)
            .collect();
        Some((ratio, grad))
    }
}

/// The ratio `|f_w(SAx) - f(Ax)| / f(Ax)` at `x`; `None` if `f(Ax)` vanishes.
pub fn ratio_at(a: &DenseMatrix, sample: &WeightedSample, loss: Loss, x: &[f64]) -> Result<Option<f64>> {
    a.check_dim(x)?;
    Ok(Evaluator::new(a, sample, loss)?.eval(x).ratio())
}

fn gaussian_direction(rng: &mut impl rand::Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Running maximum with ties going to the earliest candidate.
struct Best {
    ratio: f64,
    witness: Vec<f64>,
    evaluations: usize,
    skipped: usize,
    seen: usize,
}

impl Best {
    fn new() -> Self {
        Self {
            ratio: f64::NEG_INFINITY,
            witness: Vec::new(),
            evaluations: 0,
            skipped: 0,
            seen: 0,
        }
    }

    fn offer(&mut self, r: Option<f64>, x: &[f64]) {
        self.evaluations += 1;
        self.seen += 1;
        match r {
            Some(r) if r > self.ratio => {
                self.ratio = r;
                self.witness = x.to_vec();
            }
            Some(_) => {}
            None => self.skipped += 1,
        }
    }

    fn finish(self, strategy: Strategy, seed: u64, grid: Option<usize>) -> Result<DistortionReport> {
        if self.witness.is_empty() {
            return Err(Error::InvalidArgument(
                "every probed direction has zero full loss".into(),
            ));
        }
        Ok(DistortionReport {
            max_ratio: self.ratio,
            witness: self.witness,
            strategy,
            evaluations: self.evaluations,
            certified: strategy == Strategy::GridCertified,
            seed,
            grid_resolution: grid,
            skipped: self.skipped,
            one_sided: 2 * self.skipped > self.seen,
        })
    }
}

/// Maximum ratio over `num_dirs` Gaussian directions.
pub fn distortion_random(
    a: &DenseMatrix,
    sample: &WeightedSample,
    loss: Loss,
    num_dirs: usize,
    seed: u64,
) -> Result<DistortionReport> {
    if num_dirs == 0 {
        return Err(Error::InvalidArgument("num_dirs must be >= 1".into()));
    }
    let ev = Evaluator::new(a, sample, loss)?;
    let mut rng = seed::rng(seed);
    let mut best = Best::new();
    for _ in 0..num_dirs {
        let mut x = gaussian_direction(&mut rng, a.ncols());
        if loss.is_homogeneous() {
            normalize(&mut x);
        }
        best.offer(ev.eval(&x).ratio(), &x);
    }
    best.finish(Strategy::RandomDirections, seed, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub restarts: usize,
    pub steps: usize,
    /// Initial step `c` in the `c / sqrt(k)` schedule, relative to `||x||`.
    pub step: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            steps: 40,
            step: 0.5,
        }
    }
}

/// Projected (sub)gradient ascent on the ratio from `restarts` Gaussian starts,
/// plus the witness of `warm` when given. Never reports less than `warm`.
pub fn distortion_ascent(
    a: &DenseMatrix,
    sample: &WeightedSample,
    loss: Loss,
    opts: AscentOptions,
    seed: u64,
    warm: Option<&DistortionReport>,
) -> Result<DistortionReport> {
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("ascent needs restarts >= 1".into()));
    }
    let ev = Evaluator::new(a, sample, loss)?;
    let d = a.ncols();
    let mut rng = seed::rng(seed);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(opts.restarts + 1);
    if let Some(w) = warm {
        a.check_dim(&w.witness)?;
        starts.push(w.witness.clone());
    }
    for _ in 0..opts.restarts {
        let mut x = gaussian_direction(&mut rng, d);
        if loss.is_homogeneous() {
            normalize(&mut x);
        }
        starts.push(x);
    }

    let homogeneous = loss.is_homogeneous();
    let mut best = Best::new();
    for start in starts {
        let mut x = start;
        let Some((mut r, mut g)) = ev.ratio_grad(&x) else {
            best.offer(None, &x);
            continue;
        };
        best.offer(Some(r), &x);
        let mut c = opts.step;
        for k in 1..=opts.steps {
            if homogeneous {
                // Ratio is scale-free: drop the radial component.
                let xx = dot(&x, &x);
                let gx = dot(&g, &x);
                g.iter_mut().zip(&x).for_each(|(gv, xv)| *gv -= gx / xx * xv);
            }
            let gn = dot(&g, &g).sqrt();
            if gn == 0.0 || !gn.is_finite() {
                break;
            }
            let xn = dot(&x, &x).sqrt().max(1.0);
            let mut eta = c / (k as f64).sqrt() * xn / gn;
            let mut moved = false;
            for _ in 0..12 {
                let mut cand: Vec<f64> = x.iter().zip(&g).map(|(xv, gv)| xv + eta * gv).collect();
                if homogeneous {
                    normalize(&mut cand);
                }
                best.evaluations += 1;
                if let Some((cr, cg)) = ev.ratio_grad(&cand) {
                    if cr > r {
                        x = cand;
                        r = cr;
                        g = cg;
                        moved = true;
                        break;
                    }
                }
                eta *= 0.5;
            }
            if moved {
                if r > best.ratio {
                    best.ratio = r;
                    best.witness = x.clone();
                }
            } else {
                c *= 0.25;
                if c < 1e-10 {
                    break;
                }
            }
        }
    }
    best.finish(Strategy::MultistartAscent, seed, None)
}

/// Random probes followed by ascent warm-started from the best probe.
/// Sub-seeds are `derive_seed(seed, 0)` and `derive_seed(seed, 1)`.
pub fn estimate_distortion(
    a: &DenseMatrix,
    sample: &WeightedSample,
    loss: Loss,
    num_dirs: usize,
    opts: AscentOptions,
    seed: u64,
) -> Result<DistortionReport> {
    let probe = distortion_random(a, sample, loss, num_dirs, seed::derive_seed(seed, 0))?;
    let mut rep = distortion_ascent(a, sample, loss, opts, seed::derive_seed(seed, 1), Some(&probe))?;
    rep.evaluations += probe.evaluations;
    rep.skipped += probe.skipped;
    rep.one_sided = rep.one_sided || probe.one_sided;
    rep.seed = seed;
    Ok(rep)
}

/// Smallest accepted grid resolution for each dimension.
pub fn min_grid_resolution(d: usize) -> usize {
    match d {
        1 => 2,
        2 => 100_000,
        _ => 1_000_000,
    }
}

/// Unit directions: `{+1, -1}` for `d = 1`, equally spaced angles for `d = 2`,
/// a Fibonacci lattice on the sphere for `d = 3`.
pub fn grid_directions(d: usize, resolution: usize) -> Result<Vec<Vec<f64>>> {
    match d {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 => Ok((0..resolution)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / resolution as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..resolution)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / resolution as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let th = golden * k as f64;
                    vec![rho * th.cos(), rho * th.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::InvalidArgument(format!("grid sweep needs d <= 3, got {d}"))),
    }
}

/// Exhaustive sweep over a grid of unit directions (`d <= 3`).
pub fn grid_certify(
    a: &DenseMatrix,
    sample: &WeightedSample,
    loss: Loss,
    resolution: usize,
) -> Result<DistortionReport> {
    let d = a.ncols();
    if d > 3 {
        return Err(Error::InvalidArgument(format!("grid sweep needs d <= 3, got {d}")));
    }
    if resolution < min_grid_resolution(d) {
        return Err(Error::InvalidArgument(format!(
            "grid resolution {resolution} is below {} for d = {d}",
            min_grid_resolution(d)
        )));
    }
    let ev = Evaluator::new(a, sample, loss)?;
    let mut best = Best::new();
    for x in grid_directions(d, resolution)? {
        best.offer(ev.eval(&x).ratio(), &x);
    }
    let used = if d == 1 { 2 } else { resolution };
    best.finish(Strategy::GridCertified, 0, Some(used))
}

/// Closed form for `h = |t|^2`: with `A = QR`, the ratio over `x` is the
/// largest `|eig(Q_S^T W Q_S - I)|`.
pub fn l2_distortion_exact(factor: &OrthonormalFactor, sample: &WeightedSample) -> Result<DistortionReport> {
    if sample.source_rows() != factor.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "sample drawn from {} rows, basis has {}",
            sample.source_rows(),
            factor.nrows()
        )));
    }
    let r = factor.rank();
    if r == 0 {
        return Err(Error::InvalidArgument("zero matrix has no ℓ2 distortion".into()));
    }
    let mut m = DMatrix::<f64>::zeros(r, r);
    for e in sample.entries() {
        let q = factor.q_row(e.index);
        for i in 0..r {
            let wi = e.weight * q[i];
            for j in i..r {
                m[(i, j)] += wi * q[j];
            }
        }
    }
    for i in 0..r {
        m[(i, i)] -= 1.0;
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    let eig = SymmetricEigen::new(m);
    let (k, val) = eig.eigenvalues.iter().enumerate().fold(
        (0, -1.0),
        |acc, (k, v)| if v.abs() > acc.1 { (k, v.abs()) } else { acc },
    );
    let y: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    Ok(DistortionReport {
        max_ratio: val,
        witness: factor.to_parameter(&y),
        strategy: Strategy::ExactL2,
        evaluations: 1,
        certified: true,
        seed: sample.seed(),
        grid_resolution: None,
        skipped: 0,
        one_sided: false,
    })
}

/// Per-block rank checks with the full-block ranks computed once.
pub struct RankChecker {
    blocks: Vec<BlockInfo>,
    n: usize,
    tol: f64,
}

struct BlockInfo {
    rows: Range<usize>,
    cols: Vec<usize>,
    full_rank: usize,
}

impl RankChecker {
    /// `blocks` partitions the rows; `None` treats the whole matrix as one block.
    pub fn new(a: &DenseMatrix, blocks: Option<&[Range<usize>]>, tol: f64) -> Result<Self> {
        let whole = [0..a.nrows()];
        let blocks = blocks.unwrap_or(&whole);
        let mut covered = vec![false; a.nrows()];
        let mut info = Vec::with_capacity(blocks.len());
        for b in blocks {
            if b.is_empty() || b.end > a.nrows() {
                return Err(Error::InvalidArgument(format!("invalid block {b:?}")));
            }
            for i in b.clone() {
                if std::mem::replace(&mut covered[i], true) {
                    return Err(Error::InvalidArgument(format!("row {i} is in two blocks")));
                }
            }
            let cols: Vec<usize> = (0..a.ncols())
                .filter(|&j| b.clone().any(|i| a.get(i, j) != 0.0))
                .collect();
            let full_rank = if cols.is_empty() {
                0
            } else {
                let rows: Vec<usize> = b.clone().collect();
                rank(&a.select_rows(&rows)?.select_cols(&cols)?, tol)
            };
            info.push(BlockInfo {
                rows: b.clone(),
                cols,
                full_rank,
            });
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::InvalidArgument("blocks do not cover every row".into()));
        }
        Ok(Self {
            blocks: info,
            n: a.nrows(),
            tol,
        })
    }

    /// One flag per block: does the sample keep that block's rank?
    pub fn check(&self, a: &DenseMatrix, sample: &WeightedSample) -> Result<Vec<bool>> {
        if a.nrows() != self.n || sample.source_rows() != self.n {
            return Err(Error::DimensionMismatch(
                "sample, matrix and blocks disagree on n".into(),
            ));
        }
        let idx = sample.indices();
        self.blocks
            .iter()
            .map(|b| {
                if b.full_rank == 0 {
                    return Ok(true);
                }
                let rows: Vec<usize> = idx.iter().copied().filter(|i| b.rows.contains(i)).collect();
                if rows.len() < b.full_rank {
                    return Ok(false);
                }
                let sub = a.select_rows(&rows)?.select_cols(&b.cols)?;
                Ok(rank(&sub, self.tol) == b.full_rank)
            })
            .collect()
    }
}

/// One-shot form of [`RankChecker`].
pub fn rank_preserved(
    a: &DenseMatrix,
    sample: &WeightedSample,
    blocks: Option<&[Range<usize>]>,
    tol: Option<f64>,
) -> Result<Vec<bool>> {
    RankChecker::new(a, blocks, tol.unwrap_or(DEFAULT_RANK_TOL))?.check(a, sample)
}
