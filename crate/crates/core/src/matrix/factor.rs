use nalgebra::DMatrix;

use super::DenseMatrix;

/// Default relative threshold on singular values for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Orthonormal basis `Q` (n x r) of the column space of `A`, with `A = Q C`
/// for a full-row-rank `C` (r x d).
///
/// `Q` is stored row-major so that row `i` holds the coordinates of `a_i` in
/// the whitened basis; all leverage-type quantities are functions of these rows.
#[derive(Debug, Clone)]
pub struct OrthonormalFactor {
    n: usize,
    d: usize,
    rank: usize,
    q: Vec<f64>,
    /// `V_r diag(1/sigma)` (d x r, row-major): maps a row `a` to `a V_r / sigma`.
    whiten: Vec<f64>,
    sigma: Vec<f64>,
}

impl OrthonormalFactor {
    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols_input(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Row `i` of `Q`.
    #[inline]
    pub fn q_row(&self, i: usize) -> &[f64] {
        &self.q[i * self.rank..(i + 1) * self.rank]
    }

    pub fn q_data(&self) -> &[f64] {
        &self.q
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    /// Coordinates of an arbitrary (possibly out-of-sample) row in the basis,
    /// i.e. the solution `q` of `a = q C` restricted to the row space.
    pub fn project_row(&self, a: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.d);
        let r = self.rank;
        let mut out = vec![0.0; r];
        for (k, ak) in a.iter().enumerate() {
            if *ak == 0.0 {
                continue;
            }
            let w = &self.whiten[k * r..(k + 1) * r];
            for (o, wv) in out.iter_mut().zip(w) {
                *o += ak * wv;
            }
        }
        out
    }

    /// Maps basis coordinates `y` back to a parameter `x` with `A x = Q y`.
    pub fn to_parameter(&self, y: &[f64]) -> Vec<f64> {
        let r = self.rank;
        (0..self.d)
            .map(|k| {
                let w = &self.whiten[k * r..(k + 1) * r];
                w.iter().zip(y).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn q_matrix(&self) -> Option<DenseMatrix> {
        DenseMatrix::from_row_major(self.n, self.rank, self.q.clone()).ok()
    }
}

struct Thin {
    q: DMatrix<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
}

/// QR first, then an SVD of the small triangular factor.
fn thin_svd(a: &DenseMatrix) -> Thin {
    let m = a.to_nalgebra();
    let qr = m.qr();
    let q0 = qr.q();
    let r = qr.r();
    let svd = r.svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)]);
    Thin {
        q: q0 * u_sorted,
        sigma,
        v,
    }
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let m = a.to_nalgebra();
    let sv = if a.nrows() > a.ncols() {
        m.qr().r().singular_values()
    } else {
        m.singular_values()
    };
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Number of singular values strictly above `tol * sigma_max`.
pub fn rank(a: &DenseMatrix, tol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > tol * smax).count()
}

pub fn orthonormal_basis(a: &DenseMatrix) -> OrthonormalFactor {
    orthonormal_basis_with_tol(a, DEFAULT_RANK_TOL)
}

pub fn orthonormal_basis_with_tol(a: &DenseMatrix, tol: f64) -> OrthonormalFactor {
    let (n, d) = (a.nrows(), a.ncols());
    let thin = thin_svd(a);
    let smax = thin.sigma.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        thin.sigma.iter().filter(|&&s| s > tol * smax).count()
    };
    let mut q = Vec::with_capacity(n * rank);
    for i in 0..n {
        for j in 0..rank {
            q.push(thin.q[(i, j)]);
        }
    }
    let mut whiten = Vec::with_capacity(d * rank);
    for k in 0..d {
        for j in 0..rank {
            whiten.push(thin.v[(k, j)] / thin.sigma[j]);
        }
    }
    OrthonormalFactor {
        n,
        d,
        rank,
        q,
        whiten,
        sigma: thin.sigma[..rank].to_vec(),
    }
}
