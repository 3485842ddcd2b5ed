#![allow(dead_code)]

use lpcoreset::matrix::{gen_gaussian, gen_heavy_tail, gen_mixed};
use lpcoreset::seed::{derive_seed, rng};
use lpcoreset::DenseMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `a_i (A^T A)^{-1} a_i^T` from an explicit Gram inverse.
pub fn brute_leverage(a: &DenseMatrix) -> Vec<f64> {
    let m = a.to_nalgebra();
    let gram = m.transpose() * &m;
    let inv = gram.try_inverse().expect("full column rank");
    (0..a.nrows())
        .map(|i| {
            let r = m.row(i);
            (r * &inv * r.transpose())[(0, 0)]
        })
        .collect()
}

/// Gaussian, heavy-tailed or mixed instance with `n <= n_max`, `d <= d_max`.
pub fn random_instance(seed: u64, n_max: usize, d_max: usize) -> DenseMatrix {
    let mut r = rng(seed);
    let d = r.random_range(1..=d_max);
    let n = r.random_range((d + 1).max(n_max / 4)..=n_max);
    let s = derive_seed(seed, 1);
    match r.random_range(0..3) {
        0 => gen_gaussian(n, d, s),
        1 => gen_heavy_tail(n, d, 3.0, s),
        _ => gen_mixed(n, d, s),
    }
    .unwrap()
}

fn ratio(a: &DenseMatrix, i: usize, p: f64, x: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut own = 0.0;
    for (j, row) in a.rows_iter().enumerate() {
        let v = row.iter().zip(x).map(|(u, w)| u * w).sum::<f64>().abs().powf(p);
        total += v;
        if j == i {
            own = v;
        }
    }
    if total > 0.0 {
        own / total
    } else {
        0.0
    }
}

fn unit(mut x: Vec<f64>) -> Vec<f64> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
    x
}

/// Sensitivity of row `i` by brute force: the best of `dirs` grid directions,
/// then a random-direction pattern search around the best few. For p = 1 the
/// maximum sits where `d - 1` other residuals vanish, so each refined point is
/// also snapped to the intersections of its nearest zero sets.
pub fn grid_sensitivity(a: &DenseMatrix, i: usize, p: f64, dirs: usize, seed: u64) -> f64 {
    let d = a.ncols();
    let grid: Vec<Vec<f64>> = match d {
        1 => return ratio(a, i, p, &[1.0]),
        2 => (0..dirs)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / dirs as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..dirs)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / dirs as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    vec![rho * th.cos(), rho * th.sin(), z]
                })
                .collect()
        }
        _ => panic!("grid needs d <= 3"),
    };
    let mut scored: Vec<(f64, &Vec<f64>)> = grid.iter().map(|x| (ratio(a, i, p, x), x)).collect();
    scored.sort_by(|u, v| v.0.total_cmp(&u.0));
    let mut r = rng(seed);
    let mut best = scored[0].0;
    for (mut f, x) in scored.into_iter().take(5) {
        let mut x = x.clone();
        let mut h = 0.02;
        while h > 1e-10 {
            let mut improved = false;
            for _ in 0..24 {
                let t: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
                let y = unit(x.iter().zip(&t).map(|(u, v)| u + h * v).collect());
                let fy = ratio(a, i, p, &y);
                if fy > f {
                    f = fy;
                    x = y;
                    improved = true;
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best = best.max(f);
        if p == 1.0 {
            best = best.max(snap_to_kinks(a, i, &x));
        }
    }
    best
}

fn snap_to_kinks(a: &DenseMatrix, i: usize, x: &[f64]) -> f64 {
    let mut near: Vec<(f64, usize)> = a
        .rows_iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, row)| {
            let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = row.iter().zip(x).map(|(u, w)| u * w).sum::<f64>().abs();
            (if n > 0.0 { r / n } else { f64::INFINITY }, j)
        })
        .collect();
    near.sort_by(|u, v| u.0.total_cmp(&v.0));
    let near: Vec<&[f64]> = near.iter().take(8).map(|&(_, j)| a.row(j)).collect();
    let mut best = 0.0f64;
    match a.ncols() {
        2 => {
            for r in &near {
                best = best.max(ratio(a, i, 1.0, &[-r[1], r[0]]));
            }
        }
        3 => {
            for (k, u) in near.iter().enumerate() {
                for v in &near[k + 1..] {
                    let c = [
                        u[1] * v[2] - u[2] * v[1],
                        u[2] * v[0] - u[0] * v[2],
                        u[0] * v[1] - u[1] * v[0],
                    ];
                    if c.iter().any(|t| *t != 0.0) {
                        best = best.max(ratio(a, i, 1.0, &c));
                    }
                }
            }
        }
        _ => {}
    }
    best
}

pub fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[k - 1]
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
