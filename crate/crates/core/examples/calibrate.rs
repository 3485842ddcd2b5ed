//! One-time pilot that fixes the oversampling constant `c_alpha` and the
//! rank-loss budget, then writes `calibration.json` at the workspace root.
//!
//! Pilot seeds are derived from bases disjoint from the ones the acceptance
//! suite uses. Run with `cargo run --release --example calibrate [-- --write]`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lpcoreset::calibration::{alpha_shape, fingerprint, Calibration};
use lpcoreset::distortion::{estimate_distortion, AscentOptions};
use lpcoreset::hardness::{hard_instance, lowerbound_experiment};
use lpcoreset::logistic::{
    coreset_quality_report, logistic_coreset_with_scores, random_probes, LogisticOptions, TrainOptions,
};
use lpcoreset::matrix::{gen_gaussian, gen_mixed};
use lpcoreset::sampling::{augmented_plan, Loss, Scheme};
use lpcoreset::scores::{exact_lp_sensitivities, l2_leverage, ScoreVector};
use lpcoreset::seed::derive_seed;
use lpcoreset::{DenseMatrix, Result};

const PILOT_BASE: u64 = 0x0091_7107;
const SEEDS: u64 = 20;
const EPSILON: f64 = 0.25;
const DELTA: f64 = 0.1;
/// Pilot quantiles must clear the target by this factor.
const MARGIN: f64 = 1.2;

fn cache_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target/calibration-cache")
}

fn l1_scores(a: &DenseMatrix) -> Result<ScoreVector> {
    let dir = cache_dir();
    std::fs::create_dir_all(&dir).ok();
    let stem = dir.join(fingerprint(a));
    let (csv, json) = (stem.with_extension("csv"), stem.with_extension("json"));
    if let Ok(s) = ScoreVector::load(&csv, &json) {
        return Ok(s);
    }
    let t = Instant::now();
    let s = exact_lp_sensitivities(a, 1.0, 1e-9)?;
    eprintln!(
        "  oracle on {} rows: {:.0?}, total {:.4}",
        a.nrows(),
        t.elapsed(),
        s.total()
    );
    s.save(&csv, &json)?;
    Ok(s)
}

fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[k - 1]
}

/// Smallest `c` on the doubling grid whose 90% quantile clears the target,
/// interpolated log-linearly against the previous grid point.
fn required_c(curve: &[(f64, f64)]) -> Option<f64> {
    let target = EPSILON / MARGIN;
    let hit = curve.iter().position(|(_, q)| *q <= target)?;
    if hit == 0 {
        return Some(curve[0].0);
    }
    let (c0, q0) = curve[hit - 1];
    let (c1, q1) = curve[hit];
    let t = (q0.ln() - target.ln()) / (q0.ln() - q1.ln());
    Some((c0.ln() + t * (c1.ln() - c0.ln())).exp())
}

fn embedding_curve(label: &str, a: &DenseMatrix, mu: f64, loss: Loss, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    eprintln!(
        "{label}: n = {}, d = {}, mu = {mu}, loss = {loss}",
        a.nrows(),
        a.ncols()
    );
    let sp = l1_scores(a)?;
    let s2 = l2_leverage(a);
    let shape = alpha_shape(EPSILON, DELTA, a.ncols(), mu)?;
    let mut curve = Vec::new();
    for &c in grid {
        let plan = augmented_plan(&sp, &s2, mu, c * shape)?;
        let mut ratios = Vec::new();
        for k in 0..SEEDS {
            let seed = derive_seed(PILOT_BASE ^ label.len() as u64, k);
            let sample = plan.draw(seed);
            let rep = estimate_distortion(a, &sample, loss, 10_000, AscentOptions::default(), seed)?;
            ratios.push(rep.max_ratio);
        }
        let (med, q90) = (quantile(&ratios, 0.5), quantile(&ratios, 0.9));
        eprintln!(
            "  c = {c:<8.4} alpha = {:<9.2} expected = {:<8.1} median = {med:.4} q90 = {q90:.4}",
            c * shape,
            plan.expected_size()
        );
        curve.push((c, q90));
    }
    Ok(curve)
}

fn logistic_curve(a: &DenseMatrix, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    eprintln!("logistic: n = {}, d = {}", a.nrows(), a.ncols());
    let shape = alpha_shape(EPSILON, DELTA, a.ncols(), 2.0)?;
    let l1 = l1_scores(a)?;
    let probes = random_probes(a.ncols(), 100, derive_seed(PILOT_BASE, 100));
    let mut curve = Vec::new();
    for &c in grid {
        let mut errs = Vec::new();
        let mut size = 0.0;
        for k in 0..SEEDS {
            let opts = LogisticOptions {
                mu_override: Some(2.0),
                alpha: Some(c * shape),
                seed: derive_seed(PILOT_BASE + 1, k),
                ..LogisticOptions::default()
            };
            let core = logistic_coreset_with_scores(a, &l1, &opts)?;
            size = core.plan.expected_size();
            let rep = coreset_quality_report(a, &core.sample, &probes, TrainOptions::default())?;
            errs.push(rep.max_probe_error.max(rep.error_at_full_optimum));
        }
        let q90 = quantile(&errs, 0.9);
        eprintln!("  c = {c:<8.4} expected = {size:<8.1} q90 = {q90:.4}");
        curve.push((c, q90));
    }
    Ok(curve)
}

fn main() -> Result<()> {
    let write = std::env::args().any(|a| a == "--write");
    let grid: Vec<f64> = (0..9).map(|j| 2f64.powi(j - 7)).collect();

    let mixed = gen_mixed(20_000, 10, 6)?;
    let symmetric = gen_mixed(10_000, 10, 11)?.with_negated_copy()?;
    let logistic = gen_gaussian(2_500, 10, 10)?.with_negated_copy()?;

    let mut needs = Vec::new();
    for (label, a, mu, loss) in [
        ("abs", &mixed, 1.0, Loss::AbsP(1.0)),
        ("relu", &symmetric, 2.0, Loss::ReluP(1.0)),
    ] {
        let curve = embedding_curve(label, a, mu, loss, &grid)?;
        let c = required_c(&curve);
        eprintln!("  required c: {c:?}");
        needs.push(c.unwrap_or(f64::INFINITY));
    }
    let curve = logistic_curve(&logistic, &grid[..5])?;
    let c = required_c(&curve);
    eprintln!("  required c: {c:?}");
    needs.push(c.unwrap_or(f64::INFINITY));

    let c_raw = needs.iter().cloned().fold(0.0, f64::max);
    let scale = 10f64.powf(c_raw.log10().floor() - 1.0);
    let c_alpha = (c_raw / scale).ceil() * scale;
    eprintln!("c_alpha = {c_alpha} (raw {c_raw:.5})");

    eprintln!("rank-loss budget scan");
    let inst = hard_instance(16, 4096, 256, 1.0, 9)?;
    eprintln!("  block totals {:?}", inst.measured_totals);
    let budgets = [1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0];
    let rows = lowerbound_experiment(&inst, &budgets, 200, derive_seed(PILOT_BASE, 9))?;
    let mut best = (f64::NEG_INFINITY, budgets[0]);
    for (chunk, &k) in rows.chunks(3).zip(&budgets) {
        let frac = |s: Scheme| chunk.iter().find(|r| r.scheme == s).unwrap().success_fraction;
        let gap = frac(Scheme::Augmented) - frac(Scheme::PureLp);
        eprintln!(
            "  k = {k:<4} expected = {:<7.1} pure = {:.3} augmented = {:.3} uniform = {:.3} gap = {gap:.3}",
            chunk[0].expected_size,
            frac(Scheme::PureLp),
            frac(Scheme::Augmented),
            frac(Scheme::Uniform)
        );
        if gap > best.0 {
            best = (gap, k);
        }
    }
    eprintln!("lowerbound k = {} (gap {:.3})", best.1, best.0);

    let cal = Calibration {
        c_alpha,
        date: "2026-10-15".into(),
        instance_fingerprint: fingerprint(&mixed),
        lowerbound_k: Some(best.1),
    };
    println!("{}", serde_json::to_string_pretty(&cal).unwrap());
    if write {
        cal.save(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../calibration.json"))?;
        eprintln!("calibration.json written");
    }
    Ok(())
}
