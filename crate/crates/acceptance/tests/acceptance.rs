//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test --test acceptance -- 1 2 12`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use lpcoreset::calibration::{fingerprint, Calibration};
use lpcoreset::distortion::{estimate_distortion, l2_distortion_exact, AscentOptions};
use lpcoreset::hardness::{hard_instance, lowerbound_experiment};
use lpcoreset::logistic::{
    coreset_quality_report, logistic_coreset_with_scores, logistic_loss_split, random_probes, LogisticOptions,
    TrainOptions,
};
use lpcoreset::matrix::{
    gen_gaussian, gen_mixed, gen_stacked_identity, orthonormal_basis, rank, save_matrix, DenseMatrix, MatrixFormat,
    DEFAULT_RANK_TOL,
};
use lpcoreset::sampling::{
    alpha_for_expected_size, augmented_importance, augmented_plan, clamped_total, loss_eval, Loss, Scheme,
    WeightedSample,
};
use lpcoreset::scores::{exact_lp_sensitivities, l2_leverage, l2_relax_upper_bounds, mu_ratio, ScoreVector};
use lpcoreset::seed::derive_seed;

use common::{brute_leverage, grid_sensitivity, median, quantile, random_instance};

const EPSILON: f64 = 0.25;
const DELTA: f64 = 0.1;
/// Sweep exponents: `alpha = alpha_cal * 2^j`.
const SWEEP: [i32; 5] = [-2, -1, 0, 1, 2];
const SWEEP_SEEDS: u64 = 10;
const L2_SEEDS: u64 = 20;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Totals of every oracle run, checked against `d` by criterion 4.
#[derive(Default)]
struct Totals(Vec<(String, f64, usize)>);

impl Totals {
    fn add(&mut self, label: impl Into<String>, s: &ScoreVector, d: usize) {
        self.0.push((label.into(), s.total(), d));
    }
}

fn within(limit: Duration, t: Instant) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.1}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn crit1() -> Verdict {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_sum = 0.0f64;
    for k in 0..50 {
        let a = random_instance(derive_seed(0xA1, k), 300, 10);
        let lev = l2_leverage(&a);
        let brute = brute_leverage(&a);
        for (u, v) in lev.values().iter().zip(&brute) {
            worst = worst.max(rel(*u, *v));
        }
        worst_sum = worst_sum.max((lev.total() - rank(&a, DEFAULT_RANK_TOL) as f64).abs());
    }
    let (fast, time) = within(Duration::from_secs(10), t);
    verdict(
        worst <= 1e-8 && worst_sum <= 1e-6 && fast,
        format!("max rel err {worst:.2e}, max |sum - rank| {worst_sum:.2e}, {time}"),
    )
}

fn crit2(totals: &mut Totals) -> Verdict {
    let t = Instant::now();
    let mut p2 = 0.0f64;
    for k in 0..20 {
        let a = random_instance(derive_seed(0xA2, k), 150, 8);
        let s = exact_lp_sensitivities(&a, 2.0, 1e-9).unwrap();
        let lev = l2_leverage(&a);
        for (u, v) in s.values().iter().zip(lev.values()) {
            p2 = p2.max(rel(*u, *v));
        }
        totals.add(format!("p=2 instance {k}"), &s, a.ncols());
    }
    let mut grid = 0.0f64;
    for d in 1..=3usize {
        for &p in &[1.0, 1.5] {
            for k in 0..2 {
                let seed = derive_seed(0xA20 + d as u64, k + 10 * (p == 1.5) as u64);
                let a = if k == 0 {
                    gen_gaussian(30, d, seed).unwrap()
                } else {
                    gen_mixed(30, d, seed).unwrap()
                };
                let s = exact_lp_sensitivities(&a, p, 1e-9).unwrap();
                for i in 0..a.nrows() {
                    let g = grid_sensitivity(&a, i, p, 100_000, derive_seed(seed, i as u64));
                    grid = grid.max(rel(g, s.values()[i]));
                }
                totals.add(format!("grid d={d} p={p} #{k}"), &s, d);
            }
        }
    }
    let mut stacked = 0.0f64;
    for d in 1..=6 {
        for c in 1..=5 {
            let a = gen_stacked_identity(d, c).unwrap();
            for &p in &[1.0, 1.5, 2.0] {
                let s = exact_lp_sensitivities(&a, p, 1e-9).unwrap();
                for v in s.values() {
                    stacked = stacked.max((v - 1.0 / c as f64).abs());
                }
                stacked = stacked.max((s.total() - d as f64).abs());
                totals.add(format!("stacked identity ({d}, {c}) p={p}"), &s, d);
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(120), t);
    verdict(
        p2 <= 1e-6 && grid <= 1e-3 && stacked <= 1e-9 && fast,
        format!("p=2 vs leverage {p2:.2e}, oracle vs grid {grid:.2e}, stacked identity {stacked:.2e}, {time}"),
    )
}

fn crit3(totals: &mut Totals) -> Verdict {
    let t = Instant::now();
    let mut violations = 0;
    let mut closest = f64::INFINITY;
    for k in 0..20 {
        let a = random_instance(derive_seed(0xA3, k), 150, 8);
        for &p in &[1.0, 1.25, 1.5, 1.75, 2.0] {
            let exact = exact_lp_sensitivities(&a, p, 1e-9).unwrap();
            let upper = l2_relax_upper_bounds(&a, p).unwrap();
            for (s, u) in exact.values().iter().zip(upper.values()) {
                if *s > u * (1.0 + 1e-9) + 1e-15 {
                    violations += 1;
                }
                if *s > 0.0 {
                    closest = closest.min(u / s);
                }
            }
            totals.add(format!("upper-bound instance {k} p={p}"), &exact, a.ncols());
        }
    }
    let (fast, time) = within(Duration::from_secs(120), t);
    verdict(
        violations == 0 && fast,
        format!("{violations} violations, min bound/oracle {closest:.6}, {time}"),
    )
}

fn crit4(totals: &Totals) -> Verdict {
    let bad: Vec<_> = totals
        .0
        .iter()
        .filter(|(_, s, d)| *s > *d as f64 * (1.0 + 1e-9))
        .collect();
    let worst = totals.0.iter().map(|(_, s, d)| s / *d as f64).fold(0.0, f64::max);
    verdict(
        bad.is_empty() && !totals.0.is_empty(),
        format!(
            "{} instances, max total/d {worst:.6}{}",
            totals.0.len(),
            bad.first()
                .map(|b| format!(", first violation {}", b.0))
                .unwrap_or_default()
        ),
    )
}

fn crit5(totals: &mut Totals) -> Verdict {
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    for (label, a, p) in [
        ("mixed p=1", gen_mixed(2000, 8, 5).unwrap(), 1.0),
        ("gaussian p=1.5", gen_gaussian(2000, 8, 55).unwrap(), 1.5),
    ] {
        let d = a.ncols() as f64;
        let sp = exact_lp_sensitivities(&a, p, 1e-9).unwrap();
        totals.add(label, &sp, a.ncols());
        let s2 = l2_leverage(&a);
        for &mu in &[1.0, 3.0] {
            let imp = augmented_importance(&sp, &s2, mu, 1.0 / a.nrows() as f64).unwrap();
            let cap = 1.0 / imp.iter().cloned().fold(0.0, f64::max);
            for &alpha in &[0.5 * cap, cap, 5.0, 40.0] {
                let plan = augmented_plan(&sp, &s2, mu, alpha).unwrap();
                let m = plan.expected_size();
                let identity = alpha * (mu * sp.total() + s2.total() + 1.0);
                let unclamped = alpha <= cap;
                if unclamped && rel(m, identity) > 1e-9 {
                    pass = false;
                    notes.push(format!("{label}: expected {m} != {identity}"));
                }
                if m > 3.0 * alpha * mu * d * (1.0 + 1e-12) || (unclamped && m < alpha * d * (1.0 - 1e-12)) {
                    pass = false;
                    notes.push(format!(
                        "{label}: expected {m} outside [{}, {}]",
                        alpha * d,
                        3.0 * alpha * mu * d
                    ));
                }
                let cut = 6.0 * alpha * mu * d;
                let ok = (0..500)
                    .filter(|&k| (plan.draw(derive_seed(0xA5, k)).len() as f64) <= cut)
                    .count();
                if ok < 475 {
                    pass = false;
                    notes.push(format!("{label}: only {ok}/500 draws within 6 alpha mu d"));
                }
                assert_eq!(clamped_total(&imp, alpha), m);
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(60), t);
    let detail = if notes.is_empty() {
        format!("16 plans, identity and bounds hold, {time}")
    } else {
        format!("{}, {time}", notes.join("; "))
    };
    verdict(pass && fast, detail)
}

struct Sweep {
    alpha_cal: f64,
    medians: Vec<(f64, f64)>,
    at_cal: Vec<f64>,
    l2: Vec<f64>,
}

fn sweep(a: &DenseMatrix, sp: &ScoreVector, mu: f64, loss: Loss, cal: &Calibration, base: u64) -> Sweep {
    let s2 = l2_leverage(a);
    let alpha_cal = cal.alpha(EPSILON, DELTA, a.ncols(), mu).unwrap();
    let factor = orthonormal_basis(a);
    let mut medians = Vec::new();
    let mut at_cal = Vec::new();
    let mut l2 = Vec::new();
    for &j in &SWEEP {
        let alpha = alpha_cal * 2f64.powi(j);
        let plan = augmented_plan(sp, &s2, mu, alpha).unwrap();
        let seeds = if j == 0 { SWEEP_SEEDS.max(L2_SEEDS) } else { SWEEP_SEEDS };
        let mut ratios = Vec::new();
        for k in 0..seeds {
            let seed = derive_seed(base, k);
            let sample = plan.draw(seed);
            if j == 0 {
                l2.push(l2_distortion_exact(&factor, &sample).unwrap().max_ratio);
            }
            if k < SWEEP_SEEDS {
                let rep = estimate_distortion(a, &sample, loss, 10_000, AscentOptions::default(), seed).unwrap();
                ratios.push(rep.max_ratio);
            }
        }
        eprintln!(
            "    alpha = {alpha:.2} expected size {:.0}: median {:.4}, q90 {:.4}",
            plan.expected_size(),
            median(&ratios),
            quantile(&ratios, 0.9)
        );
        if j == 0 {
            at_cal = ratios.clone();
        }
        medians.push((alpha, median(&ratios)));
    }
    Sweep {
        alpha_cal,
        medians,
        at_cal,
        l2,
    }
}

fn sweep_verdict(s: &Sweep, t: Instant, limit: Duration) -> Verdict {
    let monotone = s.medians.windows(2).all(|w| w[1].1 <= w[0].1);
    let ratios: Vec<f64> = s.medians.windows(3).map(|w| w[0].1 / w[2].1).collect();
    let halving = ratios.iter().all(|r| (1.0..=4.0).contains(r));
    let hits = s.at_cal.iter().filter(|r| **r <= EPSILON).count();
    let enough = hits as f64 >= 0.9 * s.at_cal.len() as f64;
    let (fast, time) = within(limit, t);
    let meds: Vec<String> = s.medians.iter().map(|(_, m)| format!("{m:.4}")).collect();
    let rs: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    verdict(
        monotone && halving && enough && fast,
        format!(
            "alpha_cal {:.2}, medians [{}], x4 ratios [{}], {hits}/{} seeds <= {EPSILON} at alpha_cal, {time}",
            s.alpha_cal,
            meds.join(", "),
            rs.join(", "),
            s.at_cal.len()
        ),
    )
}

fn crit6_7(cal: &Calibration, totals: &mut Totals) -> (Verdict, Verdict) {
    let t = Instant::now();
    let a = gen_mixed(20_000, 10, 6).unwrap();
    if fingerprint(&a) != cal.instance_fingerprint {
        let v = || verdict(false, "instance does not match the calibration fingerprint");
        return (v(), v());
    }
    let sp = exact_lp_sensitivities(&a, 1.0, 1e-9).unwrap();
    eprintln!("    oracle scores in {:.0?}", t.elapsed());
    totals.add("mixed 20000 x 10", &sp, 10);
    let s = sweep(&a, &sp, 1.0, Loss::AbsP(1.0), cal, 0xA6);
    let v6 = sweep_verdict(&s, t, Duration::from_secs(1200));
    let ok = s.l2.iter().filter(|r| **r <= 0.5).count();
    let v7 = verdict(
        ok as f64 >= 0.95 * s.l2.len() as f64,
        format!(
            "{ok}/{} seeds with exact l2 distortion <= 0.5, max {:.4}",
            s.l2.len(),
            s.l2.iter().cloned().fold(0.0, f64::max)
        ),
    );
    (v6, v7)
}

fn crit8() -> Verdict {
    let t = Instant::now();
    let n = 10_000usize;
    let m = 200.0;
    let a = DenseMatrix::filled(n, 1, 1.0).unwrap();
    let sp = exact_lp_sensitivities(&a, 1.0, 1e-9).unwrap();
    let imp = augmented_importance(&sp, &l2_leverage(&a), 1.0, 1.0 / n as f64).unwrap();
    let alpha = alpha_for_expected_size(&imp, m).unwrap();
    let plan = augmented_plan(&sp, &l2_leverage(&a), 1.0, alpha).unwrap();
    let x = [1.0];
    let trials = 200;
    let mut ok = 0;
    let mut folded_l2 = Vec::new();
    for k in 0..trials {
        let s: WeightedSample = plan.draw(derive_seed(0xA8, k));
        let l1 = loss_eval(&a, &x, Loss::AbsP(1.0), None).unwrap();
        let l2 = loss_eval(&a, &x, Loss::AbsP(2.0), None).unwrap();
        let (rows, w) = s.gather(&a).unwrap();
        let s1 = loss_eval(&rows, &x, Loss::AbsP(1.0), Some(&w)).unwrap();
        let s2 = loss_eval(&rows, &x, Loss::AbsP(2.0), Some(&w)).unwrap();
        if rel(s1, l1) <= 0.1 && rel(s2, l2) <= 0.1 {
            ok += 1;
        }
        // The same rows with the weights folded into the data.
        folded_l2.push(w.iter().map(|v| v * v).sum::<f64>() / l2);
    }
    // Folded weights: ||A'x||_1 >= n/2 forces ||A'x||_2^2 >= n^2 / (4m) > 2n unless m >= n/8.
    let floor = (n as f64).powi(2) / (4.0 * m);
    let impossible = m < n as f64 / 8.0 && floor > 2.0 * n as f64;
    let frac = ok as f64 / trials as f64;
    let (fast, time) = within(Duration::from_secs(60), t);
    verdict(
        frac >= 0.8 && impossible && fast,
        format!(
            "{ok}/{trials} weighted draws within 0.1 on both norms; unweighted m = {m} needs ||A'x||_2^2 >= {floor:.0} > 2n = {}; folded weights inflate l2 by x{:.1}; {time}",
            2 * n,
            median(&folded_l2)
        ),
    )
}

fn crit9(cal: &Calibration, totals: &mut Totals) -> Verdict {
    let t = Instant::now();
    let Some(k) = cal.lowerbound_k else {
        return verdict(false, "calibration has no lower-bound budget");
    };
    let inst = hard_instance(16, 4096, 256, 1.0, 9).unwrap();
    totals.add("hard instance", &inst.lp_scores, inst.matrix.ncols());
    let rows = lowerbound_experiment(&inst, &[k], 200, 0xA9).unwrap();
    let pure = rows.iter().find(|r| r.scheme == Scheme::PureLp).unwrap();
    let aug = rows.iter().find(|r| r.scheme == Scheme::Augmented).unwrap();
    let uni = rows.iter().find(|r| r.scheme == Scheme::Uniform).unwrap();
    let gap = aug.success_fraction - pure.success_fraction;
    let disjoint = pure.ci_high < aug.ci_low;
    let (fast, time) = within(Duration::from_secs(600), t);
    verdict(
        gap >= 0.4 && disjoint && fast,
        format!(
            "block totals ({:.3}, {:.3}), k = {k}, expected size {:.1}: pure {:.3} [{:.3}, {:.3}], augmented {:.3} [{:.3}, {:.3}], uniform {:.3}, gap {gap:.3}, {time}",
            inst.measured_totals.0,
            inst.measured_totals.1,
            pure.expected_size,
            pure.success_fraction,
            pure.ci_low,
            pure.ci_high,
            aug.success_fraction,
            aug.ci_low,
            aug.ci_high,
            uni.success_fraction
        ),
    )
}

fn crit10(totals: &mut Totals) -> Verdict {
    let t = Instant::now();
    let a = gen_gaussian(2500, 10, 10).unwrap().with_negated_copy().unwrap();
    let n = a.nrows() as f64;
    let mu = 2.0;
    let probes = random_probes(a.ncols(), 100, derive_seed(0xAA, 100));
    let mu_exact = probes.iter().all(|x| (mu_ratio(&a, x, 1.0) - mu).abs() <= 1e-9);
    let l1 = exact_lp_sensitivities(&a, 1.0, 1e-9).unwrap();
    totals.add("symmetric logistic", &l1, 10);
    let mut good = 0;
    let mut trained_worst = 0.0f64;
    let mut worst_err = 0.0f64;
    let seeds = 20;
    for k in 0..seeds {
        let opts = LogisticOptions {
            epsilon: EPSILON,
            delta: DELTA,
            mu_override: Some(mu),
            seed: derive_seed(0xAA, k),
            ..LogisticOptions::default()
        };
        let core = logistic_coreset_with_scores(&a, &l1, &opts).unwrap();
        let rep = coreset_quality_report(&a, &core.sample, &probes, TrainOptions::default()).unwrap();
        let err = rep.max_probe_error.max(rep.error_at_full_optimum);
        worst_err = worst_err.max(err);
        if err <= EPSILON {
            good += 1;
        }
        trained_worst = trained_worst.max(rep.optimum_loss_ratio);
    }
    let floor_ok = probes
        .iter()
        .all(|x| logistic_loss_split(&a, x, None).unwrap() >= n / mu);
    let a_ok = good as f64 >= 0.9 * seeds as f64;
    let b_ok = trained_worst <= 1.0 + 2.0 * EPSILON;
    let (fast, time) = within(Duration::from_secs(600), t);
    verdict(
        a_ok && b_ok && floor_ok && mu_exact && fast,
        format!(
            "(a) {good}/{seeds} seeds within {EPSILON} (worst {worst_err:.4}); (b) worst trained/optimum {trained_worst:.4}; (c) f(Ax) >= n/mu at all probes: {floor_ok}; mu = 2 at probes: {mu_exact}; {time}"
        ),
    )
}

fn crit11(cal: &Calibration, totals: &mut Totals) -> Verdict {
    let t = Instant::now();
    let a = gen_mixed(10_000, 10, 11).unwrap().with_negated_copy().unwrap();
    let probes = random_probes(10, 20, 0xAB);
    if !probes.iter().all(|x| (mu_ratio(&a, x, 1.0) - 2.0).abs() <= 1e-9) {
        return verdict(false, "data is not sign-symmetric");
    }
    let sp = exact_lp_sensitivities(&a, 1.0, 1e-9).unwrap();
    eprintln!("    oracle scores in {:.0?}", t.elapsed());
    totals.add("symmetric mixed 20000 x 10", &sp, 10);
    let s = sweep(&a, &sp, 2.0, Loss::ReluP(1.0), cal, 0xAB);
    sweep_verdict(&s, t, Duration::from_secs(1200))
}

fn crit12() -> Verdict {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let a = gen_mixed(300, 3, 12).unwrap();
    let input = root.join("a.csv");
    save_matrix(&a, &input, MatrixFormat::Csv).unwrap();
    let labeled = root.join("labeled.csv");
    let g = gen_gaussian(400, 3, 13).unwrap();
    let mut text = String::new();
    for (i, r) in g.rows_iter().enumerate() {
        let y = if r[0] + 0.5 * r[1] + 0.8 * (((i * 7919) % 13) as f64 / 13.0 - 0.5) > 0.0 {
            1
        } else {
            -1
        };
        text.push_str(&format!("{},{},{},{y}\n", r[0], r[1], r[2]));
    }
    std::fs::write(&labeled, text).unwrap();
    let i = input.to_str().unwrap();
    let s = |name: &str| root.join(name).to_str().unwrap().to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "scores",
            vec!["scores", "--input", i, "--p", "1.5"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            "sample",
            [
                "sample",
                "--input",
                i,
                "--epsilon",
                "0.5",
                "--mu",
                "auto",
                "--seed",
                "4",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        ),
        (
            "evaluate",
            vec![
                "evaluate".into(),
                "--input".into(),
                i.into(),
                "--sample".into(),
                s("sample/sample.csv"),
                "--dirs".into(),
                "500".into(),
                "--restarts".into(),
                "5".into(),
                "--seed".into(),
                "9".into(),
            ],
        ),
        (
            "lowerbound",
            [
                "lowerbound",
                "--d",
                "3",
                "--n",
                "60",
                "--copies",
                "8",
                "--budgets",
                "2,6",
                "--trials",
                "30",
                "--seed",
                "2",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        ),
        (
            "logistic",
            vec![
                "logistic".into(),
                "--input".into(),
                labeled.to_str().unwrap().into(),
                "--labeled".into(),
                "--probes".into(),
                "20".into(),
                "--seed".into(),
                "5".into(),
            ],
        ),
        (
            "bench",
            [
                "bench",
                "--input",
                i,
                "--schemes",
                "augmented,pure_lp,uniform",
                "--alphas",
                "2,8",
                "--num-seeds",
                "2",
                "--dirs",
                "200",
                "--restarts",
                "3",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        ),
    ];
    let mut failures = Vec::new();
    for (name, mut args) in runs {
        let first = root.join(name);
        args.insert(0, "lpcoreset".into());
        args.push("--out-dir".into());
        args.push(first.to_str().unwrap().into());
        let code = lpcoreset::cli::run(&args);
        if code != 0 {
            failures.push(format!("{name} exited {code}"));
            continue;
        }
        let again = root.join(format!("{name}-replay"));
        let config = first.join("config.json");
        let replay = [
            "lpcoreset",
            "replay",
            config.to_str().unwrap(),
            "--out-dir",
            again.to_str().unwrap(),
        ];
        let code = lpcoreset::cli::run(replay);
        if code != 0 {
            failures.push(format!("{name} replay exited {code}"));
            continue;
        }
        if let Err(e) = same_tree(&first, &again) {
            failures.push(format!("{name}: {e}"));
        }
    }
    let (fast, time) = within(Duration::from_secs(600), t);
    verdict(
        failures.is_empty() && fast,
        if failures.is_empty() {
            format!("6 commands replayed bit-exactly, {time}")
        } else {
            failures.join("; ")
        },
    )
}

fn same_tree(a: &Path, b: &Path) -> Result<(), String> {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut other: Vec<_> = std::fs::read_dir(b)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    other.sort();
    if names != other {
        return Err(format!("file sets differ: {names:?} vs {other:?}"));
    }
    for n in names {
        if std::fs::read(a.join(&n)).unwrap() != std::fs::read(b.join(&n)).unwrap() {
            return Err(format!("{} differs", n.to_string_lossy()));
        }
    }
    Ok(())
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let on = |k: u32| wanted.is_empty() || wanted.contains(&k);
    let cal = Calibration::bundled().expect("bundled calibration");
    let mut totals = Totals::default();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |k: u32, name: &'static str, v: Verdict| {
        println!(
            "criterion {k:>2} {} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((k, name, v));
    };
    if on(1) {
        record(1, "l2 leverage exactness", crit1());
    }
    if on(2) || on(4) {
        record(2, "sensitivity oracle", crit2(&mut totals));
    }
    if on(3) || on(4) {
        record(3, "upper-bound dominance", crit3(&mut totals));
    }
    if on(5) {
        record(5, "sample-size law", crit5(&mut totals));
    }
    if on(6) || on(7) {
        let (v6, v7) = crit6_7(&cal, &mut totals);
        record(6, "embedding quality and scaling", v6);
        record(7, "simultaneous l2 embedding", v7);
    }
    if on(8) {
        record(8, "weights kept separate", crit8());
    }
    if on(9) {
        record(9, "pure lp rank loss", crit9(&cal, &mut totals));
    }
    if on(10) {
        record(10, "logistic coreset", crit10(&mut totals));
    }
    if on(11) {
        record(11, "relu variant", crit11(&cal, &mut totals));
    }
    if on(12) {
        record(12, "replay determinism", crit12());
    }
    if on(4) {
        record(4, "total sensitivity at most d", crit4(&totals));
    }
    results.sort_by_key(|r| r.0);
    println!("\nsummary");
    for (k, name, v) in &results {
        println!("  {k:>2} {} {name}", if v.pass { "PASS" } else { "FAIL" });
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
