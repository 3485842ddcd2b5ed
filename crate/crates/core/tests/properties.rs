use lpcoreset::distortion::{distortion_random, grid_certify, min_grid_resolution, rank_preserved};
use lpcoreset::hardness::{hard_instance, hard_instance_with_threshold, lowerbound_experiment};
use lpcoreset::logistic::{logistic_loss_split, random_probes, train_weighted_logistic};
use lpcoreset::matrix::{gen_gaussian, gen_mixed, rank, DEFAULT_RANK_TOL};
use lpcoreset::sampling::{
    augmented_plan, lewis_plan, loss_eval, pure_lp_plan, sample_loss, uniform_plan, Loss, SamplingPlan, Scheme,
};
use lpcoreset::scores::{exact_lp_sensitivities, l2_leverage, lewis_weights, mu_estimate, LewisOptions};
use lpcoreset::seed::derive_seed;
use lpcoreset::DenseMatrix;
use proptest::prelude::*;

fn aggregate_mean(a: &DenseMatrix, plan: &SamplingPlan, x: &[f64], trials: u64, base: u64) -> (f64, f64) {
    let loss = Loss::AbsP(1.0);
    let vals: Vec<f64> = (0..trials)
        .map(|t| sample_loss(a, &plan.draw(derive_seed(base, t)), x, loss).unwrap())
        .collect();
    let mean = vals.iter().sum::<f64>() / trials as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    (mean, (var / trials as f64).sqrt())
}

#[test]
fn every_plan_is_unbiased_in_aggregate() {
    let a = gen_gaussian(200, 5, 23).unwrap();
    let x = [0.5, 1.0, -2.0, 0.25, -0.75];
    let full = loss_eval(&a, &x, Loss::AbsP(1.0), None).unwrap();
    let sp = exact_lp_sensitivities(&a, 1.0, 1e-9).unwrap();
    let s2 = l2_leverage(&a);
    let lw = lewis_weights(&a, 1.0, LewisOptions::default()).unwrap();
    let plans = [
        augmented_plan(&sp, &s2, 1.0, 2.0).unwrap(),
        pure_lp_plan(&sp, 20.0).unwrap(),
        lewis_plan(&lw, 20.0).unwrap(),
        uniform_plan(200, 30.0).unwrap(),
    ];
    for (k, plan) in plans.iter().enumerate() {
        let (mean, se) = aggregate_mean(&a, plan, &x, 20_000, 40 + k as u64);
        let err = (mean - full).abs();
        assert!(
            err <= 0.01 * full,
            "{:?}: mean {mean} vs {full} (se {se})",
            plan.scheme()
        );
        assert!(
            err <= 5.0 * se,
            "{:?}: {err} is {} standard errors",
            plan.scheme(),
            err / se
        );
    }
}

#[test]
fn grid_dominates_random_directions() {
    for d in 1..=3 {
        let a = gen_mixed(40, d, 70 + d as u64).unwrap();
        let sp = exact_lp_sensitivities(&a, 1.0, 1e-10).unwrap();
        let plan = augmented_plan(&sp, &l2_leverage(&a), 1.0, 0.3).unwrap();
        for t in 0..3 {
            let s = plan.draw(derive_seed(71, t));
            for loss in [Loss::AbsP(1.0), Loss::AbsP(1.5), Loss::ReluP(1.0)] {
                let dirs = 2_000;
                let grid = grid_certify(&a, &s, loss, min_grid_resolution(d).max(dirs)).unwrap();
                let rand = distortion_random(&a, &s, loss, dirs, t).unwrap();
                assert!(
                    grid.max_ratio >= rand.max_ratio - 1e-3 * rand.max_ratio.max(1e-3),
                    "d={d} {loss:?}: grid {} random {}",
                    grid.max_ratio,
                    rand.max_ratio
                );
            }
        }
    }
}

#[test]
fn hard_instance_blocks_and_ranks() {
    for (d, n, copies) in [(3, 20, 2), (5, 40, 3), (8, 64, 1)] {
        let inst = hard_instance(d, n, copies, 1.0, 5).unwrap();
        let m = &inst.matrix;
        assert_eq!(m.nrows(), n + d * copies);
        assert_eq!(m.ncols(), 2 * d);
        for i in inst.block1_rows() {
            assert!(m.row(i)[d..].iter().all(|v| *v == 0.0));
        }
        for i in inst.block2_rows() {
            assert!(m.row(i)[..d].iter().all(|v| *v == 0.0));
            assert_eq!(m.row(i)[d..].iter().filter(|v| **v == 1.0).count(), 1);
        }
        assert_eq!(rank(m, DEFAULT_RANK_TOL), 2 * d);
        let full = lpcoreset::sampling::WeightedSample::full(m.nrows());
        assert_eq!(
            rank_preserved(m, &full, Some(&inst.blocks()), None).unwrap(),
            vec![true, true]
        );
        assert!((inst.measured_totals.1 - d as f64).abs() < 1e-6);
        assert!(inst.measured_totals.0 <= d as f64 + 1e-6);
        let total: f64 = inst.lp_scores.values().iter().sum();
        assert!((total - inst.measured_totals.0 - inst.measured_totals.1).abs() < 1e-9);
    }
}

/// Largest block-1 total over block-2 total, relative to `sqrt(ln d / d)`,
/// measured at d = 16, 32, 64 with n = 8d Gaussian rows (0.80 at d = 16).
const IMBALANCE_CONSTANT: f64 = 0.85;

#[test]
fn gaussian_block_has_small_total_sensitivity() {
    for d in [16usize, 32, 64] {
        let inst = hard_instance_with_threshold(d, 8 * d, 1, 1.0, 3, usize::MAX).unwrap();
        let (t1, t2) = inst.measured_totals;
        let bound = IMBALANCE_CONSTANT * ((d as f64).ln() / d as f64).sqrt();
        assert!(t1 / t2 <= bound, "d={d}: totals {t1} / {t2} = {} > {bound}", t1 / t2);
    }
}

#[test]
fn pure_success_does_not_drop_with_budget() {
    let inst = hard_instance(8, 512, 32, 1.0, 4).unwrap();
    let budgets = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0];
    let rows = lowerbound_experiment(&inst, &budgets, 200, 12).unwrap();
    let pure: Vec<_> = rows.iter().filter(|r| r.scheme == Scheme::PureLp).collect();
    assert_eq!(pure.len(), budgets.len());
    for w in pure.windows(2) {
        let (f0, f1) = (w[0].success_fraction, w[1].success_fraction);
        let se = ((f0 * (1.0 - f0) + f1 * (1.0 - f1)) / 200.0).sqrt();
        assert!(
            f1 >= f0 - 3.0 * se.max(1.0 / 200.0),
            "k {} -> {}: {f0} -> {f1}",
            w[0].k,
            w[1].k
        );
    }
}

#[test]
fn logistic_loss_stays_above_rows_over_mu() {
    for seed in 0..4 {
        let a = gen_gaussian(400, 4, 90 + seed).unwrap().with_negated_copy().unwrap();
        let est = mu_estimate(&a, 1.0, 16, 60, seed).unwrap();
        let mu = 2.0 * est.mu_hat.unwrap();
        let n = a.nrows() as f64;
        for x in random_probes(4, 50, seed) {
            for c in [0.1, 1.0, 10.0, 100.0] {
                let y: Vec<f64> = x.iter().map(|v| c * v).collect();
                let f = logistic_loss_split(&a, &y, None).unwrap();
                assert!(f >= n / mu, "seed {seed}: f = {f} < n/mu = {}", n / mu);
            }
        }
    }
}

#[test]
fn training_loss_never_increases() {
    for seed in 0..5 {
        let a = gen_mixed(300, 4, 110 + seed).unwrap();
        let w: Vec<f64> = (0..300).map(|i| 1.0 + (i % 7) as f64 * 0.25).collect();
        let r = train_weighted_logistic(&a, &w, &[0.3, -0.2, 0.1, 0.0], 400, 1e-10).unwrap();
        assert_eq!(
            r.losses[0],
            logistic_loss_split(&a, &[0.3, -0.2, 0.1, 0.0], Some(&w)).unwrap()
        );
        for s in r.losses.windows(2) {
            assert!(s[1] <= s[0] * (1.0 + 4.0 * f64::EPSILON), "{} -> {}", s[0], s[1]);
        }
        assert!(r.loss <= r.losses[0]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn raising_alpha_never_lowers_a_probability(seed in 0u64..300, lo in 0.01f64..5.0, f in 1.0f64..10.0) {
        let a = gen_mixed(30, 3, seed).unwrap();
        let sp = exact_lp_sensitivities(&a, 1.0, 1e-9).unwrap();
        let s2 = l2_leverage(&a);
        let p = augmented_plan(&sp, &s2, 1.5, lo).unwrap();
        let q = augmented_plan(&sp, &s2, 1.5, lo * f).unwrap();
        for (u, v) in p.probs().iter().zip(q.probs()) {
            prop_assert!(v >= u);
        }
    }

    #[test]
    fn relu_ratio_is_positively_homogeneous(seed in 0u64..300, c in 0.01f64..100.0) {
        let a = gen_mixed(30, 3, seed).unwrap();
        let sp = exact_lp_sensitivities(&a, 1.0, 1e-9).unwrap();
        let plan = augmented_plan(&sp, &l2_leverage(&a), 1.0, 0.5).unwrap();
        let s = plan.draw(seed);
        let x = [0.3, -1.1, 0.7];
        let y: Vec<f64> = x.iter().map(|v| c * v).collect();
        let r = lpcoreset::distortion::ratio_at(&a, &s, Loss::ReluP(1.0), &x).unwrap();
        let t = lpcoreset::distortion::ratio_at(&a, &s, Loss::ReluP(1.0), &y).unwrap();
        match (r, t) {
            (Some(r), Some(t)) => prop_assert!((r - t).abs() <= 1e-10 * r.max(1.0)),
            (r, t) => prop_assert_eq!(r.is_none(), t.is_none()),
        }
    }
}
