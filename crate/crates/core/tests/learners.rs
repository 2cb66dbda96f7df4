//! Learner behaviour checked against independent oracles: an SVD
//! pseudo-inverse for least squares, a dense grid for the lasso, and
//! exhaustive threshold enumeration for tree splits.

use fairscope::learners::{
    fit_forest, fit_gbt, fit_gbt_traced, fit_lasso, fit_lasso_traced, fit_ols, fit_tree, LearnerConfig,
    LearnerKind, Model, ModelParams,
};
use fairscope::Matrix;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(seed: u64, n: usize, p: usize) -> (Matrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let y = rows
        .iter()
        .map(|r| {
            r.iter().enumerate().map(|(j, x)| (j as f64 + 1.0) * x).sum::<f64>()
                + r[0] * r[0]
                + rng.random_range(-0.5..0.5)
        })
        .collect();
    (Matrix::from_rows(&rows).unwrap(), y)
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64
}

fn variance(y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / y.len() as f64
}

/// Least-squares fitted values from the SVD pseudo-inverse of `[1 | X]`.
fn pinv_fitted(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let a = DMatrix::from_fn(x.n_rows(), x.n_cols() + 1, |i, j| if j == 0 { 1.0 } else { x.get(i, j - 1) });
    let b = DVector::from_column_slice(y);
    let beta = a.clone().pseudo_inverse(1e-10).unwrap() * &b;
    (a * beta).iter().copied().collect()
}

fn no_sampling(kind: LearnerKind) -> LearnerConfig {
    LearnerConfig {
        subsample: 1.0,
        colsample: 1.0,
        bootstrap: false,
        ..LearnerConfig::for_kind(kind)
    }
}

#[test]
fn ols_recovers_noiseless_affine_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    let y: Vec<f64> = rows.iter().map(|r| 1.5 * r[0] - 2.0 * r[1] + 0.25 * r[2] + 7.0).collect();
    let m = fit_ols(&Matrix::from_rows(&rows).unwrap(), &y, 1e-8).unwrap();
    let ModelParams::Linear(p) = &m.params else { panic!("linear params") };
    for (w, want) in p.weights.iter().zip([1.5, -2.0, 0.25]) {
        assert!((w - want).abs() < 1e-9, "{w} vs {want}");
    }
    assert!((p.intercept - 7.0).abs() < 1e-9);
}

#[test]
fn ols_duplicated_column_matches_pseudo_inverse() {
    let (x, y) = random_data(3, 30, 2);
    let rows: Vec<Vec<f64>> = x.rows().map(|r| vec![r[0], r[1], r[0]]).collect();
    let dup = Matrix::from_rows(&rows).unwrap();
    let m = fit_ols(&dup, &y, 1e-8).unwrap();
    let ModelParams::Linear(p) = &m.params else { panic!() };
    assert!(p.weights.iter().all(|w| w.is_finite()));
    let fitted = m.predict(&dup).unwrap();
    for (a, b) in fitted.iter().zip(pinv_fitted(&dup, &y)) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn ols_residuals_are_orthogonal() {
    let (x, y) = random_data(5, 80, 4);
    let m = fit_ols(&x, &y, 1e-8).unwrap();
    let r: Vec<f64> = m.predict(&x).unwrap().iter().zip(&y).map(|(p, t)| t - p).collect();
    let scale = y.iter().map(|v| v.abs()).sum::<f64>();
    assert!(r.iter().sum::<f64>().abs() < 1e-6 * scale);
    for j in 0..x.n_cols() {
        let col = x.column(j);
        let dot: f64 = col.iter().zip(&r).map(|(a, b)| a * b).sum();
        let norm: f64 = col.iter().map(|a| a.abs()).sum::<f64>() * scale / y.len() as f64;
        assert!(dot.abs() < 1e-6 * norm, "column {j}: {dot}");
    }
}

#[test]
fn lasso_without_penalty_matches_ols() {
    let (x, y) = random_data(8, 60, 3);
    let ols = fit_ols(&x, &y, 1e-8).unwrap().predict(&x).unwrap();
    let lasso = fit_lasso(&x, &y, 0.0, 1e-12, 100_000).unwrap().predict(&x).unwrap();
    for (a, b) in ols.iter().zip(&lasso) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn lasso_huge_penalty_gives_mean() {
    let (x, y) = random_data(9, 40, 3);
    let m = fit_lasso(&x, &y, 1e9, 1e-9, 100).unwrap();
    let ModelParams::Linear(p) = &m.params else { panic!() };
    assert!(p.weights.iter().all(|&w| w == 0.0));
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    assert!((p.intercept - mean).abs() < 1e-9);
}

#[test]
fn lasso_single_feature_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let xs: Vec<f64> = (0..40).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y: Vec<f64> = xs.iter().map(|x| 0.8 * x + rng.random_range(-0.3..0.3)).collect();
    let lambda = 0.1;
    let x = Matrix::from_columns(std::slice::from_ref(&xs), xs.len()).unwrap();
    let fitted = fit_lasso_traced(&x, &y, lambda, 1e-12, 10_000).unwrap().params;

    // For a given w, the optimal intercept is mean(y - w x).
    let n = xs.len() as f64;
    let objective = |w: f64| {
        let b = y.iter().zip(&xs).map(|(t, x)| t - w * x).sum::<f64>() / n;
        y.iter().zip(&xs).map(|(t, x)| (w * x + b - t).powi(2)).sum::<f64>() / (2.0 * n) + lambda * w.abs()
    };
    let mut best = (f64::INFINITY, 0.0);
    let mut w = -2.0;
    while w <= 2.0 {
        let o = objective(w);
        if o < best.0 {
            best = (o, w);
        }
        w += 1e-4;
    }
    assert!((fitted.weights[0] - best.1).abs() <= 1e-4, "{} vs grid {}", fitted.weights[0], best.1);
}

#[test]
fn lasso_objective_never_increases() {
    let (x, y) = random_data(13, 70, 5);
    for lambda in [0.0, 0.05, 0.5, 2.0] {
        let t = fit_lasso_traced(&x, &y, lambda, 1e-10, 500).unwrap();
        for pair in t.objective.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0), "{pair:?}");
        }
    }
}

#[test]
fn lasso_sweep_budget_flags_nonconvergence() {
    let (x, y) = random_data(14, 50, 4);
    let m = fit_lasso(&x, &y, 0.01, 1e-14, 2).unwrap();
    let ModelParams::Linear(p) = &m.params else { panic!() };
    assert!(!p.converged);
    assert_eq!(p.sweeps, 2);
}

#[test]
fn depth_one_split_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let xs: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> = xs.iter().map(|&x| if x < 0.0 { 10.0 } else { 20.0 }).collect();
    let x = Matrix::from_columns(std::slice::from_ref(&xs), xs.len()).unwrap();
    let c = LearnerConfig { max_depth: 1, ..LearnerConfig::tree() };
    let m = fit_tree(&x, &y, &c).unwrap();
    let ModelParams::Trees { trees, .. } = &m.params else { panic!() };
    let t = &trees[0];

    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let sse = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - m).powi(2)).sum::<f64>()
    };
    let mut best = (f64::INFINITY, 0.0);
    for pair in sorted.windows(2) {
        let thr = 0.5 * (pair[0] + pair[1]);
        let left: Vec<f64> = xs.iter().zip(&y).filter(|(x, _)| **x < thr).map(|(_, y)| *y).collect();
        let right: Vec<f64> = xs.iter().zip(&y).filter(|(x, _)| **x >= thr).map(|(_, y)| *y).collect();
        let s = sse(&left) + sse(&right);
        if s < best.0 {
            best = (s, thr);
        }
    }
    let below = sorted.iter().copied().filter(|&v| v < 0.0).fold(f64::MIN, f64::max);
    let above = sorted.iter().copied().find(|&v| v >= 0.0).unwrap();
    assert_eq!(t.threshold[0], best.1);
    assert!(below < t.threshold[0] && t.threshold[0] <= above);
    let (l, r) = (t.left[0] as usize, t.right[0] as usize);
    assert_eq!((t.value[l], t.value[r]), (10.0, 20.0));
}

#[test]
fn tree_predictions_stay_within_target_range() {
    let (x, y) = random_data(41, 120, 3);
    let m = fit_tree(&x, &y, &LearnerConfig { max_depth: 8, ..LearnerConfig::tree() }).unwrap();
    let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let (probe, _) = random_data(42, 200, 3);
    for p in m.predict(&probe).unwrap() {
        assert!(lo <= p && p <= hi);
    }
}

#[test]
fn single_unsampled_forest_equals_tree() {
    let (x, y) = random_data(51, 90, 3);
    let c = LearnerConfig {
        n_estimators: 1,
        max_depth: 5,
        lambda_l2: 0.0,
        ..no_sampling(LearnerKind::Forest)
    };
    let forest = fit_forest(&x, &y, &c).unwrap().predict(&x).unwrap();
    let tree = fit_tree(&x, &y, &c).unwrap().predict(&x).unwrap();
    assert_eq!(forest, tree);
}

#[test]
fn forest_on_constant_target_is_constant() {
    let (x, _) = random_data(52, 60, 3);
    let y = vec![42.5; 60];
    let m = fit_forest(&x, &y, &LearnerConfig { n_estimators: 15, ..LearnerConfig::forest() }).unwrap();
    assert!(m.predict(&x).unwrap().iter().all(|&p| p == 42.5));
}

#[test]
fn forest_prediction_is_mean_of_members() {
    let (x, y) = random_data(53, 100, 4);
    let m = fit_forest(&x, &y, &LearnerConfig { n_estimators: 9, ..LearnerConfig::forest() }).unwrap();
    let ModelParams::Trees { trees, .. } = &m.params else { panic!() };
    let (probe, _) = random_data(54, 20, 4);
    for row in probe.rows() {
        let by_hand = trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / trees.len() as f64;
        assert!((m.predict_row(row) - by_hand).abs() < 1e-9);
    }
}

#[test]
fn gbt_without_stages_predicts_mean() {
    let (x, y) = random_data(61, 30, 2);
    let m = fit_gbt(&x, &y, &LearnerConfig { n_estimators: 0, ..LearnerConfig::xgb() }).unwrap();
    assert!(m.predict(&x).unwrap().iter().all(|&p| p == m.base_score));
}

#[test]
fn one_full_stage_gbt_equals_one_tree() {
    let xs: Vec<f64> = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    let y = vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
    let x = Matrix::from_columns(&[xs], 8).unwrap();
    let c = LearnerConfig {
        n_estimators: 1,
        learning_rate: 1.0,
        max_depth: 3,
        lambda_l2: 0.0,
        alpha: 0.0,
        ..no_sampling(LearnerKind::Gbt)
    };
    let boosted = fit_gbt(&x, &y, &c).unwrap().predict(&x).unwrap();
    let tree = fit_tree(&x, &y, &c).unwrap().predict(&x).unwrap();
    for (a, b) in boosted.iter().zip(&tree) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn gbt_training_error_never_increases_without_sampling() {
    let (x, y) = random_data(71, 150, 3);
    let c = LearnerConfig { n_estimators: 60, ..no_sampling(LearnerKind::Gbt) };
    let (_, stages) = fit_gbt_traced(&x, &y, &c).unwrap();
    assert_eq!(stages.len(), 61);
    for pair in stages.windows(2) {
        assert!(pair[1] <= pair[0], "{pair:?}");
    }
}

#[test]
fn predict_checks_arity() {
    let (x, y) = random_data(81, 20, 3);
    let m = fit_ols(&x, &y, 1e-8).unwrap();
    let (narrow, _) = random_data(81, 5, 2);
    assert!(m.predict(&narrow).is_err());
}

#[test]
fn fits_are_identical_across_thread_counts() {
    let (x, y) = random_data(91, 200, 4);
    let fit_all = || {
        LearnerConfig::default_suite()
            .iter()
            .map(|c| {
                let c = LearnerConfig { n_estimators: c.n_estimators.min(40), ..c.clone() };
                Model::fit_matrix(&c, &x, &y).unwrap()
            })
            .collect::<Vec<_>>()
    };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(fit_all);
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(fit_all);
    assert_eq!(one, four);
}

#[test]
fn unsampled_fits_ignore_row_order() {
    let (x, y) = random_data(92, 80, 3);
    let order: Vec<usize> = (0..80).rev().collect();
    let xr = x.select_rows(&order);
    let yr: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    for kind in [LearnerKind::Tree, LearnerKind::Gbt, LearnerKind::Forest] {
        let c = LearnerConfig { n_estimators: 10, ..no_sampling(kind) };
        let a = Model::fit_matrix(&c, &x, &y).unwrap().predict(&x).unwrap();
        let b = Model::fit_matrix(&c, &xr, &yr).unwrap().predict(&x).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9, "{kind:?}: {p} vs {q}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn training_error_never_exceeds_variance(seed in any::<u64>(), n in 10usize..80) {
        let (x, y) = random_data(seed, n, 3);
        let var = variance(&y);
        for c in LearnerConfig::default_suite() {
            let c = LearnerConfig { n_estimators: c.n_estimators.min(30), ..c };
            let m = Model::fit_matrix(&c, &x, &y).unwrap();
            let pred = m.predict(&x).unwrap();
            prop_assert!(pred.iter().all(|p| p.is_finite()));
            prop_assert!(mse(&pred, &y) <= var + 1e-9, "{}: {} > {}", c.label, mse(&pred, &y), var);
        }
    }
}
