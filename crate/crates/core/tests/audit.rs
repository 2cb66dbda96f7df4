//! End-to-end audits on synthetic and hand-built frames.

use fairscope::alternation::AlternationSpec;
use fairscope::audit::{bias_table, run_audit, run_fold, AuditConfig, AuditMode};
use fairscope::ensemble::StackSpec;
use fairscope::ingest::{make_folds, Column, ColumnData, ColumnKind, Frame};
use fairscope::learners::LearnerConfig;
use fairscope::synth::{generate, SynthAttribute, SynthSpec};
use fairscope::Error;

fn small_xgb() -> LearnerConfig {
    LearnerConfig { n_estimators: 40, ..LearnerConfig::xgb() }
}

fn small_forest() -> LearnerConfig {
    LearnerConfig { n_estimators: 20, max_depth: 8, ..LearnerConfig::forest() }
}

fn small_suite() -> Vec<LearnerConfig> {
    vec![small_xgb(), small_forest(), LearnerConfig::ols(), LearnerConfig::lasso()]
}

fn population(gap: f64, n_rows: usize) -> Frame {
    generate(&SynthSpec {
        n_rows,
        coefficients: vec![40.0, -25.0, 10.0],
        binary_attributes: vec![
            SynthAttribute::new("g", 0.5, gap),
            SynthAttribute::new("h", 0.3, 0.0),
            SynthAttribute::new("k", 0.6, 0.0),
        ],
        base_wage: 800.0,
        noise_sigma: 50.0,
        seed: 5,
        target_name: "wage".into(),
    })
    .unwrap()
}

fn specs() -> Vec<AlternationSpec> {
    ["g", "h", "k"].iter().map(|a| AlternationSpec::new(a, "0", "1")).collect()
}

fn config(learners: Vec<LearnerConfig>, k: usize) -> AuditConfig {
    AuditConfig { k, ..AuditConfig::new(specs(), learners) }
}

fn score(report: &fairscope::audit::AuditReport, attr: &str, learner: &str) -> f64 {
    report.attribute(attr).unwrap().learner(learner).unwrap().average_kl
}

#[test]
fn no_gap_scores_near_zero() {
    let r = run_audit(&population(0.0, 3000), &config(small_suite(), 5)).unwrap();
    for a in &r.attributes {
        for l in &a.learners {
            assert!(l.average_kl < 0.01, "{} {}: {}", a.attribute, l.learner, l.average_kl);
            assert!(!l.pba_flag);
        }
    }
}

#[test]
fn injected_gap_is_flagged_and_separated() {
    let r = run_audit(&population(150.0, 3000), &config(small_suite(), 5)).unwrap();
    for l in &r.attribute("g").unwrap().learners {
        assert!(l.pba_flag && l.average_kl > 0.05, "{}: {}", l.learner, l.average_kl);
        let others = ["h", "k"].iter().map(|a| score(&r, a, &l.learner)).fold(0.0, f64::max);
        assert!(l.average_kl >= 5.0 * others, "{}: {} vs {}", l.learner, l.average_kl, others);
        // Code 1 carries the gap, so alternation moves the groups towards each other.
        assert!(l.mean_alternated[0] > l.mean_original[0] + 50.0);
        assert!(l.mean_alternated[1] < l.mean_original[1] - 50.0);
    }
}

#[test]
fn score_grows_with_gap() {
    let learners = vec![small_xgb(), LearnerConfig::ols()];
    let mut last = [0.0, 0.0];
    for gap in [0.0, 50.0, 150.0, 300.0] {
        let r = run_audit(&population(gap, 2000), &config(learners.clone(), 5)).unwrap();
        for (i, l) in learners.iter().enumerate() {
            let s = score(&r, "g", &l.label);
            assert!(s >= last[i], "{} at gap {gap}: {s} < {}", l.label, last[i]);
            last[i] = s;
        }
    }
}

fn orthogonal_frame(n: usize) -> Frame {
    // a alternates within each pair of equal x values, so it is orthogonal to
    // x after centering and the target is exactly affine in x.
    let x: Vec<f64> = (0..n).map(|i| (i / 2) as f64).collect();
    let a: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.5 * v + 300.0).collect();
    Frame::from_parts(
        vec![
            Column { name: "x".into(), kind: ColumnKind::Numeric, data: ColumnData::Numeric(x) },
            Column { name: "a".into(), kind: ColumnKind::CategoricalBinary, data: ColumnData::Binary(a) },
        ],
        "wage",
        y,
    )
    .unwrap()
}

#[test]
fn zero_weight_attribute_scores_zero() {
    let f = orthogonal_frame(200);
    let c = AuditConfig { k: 5, ..AuditConfig::new(vec![AlternationSpec::new("a", "0", "1")], vec![LearnerConfig::ols()]) };
    let r = run_audit(&f, &c).unwrap();
    let s = score(&r, "a", "LinearR");
    assert!(s < 1e-9, "{s}");
}

#[test]
fn retraining_a_linear_model_on_flipped_codes_changes_nothing() {
    // Flipping a binary column is a reparametrization for OLS: the refit
    // moves the intercept and negates the weight, so predictions agree.
    let f = population(150.0, 800);
    let c = AuditConfig {
        k: 4,
        mode: AuditMode::RetrainAlternated,
        ..AuditConfig::new(specs(), vec![LearnerConfig::ols()])
    };
    let r = run_audit(&f, &c).unwrap();
    for a in ["g", "h", "k"] {
        assert!(score(&r, a, "LinearR") < 1e-9, "{a}");
    }
    let predict = run_audit(&f, &AuditConfig { mode: AuditMode::PredictAlternated, ..c }).unwrap();
    assert!(score(&predict, "g", "LinearR") > 1.0);
}

#[test]
fn ten_rows_two_folds() {
    let f = orthogonal_frame(10);
    let c = AuditConfig { k: 2, ..AuditConfig::new(vec![AlternationSpec::new("a", "0", "1")], vec![LearnerConfig::ols()]) };
    let r = run_audit(&f, &c).unwrap();
    let l = r.attribute("a").unwrap().learner("LinearR").unwrap();
    let plan = make_folds(10, 2, 0).unwrap();
    assert_eq!(plan.fold_sizes(), vec![5, 5]);
    assert_eq!(l.folds.len() + l.skipped_folds.len(), 2);
}

#[test]
fn group_counts_and_pooled_means_are_consistent() {
    let f = population(150.0, 1500);
    let r = run_audit(&f, &config(vec![small_xgb()], 5)).unwrap();
    let a = r.attribute("g").unwrap();
    let l = a.learner("XGB").unwrap();
    let mut counts = [0usize; 2];
    let mut sums = [[0.0; 2]; 2];
    for fold in &l.folds {
        for g in 0..2 {
            assert_eq!(fold.original[g].count, fold.alternated[g].count);
            counts[g] += fold.original[g].count;
            sums[0][g] += fold.original[g].mu * fold.original[g].count as f64;
            sums[1][g] += fold.alternated[g].mu * fold.alternated[g].count as f64;
        }
    }
    assert_eq!(counts, a.group_counts);
    assert_eq!(counts[0] + counts[1], r.n_rows);
    for g in 0..2 {
        assert!((sums[0][g] / counts[g] as f64 - l.mean_original[g]).abs() < 1e-9);
        assert!((sums[1][g] / counts[g] as f64 - l.mean_alternated[g]).abs() < 1e-9);
    }
    // Group actual means weighted by size give the overall target mean.
    let pooled = (a.actual_means[0] * counts[0] as f64 + a.actual_means[1] * counts[1] as f64) / r.n_rows as f64;
    assert!((pooled - r.target_mean).abs() < 1e-9);
    let kl_mean = l.folds.iter().map(|f| f.kl[0] + f.kl[1]).sum::<f64>() / (2 * l.folds.len()) as f64;
    assert!((kl_mean - l.average_kl).abs() < 1e-12);
}

#[test]
fn same_report_on_one_and_four_threads() {
    let f = population(150.0, 1200);
    let mut c = config(vec![small_xgb(), small_forest(), LearnerConfig::ols()], 4);
    c.stack = Some(StackSpec {
        members: vec![small_xgb(), small_forest(), LearnerConfig::ols()],
        weights: vec![4.0, 4.0, 1.0],
        ..StackSpec::tree_heavy()
    });
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_audit(&f, &c).unwrap().to_json().unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
}

#[test]
fn rare_group_folds_are_skipped_with_a_warning() {
    let mut f = orthogonal_frame(40);
    let bits: Vec<u8> = (0..40).map(|i| u8::from(i == 7)).collect();
    f = Frame::from_parts(
        vec![
            f.column("x").unwrap().clone(),
            Column { name: "a".into(), kind: ColumnKind::CategoricalBinary, data: ColumnData::Binary(bits) },
        ],
        "wage",
        f.target().to_vec(),
    )
    .unwrap();
    let c = AuditConfig { k: 5, ..AuditConfig::new(vec![AlternationSpec::new("a", "0", "1")], vec![LearnerConfig::ols()]) };
    let r = run_audit(&f, &c).unwrap();
    let l = r.attribute("a").unwrap().learner("LinearR").unwrap();
    assert_eq!(l.folds.len(), 1);
    assert_eq!(l.skipped_folds.len(), 4);
    assert_eq!(r.warnings.len(), 4);

    let plan = make_folds(40, 5, 0).unwrap();
    let empty = (0..5).find(|&k| !plan.test_indices(k).contains(&7)).unwrap();
    let err = run_fold(
        empty,
        &f.select_rows(&plan.train_indices(empty)),
        &f.select_rows(&plan.test_indices(empty)),
        &LearnerConfig::ols(),
        &AlternationSpec::new("a", "0", "1"),
        AuditMode::PredictAlternated,
    )
    .unwrap_err();
    assert!(matches!(err, Error::EmptyGroup(a) if a == "a"));
}

#[test]
fn bias_table_has_a_row_per_predictor() {
    let f = population(150.0, 1000);
    let mut c = config(vec![small_xgb(), LearnerConfig::ols()], 3);
    c.stack = Some(StackSpec {
        members: vec![small_xgb(), LearnerConfig::ols()],
        weights: vec![4.0, 1.0],
        ..StackSpec::tree_heavy()
    });
    let r = run_audit(&f, &c).unwrap();
    let t = bias_table(&r);
    assert_eq!(t.attributes, vec!["g", "h", "k"]);
    let labels: Vec<&str> = t.scores.iter().map(|s| s.learner.as_str()).collect();
    assert_eq!(labels, vec!["XGB", "LinearR", "Stack"]);
    // The stack is audited on the majority-flagged attribute only.
    assert!(t.scores[2].scores[0].unwrap() > 0.05);
    assert_eq!(&t.scores[2].scores[1..], &[None, None]);
    let csv = t.scores_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().last().unwrap().ends_with(",,"));
    assert_eq!(t.groups_csv().lines().count(), 1 + 3 * 2 + 1);
}

#[test]
fn explicit_stack_attributes_are_honoured() {
    let f = population(0.0, 600);
    let mut c = config(vec![LearnerConfig::ols()], 3);
    c.stack = Some(StackSpec {
        members: vec![LearnerConfig::ols(), LearnerConfig::lasso()],
        weights: vec![1.0, 1.0],
        attributes: Some(vec!["h".into()]),
        ..StackSpec::tree_heavy()
    });
    let r = run_audit(&f, &c).unwrap();
    let s = r.stacked.as_ref().unwrap();
    assert_eq!(s.attributes.len(), 1);
    assert_eq!(s.attributes[0].attribute, "h");
    assert!(r.stacked_attribute("g").is_none());
}

#[test]
fn invalid_configs_are_rejected() {
    let f = population(0.0, 100);
    let c = config(vec![LearnerConfig::ols()], 1);
    assert!(matches!(run_audit(&f, &c), Err(Error::InvalidConfig { field, .. }) if field == "k"));
    let c = AuditConfig { k: 3, ..AuditConfig::new(vec![AlternationSpec::new("x1", "0", "1")], vec![LearnerConfig::ols()]) };
    assert!(run_audit(&f, &c).is_err());
    let c = AuditConfig { k: 3, ..AuditConfig::new(vec![AlternationSpec::new("zz", "0", "1")], vec![LearnerConfig::ols()]) };
    assert!(run_audit(&f, &c).is_err());
}
