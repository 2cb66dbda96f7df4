use rand::seq::index;

use super::config::LearnerConfig;
use super::tree::{grow, GrowParams, SortedColumns, Tree};
use crate::matrix::Matrix;
use crate::rng::stream_rng;

pub(crate) struct Boosted {
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Training MSE before the first stage and after every stage.
    pub stage_mse: Vec<f64>,
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64
}

/// Sorted random subset holding a `fraction` of `0..n` (at least one).
fn sample_sorted(rng: &mut rand_chacha::ChaCha8Rng, n: usize, fraction: f64) -> Vec<usize> {
    let m = ((fraction * n as f64).round() as usize).clamp(1, n);
    if m == n {
        return (0..n).collect();
    }
    let mut picked = index::sample(rng, n, m).into_vec();
    picked.sort_unstable();
    picked
}

/// Squared-loss boosting from the target mean. Each stage fits a tree to the
/// current residuals on a row subsample (without replacement) using a
/// per-tree column subsample, then adds the tree scaled by the learning rate.
/// Stages whose tree cannot split are dropped.
pub(crate) fn fit_boosted(x: &Matrix, y: &[f64], config: &LearnerConfig) -> Boosted {
    let n = y.len();
    let base_score = y.iter().sum::<f64>() / n as f64;
    let data = SortedColumns::new(x);
    let params = GrowParams {
        max_depth: config.max_depth,
        min_child_weight: config.min_child_weight,
        lambda: config.lambda_l2,
        alpha: config.alpha,
        node_colsample: 1.0,
    };
    let mut pred = vec![base_score; n];
    let mut stage_mse = vec![mse(&pred, y)];
    let mut trees = Vec::with_capacity(config.n_estimators);
    let mut resid = vec![0.0; n];
    let mut w = vec![0.0; n];
    for stage in 0..config.n_estimators {
        let mut rng = stream_rng(config.seed, 1 + stage as u64);
        let rows = sample_sorted(&mut rng, n, config.subsample);
        let features = sample_sorted(&mut rng, data.n_features(), config.colsample);
        w.fill(0.0);
        for &r in &rows {
            w[r] = 1.0;
        }
        for ((r, t), p) in resid.iter_mut().zip(y).zip(&pred) {
            *r = t - p;
        }
        let mut tree = grow(&data, &resid, &w, &features, &params, &mut rng);
        if tree.n_nodes() == 1 {
            // No admissible split: the stage would only shift every
            // prediction by the subsample's mean residual.
            stage_mse.push(*stage_mse.last().expect("seeded above"));
            continue;
        }
        tree.scale_values(config.learning_rate);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += tree.predict_row(x.row(i));
        }
        stage_mse.push(mse(&pred, y));
        trees.push(tree);
    }
    Boosted {
        base_score,
        trees,
        stage_mse,
    }
}
