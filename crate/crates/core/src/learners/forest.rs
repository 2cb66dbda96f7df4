use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::config::LearnerConfig;
use super::tree::{grow, GrowParams, SortedColumns, Tree};
use crate::matrix::Matrix;
use crate::rng::stream_rng;

/// Per-row multiplicities for one forest member.
///
/// With `bootstrap`, `round(subsample * n)` rows are drawn with replacement;
/// otherwise a `subsample` fraction is drawn without replacement, so
/// `subsample = 1` keeps every row exactly once.
fn member_weights<R: Rng>(n: usize, subsample: f64, bootstrap: bool, rng: &mut R) -> Vec<f64> {
    let draws = ((subsample * n as f64).round() as usize).clamp(1, n);
    let mut w = vec![0.0; n];
    if bootstrap {
        for _ in 0..draws {
            w[rng.random_range(0..n)] += 1.0;
        }
    } else if draws == n {
        w.fill(1.0);
    } else {
        for i in index::sample(rng, n, draws) {
            w[i] = 1.0;
        }
    }
    w
}

/// Grows the forest members in parallel; member `t` draws from its own
/// random stream, so the result does not depend on the thread count.
pub(crate) fn fit_forest_trees(x: &Matrix, y: &[f64], config: &LearnerConfig) -> Vec<Tree> {
    let data = SortedColumns::new(x);
    let features: Vec<usize> = (0..data.n_features()).collect();
    let params = GrowParams {
        max_depth: config.max_depth,
        min_child_weight: config.min_child_weight,
        lambda: config.lambda_l2,
        alpha: config.alpha,
        node_colsample: config.colsample,
    };
    (0..config.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(config.seed, 1 + t as u64);
            let w = member_weights(data.n_rows(), config.subsample, config.bootstrap, &mut rng);
            grow(&data, y, &w, &features, &params, &mut rng)
        })
        .collect()
}
