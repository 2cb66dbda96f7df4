//! Greedy binary regression trees shared by the single-tree, forest and
//! boosting learners.
//!
//! Splits are found by exact enumeration over per-feature sorted row orders
//! that are stably partitioned as the tree grows, so each level costs
//! O(rows x features). Split quality is the regularized squared-loss score
//! `T(G)^2 / (H + lambda)`, where `G` is the weighted residual sum, `H` the
//! weight and `T` soft-thresholding by `alpha`; with `lambda = alpha = 0`
//! this is plain variance reduction and leaves hold child means.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Flat tree arrays. `feature[i] < 0` marks a leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature: Vec<i32>,
    pub threshold: Vec<f64>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub value: Vec<f64>,
}

impl Tree {
    fn leaf(value: f64) -> Self {
        Tree {
            feature: vec![-1],
            threshold: vec![0.0],
            left: vec![0],
            right: vec![0],
            value: vec![value],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.feature.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.feature.iter().filter(|&&f| f < 0).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, node: usize) -> usize {
            if t.feature[node] < 0 {
                0
            } else {
                1 + walk(t, t.left[node] as usize).max(walk(t, t.right[node] as usize))
            }
        }
        walk(self, 0)
    }

    /// Rows with `x[feature] < threshold` go left.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            let f = self.feature[node];
            if f < 0 {
                return self.value[node];
            }
            node = if row[f as usize] < self.threshold[node] {
                self.left[node] as usize
            } else {
                self.right[node] as usize
            };
        }
    }

    pub(crate) fn scale_values(&mut self, factor: f64) {
        for v in &mut self.value {
            *v *= factor;
        }
    }

    fn push_node(&mut self) -> usize {
        self.feature.push(-1);
        self.threshold.push(0.0);
        self.left.push(0);
        self.right.push(0);
        self.value.push(0.0);
        self.feature.len() - 1
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub lambda: f64,
    pub alpha: f64,
    /// Fraction of the allowed features drawn at every node.
    pub node_colsample: f64,
}

impl GrowParams {
    pub(crate) fn cart(max_depth: usize, min_child_weight: f64) -> Self {
        GrowParams {
            max_depth,
            min_child_weight,
            lambda: 0.0,
            alpha: 0.0,
            node_colsample: 1.0,
        }
    }
}

/// Column-major features with each column's row order sorted by value.
pub(crate) struct SortedColumns {
    pub columns: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub(crate) fn new(x: &Matrix) -> Self {
        let columns = x.columns();
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        SortedColumns { columns, order }
    }

    pub(crate) fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub(crate) fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

fn score(g: f64, h: f64, p: &GrowParams) -> f64 {
    let t = soft_threshold(g, p.alpha);
    t * t / (h + p.lambda)
}

fn leaf_value(g: f64, h: f64, p: &GrowParams) -> f64 {
    let denom = h + p.lambda;
    if denom > 0.0 {
        soft_threshold(g, p.alpha) / denom
    } else {
        0.0
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Grows one tree on targets `g` with per-row weights `w` (zero excludes a row),
/// using only `features` (ascending).
pub(crate) fn grow(
    data: &SortedColumns,
    g: &[f64],
    w: &[f64],
    features: &[usize],
    params: &GrowParams,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut orders: Vec<Vec<u32>> = features
        .iter()
        .map(|&f| {
            data.order[f]
                .iter()
                .copied()
                .filter(|&r| w[r as usize] > 0.0)
                .collect()
        })
        .collect();
    let n_active = orders.first().map_or_else(
        || w.iter().filter(|&&x| x > 0.0).count(),
        Vec::len,
    );
    if features.is_empty() || n_active == 0 {
        let (gs, hs) = g
            .iter()
            .zip(w)
            .fold((0.0, 0.0), |(a, b), (gi, wi)| (a + gi * wi, b + wi));
        return Tree::leaf(leaf_value(gs, hs, params));
    }

    let mut tree = Tree {
        feature: Vec::new(),
        threshold: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
        value: Vec::new(),
    };
    let root = tree.push_node();
    let mut goes_left = vec![false; data.n_rows()];
    let mut scratch: Vec<u32> = Vec::with_capacity(n_active);
    let mut stack = vec![(root, 0usize, n_active, 0usize)];
    let n_candidates = ((params.node_colsample * features.len() as f64).round() as usize)
        .clamp(1, features.len());

    while let Some((node, start, end, depth)) = stack.pop() {
        let (mut gsum, mut hsum, mut g2) = (0.0, 0.0, 0.0);
        for &r in &orders[0][start..end] {
            let (gi, wi) = (g[r as usize], w[r as usize]);
            gsum += wi * gi;
            hsum += wi;
            g2 += wi * gi * gi;
        }
        tree.value[node] = leaf_value(gsum, hsum, params);
        if depth >= params.max_depth || end - start < 2 {
            continue;
        }

        let candidates: Vec<usize> = if n_candidates < features.len() {
            let mut picked = index::sample(rng, features.len(), n_candidates).into_vec();
            picked.sort_unstable();
            picked
        } else {
            (0..features.len()).collect()
        };

        let parent = score(gsum, hsum, params);
        let min_gain = 1e-12 * g2.max(f64::MIN_POSITIVE);
        let mut best: Option<Split> = None;
        for &slot in &candidates {
            let col = &data.columns[features[slot]];
            let seg = &orders[slot][start..end];
            let (mut gl, mut hl) = (0.0, 0.0);
            for pair in seg.windows(2) {
                let (r, next) = (pair[0] as usize, pair[1] as usize);
                gl += w[r] * g[r];
                hl += w[r];
                let (lo, hi) = (col[r], col[next]);
                if lo >= hi {
                    continue;
                }
                let hr = hsum - hl;
                if hl < params.min_child_weight || hr < params.min_child_weight {
                    continue;
                }
                let gain = score(gl, hl, params) + score(gsum - gl, hr, params) - parent;
                if gain > min_gain && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid > lo { mid } else { hi };
                    best = Some(Split {
                        feature: slot,
                        threshold,
                        gain,
                    });
                }
            }
        }
        let Some(split) = best else { continue };

        let col = &data.columns[features[split.feature]];
        let mut n_left = 0;
        for &r in &orders[0][start..end] {
            let left = col[r as usize] < split.threshold;
            goes_left[r as usize] = left;
            n_left += usize::from(left);
        }
        for order in orders.iter_mut() {
            let seg = &mut order[start..end];
            scratch.clear();
            let mut k = 0;
            for i in 0..seg.len() {
                let r = seg[i];
                if goes_left[r as usize] {
                    seg[k] = r;
                    k += 1;
                } else {
                    scratch.push(r);
                }
            }
            seg[k..].copy_from_slice(&scratch);
        }

        let left = tree.push_node();
        let right = tree.push_node();
        tree.feature[node] = features[split.feature] as i32;
        tree.threshold[node] = split.threshold;
        tree.left[node] = left as u32;
        tree.right[node] = right as u32;
        stack.push((right, start + n_left, end, depth + 1));
        stack.push((left, start, start + n_left, depth + 1));
    }
    tree
}
