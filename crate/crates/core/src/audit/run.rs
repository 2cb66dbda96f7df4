use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AuditConfig, AuditMode};
use crate::alternation::{alternate, classify_pba, AlternationSpec};
use crate::divergence::{fit_normal, kl_gaussian, GroupDensity};
use crate::ensemble::combine_predictions;
use crate::error::{Error, Result};
use crate::ingest::{make_folds, Frame, FoldPlan};
use crate::learners::{LearnerConfig, Model};
use crate::rng::mix_seed;

/// One test fold of one (predictor, attribute) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold_index: usize,
    /// Densities of the original predictions, per original group.
    pub original: [GroupDensity; 2],
    /// Densities of the alternated predictions, per original group.
    pub alternated: [GroupDensity; 2],
    /// `kl(original[g], alternated[g])` for groups 0 and 1.
    pub kl: [f64; 2],
}

impl FoldResult {
    pub fn mean_original(&self) -> [f64; 2] {
        [self.original[0].mu, self.original[1].mu]
    }

    pub fn mean_alternated(&self) -> [f64; 2] {
        [self.alternated[0].mu, self.alternated[1].mu]
    }
}

/// Audit outcome of one predictor on one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerAttributeResult {
    pub learner: String,
    /// Mean out-of-fold prediction per original group, over all folds.
    pub mean_original: [f64; 2],
    /// Mean alternated prediction per original group, over all folds.
    pub mean_alternated: [f64; 2],
    pub folds: Vec<FoldResult>,
    /// Folds left out because one group had no test samples.
    pub skipped_folds: Vec<usize>,
    /// Mean of both per-group divergences over all kept folds.
    pub average_kl: f64,
    pub pba_flag: bool,
}

impl LearnerAttributeResult {
    /// Per-fold divergence pairs in fold order.
    pub fn kl_series(&self) -> Vec<[f64; 2]> {
        self.folds.iter().map(|f| f.kl).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeResult {
    pub attribute: String,
    pub group_names: [String; 2],
    pub group_counts: [usize; 2],
    /// Mean of the target per original group.
    pub actual_means: [f64; 2],
    pub learners: Vec<LearnerAttributeResult>,
}

impl AttributeResult {
    pub fn learner(&self, label: &str) -> Option<&LearnerAttributeResult> {
        self.learners.iter().find(|l| l.learner == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedResult {
    pub label: String,
    pub weights: Vec<f64>,
    pub attributes: Vec<AttributeResult>,
}

/// Run facts that are not part of the configuration. Timestamps and thread
/// counts are filled in by front ends and may be left empty for
/// reproducible output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub k: usize,
    pub mode: AuditMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: AuditConfig,
    pub n_rows: usize,
    pub dataset_digest: String,
    pub target_mean: f64,
    pub attributes: Vec<AttributeResult>,
    pub stacked: Option<StackedResult>,
    pub warnings: Vec<String>,
    pub metadata: RunMetadata,
}

impl AuditReport {
    pub fn attribute(&self, name: &str) -> Option<&AttributeResult> {
        self.attributes.iter().find(|a| a.attribute == name)
    }

    pub fn stacked_attribute(&self, name: &str) -> Option<&LearnerAttributeResult> {
        self.stacked
            .as_ref()?
            .attributes
            .iter()
            .find(|a| a.attribute == name)?
            .learners
            .first()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Out-of-fold predictions for one (predictor, fold): the original test
/// fold and, per configured attribute, the alternated test fold.
struct Cell {
    original: Vec<f64>,
    alternated: Vec<Vec<f64>>,
}

/// Densities and divergences for one fold, or `None` when a group is empty.
fn fold_result(fold_index: usize, groups: &[u8], original: &[f64], alternated: &[f64]) -> Result<Option<FoldResult>> {
    let mut split: [[Vec<f64>; 2]; 2] = Default::default();
    for ((&g, &p), &q) in groups.iter().zip(original).zip(alternated) {
        split[0][g as usize].push(p);
        split[1][g as usize].push(q);
    }
    if split[0].iter().any(Vec::is_empty) {
        return Ok(None);
    }
    let original = [fit_normal(&split[0][0])?, fit_normal(&split[0][1])?];
    let alternated = [fit_normal(&split[1][0])?, fit_normal(&split[1][1])?];
    let kl = [
        kl_gaussian(&original[0], &alternated[0]),
        kl_gaussian(&original[1], &alternated[1]),
    ];
    Ok(Some(FoldResult {
        fold_index,
        original,
        alternated,
        kl,
    }))
}

/// Fits `learner` on `train`, predicts `test` and its alternation under
/// `spec`, and compares the per-group prediction densities.
///
/// Groups are taken from the test fold's original attribute codes. Fails
/// with [`Error::EmptyGroup`] when a group has no test samples.
pub fn run_fold(
    fold_index: usize,
    train: &Frame,
    test: &Frame,
    learner: &LearnerConfig,
    spec: &AlternationSpec,
    mode: AuditMode,
) -> Result<FoldResult> {
    let cell = fit_cell(train, test, learner, std::slice::from_ref(spec), mode)?;
    let groups = test.group_labels(&spec.attribute)?;
    fold_result(fold_index, groups, &cell.original, &cell.alternated[0])?
        .ok_or_else(|| Error::EmptyGroup(spec.attribute.clone()))
}

fn fit_cell(train: &Frame, test: &Frame, learner: &LearnerConfig, specs: &[AlternationSpec], mode: AuditMode) -> Result<Cell> {
    let model = Model::fit(learner, train)?;
    let original = model.predict_frame(test)?;
    let alternated = specs
        .iter()
        .map(|spec| {
            let alt_test = alternate(test, spec)?;
            match mode {
                AuditMode::PredictAlternated => model.predict_frame(&alt_test),
                AuditMode::RetrainAlternated => {
                    Model::fit(learner, &alternate(train, spec)?)?.predict_frame(&alt_test)
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(Cell { original, alternated })
}

/// Learner configuration used on one fold: the seed is derived from the
/// learner's own seed, the run seed and the fold index.
fn fold_config(learner: &LearnerConfig, run_seed: u64, fold: usize) -> LearnerConfig {
    LearnerConfig {
        seed: mix_seed(mix_seed(learner.seed, run_seed), fold as u64),
        ..learner.clone()
    }
}

/// Fits every (predictor, fold) pair concurrently; results are in
/// predictor-major, fold-minor order.
fn fit_all(frame: &Frame, plan: &FoldPlan, learners: &[LearnerConfig], config: &AuditConfig) -> Result<Vec<Vec<Cell>>> {
    let k = plan.k();
    let flat: Vec<Cell> = (0..learners.len() * k)
        .into_par_iter()
        .map(|t| {
            let (li, f) = (t / k, t % k);
            let train = frame.select_rows(&plan.train_indices(f));
            let test = frame.select_rows(&plan.test_indices(f));
            let cfg = fold_config(&learners[li], config.seed, f);
            fit_cell(&train, &test, &cfg, &config.pba_specs, config.mode)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<Cell>> = Vec::with_capacity(learners.len());
    let mut it = flat.into_iter();
    for _ in 0..learners.len() {
        out.push(it.by_ref().take(k).collect());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    label: &str,
    cells: &[Cell],
    plan: &FoldPlan,
    groups: &[u8],
    attr_index: usize,
    attribute: &str,
    threshold: f64,
    warnings: &mut Vec<String>,
) -> Result<LearnerAttributeResult> {
    let mut sums = [[0.0f64; 2]; 2];
    let mut counts = [0usize; 2];
    let mut folds = Vec::new();
    let mut skipped_folds = Vec::new();
    for (f, cell) in cells.iter().enumerate() {
        let test = plan.test_indices(f);
        let fold_groups: Vec<u8> = test.iter().map(|&i| groups[i]).collect();
        let alternated = &cell.alternated[attr_index];
        for ((&g, &p), &q) in fold_groups.iter().zip(&cell.original).zip(alternated) {
            sums[0][g as usize] += p;
            sums[1][g as usize] += q;
            counts[g as usize] += 1;
        }
        match fold_result(f, &fold_groups, &cell.original, alternated)? {
            Some(r) => folds.push(r),
            None => {
                skipped_folds.push(f);
                warnings.push(format!(
                    "{label} / {attribute}: fold {f} skipped, one group has no test samples"
                ));
            }
        }
    }
    if folds.is_empty() {
        return Err(Error::EmptyGroup(attribute.to_string()));
    }
    let total: f64 = folds.iter().map(|r| r.kl[0] + r.kl[1]).sum();
    let average_kl = total / (2 * folds.len()) as f64;
    let mean = |s: f64, c: usize| if c > 0 { s / c as f64 } else { f64::NAN };
    Ok(LearnerAttributeResult {
        learner: label.to_string(),
        mean_original: [mean(sums[0][0], counts[0]), mean(sums[0][1], counts[1])],
        mean_alternated: [mean(sums[1][0], counts[0]), mean(sums[1][1], counts[1])],
        folds,
        skipped_folds,
        average_kl,
        pba_flag: classify_pba(average_kl, threshold)?,
    })
}

fn attribute_shell(frame: &Frame, spec: &AlternationSpec) -> Result<AttributeResult> {
    let groups = frame.group_labels(&spec.attribute)?;
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for (&g, &y) in groups.iter().zip(frame.target()) {
        sums[g as usize] += y;
        counts[g as usize] += 1;
    }
    Ok(AttributeResult {
        attribute: spec.attribute.clone(),
        group_names: spec.group_names.clone(),
        group_counts: counts,
        actual_means: [sums[0] / counts[0] as f64, sums[1] / counts[1] as f64],
        learners: Vec::new(),
    })
}

/// Runs the full audit: one fold plan, every learner on every fold, each
/// configured attribute alternated, and optionally the weighted stack.
///
/// The stack reuses the fits of members whose configuration equals a
/// configured learner. It is audited on `stack.attributes` when given,
/// otherwise on the attributes flagged by a majority of the learners.
pub fn run_audit(frame: &Frame, config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    for spec in &config.pba_specs {
        spec.check(frame)?;
    }
    let plan = make_folds(frame.n_rows(), config.k, config.seed)?;

    let mut extra: Vec<LearnerConfig> = Vec::new();
    if let Some(stack) = &config.stack {
        for m in &stack.members {
            if !config.learners.contains(m) && !extra.contains(m) {
                extra.push(m.clone());
            }
        }
    }
    let all_learners: Vec<LearnerConfig> = config.learners.iter().chain(&extra).cloned().collect();
    let cells = fit_all(frame, &plan, &all_learners, config)?;

    let mut warnings = Vec::new();
    let mut attributes = Vec::with_capacity(config.pba_specs.len());
    for (ai, spec) in config.pba_specs.iter().enumerate() {
        let groups = frame.group_labels(&spec.attribute)?;
        let mut result = attribute_shell(frame, spec)?;
        for (li, learner) in config.learners.iter().enumerate() {
            result.learners.push(summarize(
                &learner.label,
                &cells[li],
                &plan,
                groups,
                ai,
                &spec.attribute,
                config.pba_threshold,
                &mut warnings,
            )?);
        }
        attributes.push(result);
    }

    let stacked = match &config.stack {
        None => None,
        Some(stack) => {
            let member_index: Vec<usize> = stack
                .members
                .iter()
                .map(|m| all_learners.iter().position(|l| l == m).expect("member was fitted"))
                .collect();
            let stack_cells = (0..plan.k())
                .map(|f| {
                    let pick = |get: &dyn Fn(&Cell) -> &Vec<f64>| {
                        let preds: Vec<Vec<f64>> = member_index.iter().map(|&i| get(&cells[i][f]).clone()).collect();
                        combine_predictions(&preds, &stack.weights)
                    };
                    Ok(Cell {
                        original: pick(&|c| &c.original)?,
                        alternated: (0..config.pba_specs.len())
                            .map(|ai| pick(&|c| &c.alternated[ai]))
                            .collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let chosen: Vec<String> = match &stack.attributes {
                Some(a) => a.clone(),
                None => attributes
                    .iter()
                    .filter(|a| 2 * a.learners.iter().filter(|l| l.pba_flag).count() > a.learners.len())
                    .map(|a| a.attribute.clone())
                    .collect(),
            };
            let mut results = Vec::new();
            for (ai, spec) in config.pba_specs.iter().enumerate() {
                if !chosen.contains(&spec.attribute) {
                    continue;
                }
                let mut result = attribute_shell(frame, spec)?;
                result.learners.push(summarize(
                    &stack.label,
                    &stack_cells,
                    &plan,
                    frame.group_labels(&spec.attribute)?,
                    ai,
                    &spec.attribute,
                    config.pba_threshold,
                    &mut warnings,
                )?);
                results.push(result);
            }
            Some(StackedResult {
                label: stack.label.clone(),
                weights: stack.weights.clone(),
                attributes: results,
            })
        }
    };

    let target = frame.target();
    Ok(AuditReport {
        config: config.clone(),
        n_rows: frame.n_rows(),
        dataset_digest: frame.digest(),
        target_mean: target.iter().sum::<f64>() / target.len() as f64,
        attributes,
        stacked,
        warnings,
        metadata: RunMetadata {
            seed: config.seed,
            k: config.k,
            mode: config.mode,
            ..Default::default()
        },
    })
}
