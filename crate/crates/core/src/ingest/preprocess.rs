use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::frame::{ColumnData, Frame, FrameStage, GroupLabels};
use crate::ingest::schema::{ColumnKind, Schema, TrimBasis, TrimRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierCut {
    pub column: String,
    pub percentile: f64,
    pub threshold: f64,
    pub dropped: usize,
}

/// Row accounting for one preprocessing pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSummary {
    pub rows_in: usize,
    pub dropped_missing: usize,
    pub dropped_nonpositive_target: usize,
    pub dropped_outliers: usize,
    pub rows_out: usize,
    pub cuts: Vec<OutlierCut>,
}

impl PreprocessSummary {
    pub fn dropped(&self) -> usize {
        self.dropped_missing + self.dropped_nonpositive_target + self.dropped_outliers
    }
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub frame: Frame,
    pub summary: PreprocessSummary,
}

/// Percentile of `values` (0..=100) by linear interpolation between order statistics.
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * pct / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn keep_rows(frame: &Frame, keep: impl Fn(usize) -> bool) -> (Frame, usize) {
    let rows: Vec<usize> = (0..frame.n_rows()).filter(|&i| keep(i)).collect();
    let dropped = frame.n_rows() - rows.len();
    (frame.select_rows(&rows), dropped)
}

fn trim_values<'a>(frame: &'a Frame, column: &str) -> Result<&'a [f64]> {
    if column == frame.target_name() {
        return Ok(frame.target());
    }
    match frame.column(column).map(|c| &c.data) {
        Some(ColumnData::Numeric(v)) => Ok(v),
        Some(_) => Err(Error::InvalidSchema(format!("trim column `{column}` is not numeric"))),
        None => Err(Error::ColumnNotFound(column.to_string())),
    }
}

fn apply_trims(frame: Frame, rules: &[TrimRule], summary: &mut PreprocessSummary) -> Result<Frame> {
    let mut frame = frame;
    for rule in rules {
        let values = trim_values(&frame, &rule.column)?;
        let threshold = percentile(values, rule.percentile);
        let values = values.to_vec();
        let (next, dropped) = keep_rows(&frame, |i| values[i] <= threshold);
        summary.dropped_outliers += dropped;
        summary.cuts.push(OutlierCut {
            column: rule.column.clone(),
            percentile: rule.percentile,
            threshold,
            dropped,
        });
        frame = next;
    }
    Ok(frame)
}

/// Cleans a raw frame: leakage columns, missing rows, non-positive targets,
/// binary encoding and percentile outlier cuts, in that order. Cuts with a
/// `before-target-filter` basis run ahead of the target filter.
///
/// A frame that is already preprocessed is returned unchanged.
pub fn preprocess(frame: &Frame, schema: &Schema) -> Result<Preprocessed> {
    schema.validate()?;
    let mut summary = PreprocessSummary {
        rows_in: frame.n_rows(),
        ..Default::default()
    };
    if frame.stage == FrameStage::Preprocessed {
        summary.rows_out = frame.n_rows();
        return Ok(Preprocessed {
            frame: frame.clone(),
            summary,
        });
    }

    let mut work = frame.clone();
    work.columns
        .retain(|c| !schema.leakage_drops.contains(&c.name));

    // Missing values: NaN numerics and marker labels.
    let mut missing = vec![false; work.n_rows()];
    for (i, y) in work.target.iter().enumerate() {
        missing[i] |= y.is_nan();
    }
    for col in &work.columns {
        match &col.data {
            ColumnData::Numeric(v) => {
                for (i, x) in v.iter().enumerate() {
                    missing[i] |= x.is_nan();
                }
            }
            ColumnData::Labels { levels, codes } => {
                let Some(spec) = schema.column(&col.name) else { continue };
                let is_marker: Vec<bool> = levels.iter().map(|l| spec.is_missing(l)).collect();
                for (i, &c) in codes.iter().enumerate() {
                    missing[i] |= is_marker[c as usize];
                }
            }
            ColumnData::Binary(_) => {}
        }
    }
    let (work, dropped) = keep_rows(&work, |i| !missing[i]);
    summary.dropped_missing = dropped;

    let rules = schema.trim_rules();
    let (early, late): (Vec<TrimRule>, Vec<TrimRule>) = rules
        .into_iter()
        .partition(|r| r.basis == TrimBasis::BeforeTargetFilter);
    let work = apply_trims(work, &early, &mut summary)?;

    let target = work.target.clone();
    let (mut work, dropped) = keep_rows(&work, |i| target[i] > 0.0);
    summary.dropped_nonpositive_target = dropped;

    for col in &mut work.columns {
        if let ColumnData::Labels { levels, codes } = &col.data {
            let spec = schema
                .column(&col.name)
                .ok_or_else(|| Error::ColumnNotFound(col.name.clone()))?;
            // Only labels still present after row filtering need a code.
            let mut mapped: Vec<Option<u8>> = vec![None; levels.len()];
            let mut encoded = Vec::with_capacity(codes.len());
            for &c in codes {
                let slot = &mut mapped[c as usize];
                let code = match *slot {
                    Some(code) => code,
                    None => *slot.insert(spec.encode(&levels[c as usize])?),
                };
                encoded.push(code);
            }
            col.data = ColumnData::Binary(encoded);
            col.kind = ColumnKind::CategoricalBinary;
        }
    }

    let mut work = apply_trims(work, &late, &mut summary)?;
    if work.n_rows() == 0 {
        return Err(Error::EmptyAfterFilter);
    }
    work.group_labels = work
        .columns
        .iter()
        .filter_map(|c| match &c.data {
            ColumnData::Binary(v) => Some(GroupLabels {
                column: c.name.clone(),
                values: v.clone(),
            }),
            _ => None,
        })
        .collect();
    work.stage = FrameStage::Preprocessed;
    work.check()?;
    summary.rows_out = work.n_rows();
    Ok(Preprocessed {
        frame: work,
        summary,
    })
}
