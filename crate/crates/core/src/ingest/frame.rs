use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::schema::ColumnKind;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    /// Raw categorical labels, interned.
    Labels { levels: Vec<String>, codes: Vec<u32> },
    Binary(Vec<u8>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Labels { codes, .. } => codes.len(),
            ColumnData::Binary(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Labels { levels, codes } => ColumnData::Labels {
                levels: levels.clone(),
                codes: rows.iter().map(|&i| codes[i]).collect(),
            },
            ColumnData::Binary(v) => ColumnData::Binary(rows.iter().map(|&i| v[i]).collect()),
        }
    }

    pub fn label(&self, row: usize) -> Option<&str> {
        match self {
            ColumnData::Labels { levels, codes } => Some(levels[codes[row] as usize].as_str()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub data: ColumnData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameStage {
    Raw,
    Preprocessed,
}

/// Original codes of a binary attribute, kept untouched by alternation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupLabels {
    pub column: String,
    pub values: Vec<u8>,
}

/// A table of samples: feature columns plus the continuous target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub(crate) stage: FrameStage,
    pub(crate) columns: Vec<Column>,
    pub(crate) target_name: String,
    pub(crate) target: Vec<f64>,
    pub(crate) group_labels: Vec<GroupLabels>,
}

impl Frame {
    /// Builds an encoded frame directly. Binary columns become the group labels.
    pub fn from_parts(columns: Vec<Column>, target_name: &str, target: Vec<f64>) -> Result<Self> {
        let group_labels = columns
            .iter()
            .filter_map(|c| match &c.data {
                ColumnData::Binary(v) => Some(GroupLabels {
                    column: c.name.clone(),
                    values: v.clone(),
                }),
                _ => None,
            })
            .collect();
        let frame = Frame {
            stage: FrameStage::Preprocessed,
            columns,
            target_name: target_name.to_string(),
            target,
            group_labels,
        };
        frame.check()?;
        Ok(frame)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let n = self.target.len();
        for col in &self.columns {
            if col.data.len() != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    found: col.data.len(),
                });
            }
            if let ColumnData::Binary(v) = &col.data {
                if v.iter().any(|&b| b > 1) {
                    return Err(Error::NotBinary(col.name.clone()));
                }
            }
        }
        if self.stage == FrameStage::Preprocessed {
            if self.target.iter().any(|&y| !(y.is_finite() && y > 0.0)) {
                return Err(Error::NonFinite("target"));
            }
            for col in &self.columns {
                match &col.data {
                    ColumnData::Numeric(v) if v.iter().any(|x| !x.is_finite()) => {
                        return Err(Error::NonFinite("numeric feature"));
                    }
                    ColumnData::Labels { .. } => return Err(Error::NotBinary(col.name.clone())),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn stage(&self) -> FrameStage {
        self.stage
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn binary(&self, name: &str) -> Result<&[u8]> {
        let col = self
            .column(name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_string()))?;
        match &col.data {
            ColumnData::Binary(v) => Ok(v),
            _ => Err(Error::NotBinary(name.to_string())),
        }
    }

    /// Group membership as originally encoded, before any alternation.
    pub fn group_labels(&self, name: &str) -> Result<&[u8]> {
        match self.group_labels.iter().find(|g| g.column == name) {
            Some(g) => Ok(&g.values),
            None => self.binary(name),
        }
    }

    pub fn feature_matrix(&self) -> Result<Matrix> {
        let n = self.n_rows();
        let cols = self
            .columns
            .iter()
            .map(|c| match &c.data {
                ColumnData::Numeric(v) => Ok(v.clone()),
                ColumnData::Binary(v) => Ok(v.iter().map(|&b| f64::from(b)).collect()),
                ColumnData::Labels { .. } => Err(Error::NotBinary(c.name.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_columns(&cols, n)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Frame {
        Frame {
            stage: self.stage,
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    kind: c.kind,
                    data: c.data.select(rows),
                })
                .collect(),
            target_name: self.target_name.clone(),
            target: rows.iter().map(|&i| self.target[i]).collect(),
            group_labels: self
                .group_labels
                .iter()
                .map(|g| GroupLabels {
                    column: g.column.clone(),
                    values: rows.iter().map(|&i| g.values[i]).collect(),
                })
                .collect(),
        }
    }

    pub(crate) fn column_mut(&mut self, name: &str) -> Option<&mut Column> {
        self.columns.iter_mut().find(|c| c.name == name)
    }

    /// Content hash over column names, values and target.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for col in &self.columns {
            h.update(col.name.as_bytes());
            h.update([0u8]);
            match &col.data {
                ColumnData::Numeric(v) => v.iter().for_each(|x| h.update(x.to_le_bytes())),
                ColumnData::Binary(v) => h.update(v),
                ColumnData::Labels { levels, codes } => {
                    for &c in codes {
                        h.update(levels[c as usize].as_bytes());
                        h.update([0u8]);
                    }
                }
            }
        }
        h.update(self.target_name.as_bytes());
        self.target.iter().for_each(|x| h.update(x.to_le_bytes()));
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Frame {
        Frame::from_parts(
            vec![
                Column {
                    name: "age".into(),
                    kind: ColumnKind::Numeric,
                    data: ColumnData::Numeric(vec![30.0, 40.0, 50.0]),
                },
                Column {
                    name: "sex".into(),
                    kind: ColumnKind::CategoricalBinary,
                    data: ColumnData::Binary(vec![0, 1, 1]),
                },
            ],
            "wage",
            vec![10.0, 20.0, 30.0],
        )
        .unwrap()
    }

    #[test]
    fn feature_matrix_follows_column_order() {
        let f = tiny();
        let m = f.feature_matrix().unwrap();
        assert_eq!(m.row(1), &[40.0, 1.0]);
        assert_eq!(f.feature_names(), vec!["age", "sex"]);
    }

    #[test]
    fn select_rows_carries_group_labels() {
        let f = tiny().select_rows(&[2, 0]);
        assert_eq!(f.target(), &[30.0, 10.0]);
        assert_eq!(f.group_labels("sex").unwrap(), &[1, 0]);
    }

    #[test]
    fn rejects_non_binary_codes() {
        let err = Frame::from_parts(
            vec![Column {
                name: "g".into(),
                kind: ColumnKind::CategoricalBinary,
                data: ColumnData::Binary(vec![0, 2]),
            }],
            "y",
            vec![1.0, 2.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotBinary(_)));
    }
}
