use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CENSUS_KDD_SCHEMA: &str = include_str!("../../assets/census_kdd.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Numeric,
    CategoricalBinary,
    Target,
    /// Never materialized by the loader.
    Dropped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Raw label to binary code.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<BTreeMap<String, u8>>,
    /// Code given to labels absent from `encoding`. Without it such labels are an error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing_markers: Vec<String>,
}

impl ColumnSpec {
    pub fn numeric(name: &str) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
            encoding: None,
            other: None,
            missing_markers: Vec::new(),
        }
    }

    pub fn target(name: &str) -> Self {
        ColumnSpec {
            kind: ColumnKind::Target,
            ..ColumnSpec::numeric(name)
        }
    }

    pub fn dropped(name: &str) -> Self {
        ColumnSpec {
            kind: ColumnKind::Dropped,
            ..ColumnSpec::numeric(name)
        }
    }

    pub fn binary(name: &str, zero: &str, one: &str) -> Self {
        let encoding = [(zero.to_string(), 0u8), (one.to_string(), 1u8)]
            .into_iter()
            .collect();
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::CategoricalBinary,
            encoding: Some(encoding),
            other: None,
            missing_markers: Vec::new(),
        }
    }

    pub fn with_missing(mut self, markers: &[&str]) -> Self {
        self.missing_markers = markers.iter().map(|m| m.to_string()).collect();
        self
    }

    pub fn is_missing(&self, cell: &str) -> bool {
        self.missing_markers.iter().any(|m| m == cell)
    }

    /// Code for a raw categorical label.
    pub fn encode(&self, label: &str) -> Result<u8> {
        let code = match &self.encoding {
            Some(map) => map.get(label).copied().or(self.other),
            None => match label {
                "0" => Some(0),
                "1" => Some(1),
                _ => self.other,
            },
        };
        code.ok_or_else(|| Error::UnknownLabel {
            column: self.name.clone(),
            label: label.to_string(),
        })
    }
}

/// Population a percentile cut is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrimBasis {
    /// Rows left after missing-value removal, including non-positive targets.
    BeforeTargetFilter,
    /// Rows left after the non-positive target filter.
    AfterTargetFilter,
}

/// Drop rows whose `column` exceeds its `percentile` (0..=100).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimRule {
    pub column: String,
    pub percentile: f64,
    pub basis: TrimBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub leakage_drops: Vec<String>,
    /// When false the file has no header row and fields follow `columns` order.
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Outlier rules; `None` means the target trimmed at its 99th percentile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trims: Option<Vec<TrimRule>>,
}

fn default_true() -> bool {
    true
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let schema = Schema {
            columns,
            leakage_drops: Vec::new(),
            has_header: true,
            trims: None,
        };
        schema.validate()?;
        Ok(schema)
    }

    /// The bundled Census-Income (KDD) layout.
    pub fn census_kdd() -> Self {
        Schema::from_json(CENSUS_KDD_SCHEMA).expect("bundled schema is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: Schema = serde_json::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for col in &self.columns {
            if !seen.insert(col.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate column `{}`", col.name)));
            }
            if let Some(map) = &col.encoding {
                if col.kind != ColumnKind::CategoricalBinary {
                    return Err(Error::InvalidSchema(format!(
                        "column `{}` has an encoding but is not categorical-binary",
                        col.name
                    )));
                }
                if let Some((label, code)) = map.iter().find(|(_, &c)| c > 1) {
                    return Err(Error::InvalidSchema(format!(
                        "column `{}` maps {label:?} to {code}, expected 0 or 1",
                        col.name
                    )));
                }
            }
            if matches!(col.other, Some(c) if c > 1) {
                return Err(Error::InvalidSchema(format!(
                    "column `{}` has a fallback code other than 0 or 1",
                    col.name
                )));
            }
        }
        let targets = self
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Target)
            .count();
        if targets != 1 {
            return Err(Error::InvalidSchema(format!(
                "expected exactly one target column, found {targets}"
            )));
        }
        if self.leakage_drops.iter().any(|d| d == self.target_name()) {
            return Err(Error::InvalidSchema("the target cannot be a leakage drop".into()));
        }
        for rule in self.trims.iter().flatten() {
            if !(0.0..=100.0).contains(&rule.percentile) {
                return Err(Error::InvalidSchema(format!(
                    "trim percentile {} outside [0, 100]",
                    rule.percentile
                )));
            }
            let col = self.column(&rule.column).ok_or_else(|| {
                Error::InvalidSchema(format!("trim column `{}` not in schema", rule.column))
            })?;
            if !matches!(col.kind, ColumnKind::Numeric | ColumnKind::Target) {
                return Err(Error::InvalidSchema(format!(
                    "trim column `{}` is not numeric",
                    rule.column
                )));
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn target_name(&self) -> &str {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Target)
            .map(|c| c.name.as_str())
            .unwrap_or_default()
    }

    pub fn trim_rules(&self) -> Vec<TrimRule> {
        match &self.trims {
            Some(rules) => rules.clone(),
            None => vec![TrimRule {
                column: self.target_name().to_string(),
                percentile: 99.0,
                basis: TrimBasis::AfterTargetFilter,
            }],
        }
    }
}
