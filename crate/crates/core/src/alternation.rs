//! The alternation function over binary protected attributes and the
//! potentially-biased-attribute (PBA) decision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ColumnData, Frame};

/// Default score at or above which an attribute is flagged.
pub const DEFAULT_PBA_THRESHOLD: f64 = 0.05;

/// A binary attribute to alternate, with display names for its two codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternationSpec {
    pub attribute: String,
    /// Names for code 0 and code 1, used in reports only.
    #[serde(default = "default_group_names")]
    pub group_names: [String; 2],
}

fn default_group_names() -> [String; 2] {
    ["0".to_string(), "1".to_string()]
}

impl AlternationSpec {
    pub fn new(attribute: &str, group0: &str, group1: &str) -> Self {
        AlternationSpec {
            attribute: attribute.to_string(),
            group_names: [group0.to_string(), group1.to_string()],
        }
    }

    /// Fails unless the attribute is a binary column of `frame`.
    pub fn check(&self, frame: &Frame) -> Result<()> {
        frame.binary(&self.attribute).map(|_| ())
    }
}

/// Returns a copy of `frame` with the attribute's 0/1 codes swapped on every
/// row. All other columns, the target and the recorded original group
/// labels are left untouched.
pub fn alternate(frame: &Frame, spec: &AlternationSpec) -> Result<Frame> {
    spec.check(frame)?;
    let mut out = frame.clone();
    let column = out
        .column_mut(&spec.attribute)
        .ok_or_else(|| Error::ColumnNotFound(spec.attribute.clone()))?;
    match &mut column.data {
        ColumnData::Binary(values) => values.iter_mut().for_each(|v| *v ^= 1),
        _ => return Err(Error::NotBinary(spec.attribute.clone())),
    }
    Ok(out)
}

/// True when `avg_kl` reaches `threshold`.
pub fn classify_pba(avg_kl: f64, threshold: f64) -> Result<bool> {
    if avg_kl.is_nan() || avg_kl < 0.0 {
        return Err(Error::NegativeScore(avg_kl));
    }
    Ok(avg_kl >= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Column, ColumnKind};

    fn frame() -> Frame {
        Frame::from_parts(
            vec![
                Column {
                    name: "age".into(),
                    kind: ColumnKind::Numeric,
                    data: ColumnData::Numeric(vec![30.0, 40.0, 50.0, 60.0]),
                },
                Column {
                    name: "sex".into(),
                    kind: ColumnKind::CategoricalBinary,
                    data: ColumnData::Binary(vec![0, 1, 1, 0]),
                },
            ],
            "wage",
            vec![10.0, 20.0, 30.0, 40.0],
        )
        .unwrap()
    }

    #[test]
    fn flips_bits_only() {
        let f = frame();
        let spec = AlternationSpec::new("sex", "Male", "Female");
        let a = alternate(&f, &spec).unwrap();
        assert_eq!(a.binary("sex").unwrap(), &[1, 0, 0, 1]);
        assert_eq!(a.target(), f.target());
        assert_eq!(a.group_labels("sex").unwrap(), &[0, 1, 1, 0]);
        assert_eq!(alternate(&a, &spec).unwrap(), f);
    }

    #[test]
    fn rejects_missing_and_numeric_columns() {
        let f = frame();
        assert!(matches!(
            alternate(&f, &AlternationSpec::new("race", "a", "b")),
            Err(Error::ColumnNotFound(_))
        ));
        assert!(matches!(
            alternate(&f, &AlternationSpec::new("age", "a", "b")),
            Err(Error::NotBinary(_))
        ));
    }

    #[test]
    fn pba_threshold() {
        assert!(classify_pba(0.13582, DEFAULT_PBA_THRESHOLD).unwrap());
        assert!(!classify_pba(0.00657, DEFAULT_PBA_THRESHOLD).unwrap());
        assert!(!classify_pba(0.0, 1e-12).unwrap());
        assert!(classify_pba(-0.1, 0.05).is_err());
    }
}
