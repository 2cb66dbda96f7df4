use serde::{Deserialize, Serialize};

use super::run::{AttributeResult, AuditReport};

/// One predictor's average divergence per attribute; `None` where the
/// predictor was not audited on that attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub learner: String,
    pub scores: Vec<Option<f64>>,
}

/// Group means before and after alternation for one (attribute, predictor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub attribute: String,
    pub learner: String,
    pub group_names: [String; 2],
    pub actual_means: [f64; 2],
    pub mean_original: [f64; 2],
    pub mean_alternated: [f64; 2],
    pub average_kl: f64,
    pub pba_flag: bool,
}

/// Tabular view of an audit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTable {
    /// Attribute names in configuration order.
    pub attributes: Vec<String>,
    /// One row per learner, then one for the stack when present.
    pub scores: Vec<ScoreRow>,
    pub groups: Vec<GroupRow>,
}

fn group_rows(attr: &AttributeResult) -> impl Iterator<Item = GroupRow> + '_ {
    attr.learners.iter().map(move |l| GroupRow {
        attribute: attr.attribute.clone(),
        learner: l.learner.clone(),
        group_names: attr.group_names.clone(),
        actual_means: attr.actual_means,
        mean_original: l.mean_original,
        mean_alternated: l.mean_alternated,
        average_kl: l.average_kl,
        pba_flag: l.pba_flag,
    })
}

pub fn bias_table(report: &AuditReport) -> BiasTable {
    let attributes: Vec<String> = report.attributes.iter().map(|a| a.attribute.clone()).collect();
    let mut scores: Vec<ScoreRow> = report
        .config
        .learners
        .iter()
        .map(|l| ScoreRow {
            learner: l.label.clone(),
            scores: report
                .attributes
                .iter()
                .map(|a| a.learner(&l.label).map(|r| r.average_kl))
                .collect(),
        })
        .collect();
    let mut groups: Vec<GroupRow> = report.attributes.iter().flat_map(group_rows).collect();
    if let Some(stack) = &report.stacked {
        scores.push(ScoreRow {
            learner: stack.label.clone(),
            scores: attributes
                .iter()
                .map(|name| report.stacked_attribute(name).map(|r| r.average_kl))
                .collect(),
        });
        groups.extend(stack.attributes.iter().flat_map(group_rows));
    }
    BiasTable {
        attributes,
        scores,
        groups,
    }
}

fn fixed5(v: f64) -> String {
    format!("{v:.5}")
}

impl BiasTable {
    /// `learner,<attr>...` with five decimals; empty cells where a predictor
    /// was not audited on an attribute.
    pub fn scores_csv(&self) -> String {
        let mut out = String::from("learner");
        for a in &self.attributes {
            out.push(',');
            out.push_str(&csv_field(a));
        }
        out.push('\n');
        for row in &self.scores {
            out.push_str(&csv_field(&row.learner));
            for s in &row.scores {
                out.push(',');
                if let Some(v) = s {
                    out.push_str(&fixed5(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Per (attribute, predictor) group means, five decimals.
    pub fn groups_csv(&self) -> String {
        let mut out = String::from(
            "attribute,learner,group0,group1,actual_mean0,actual_mean1,mean0,mean1,alternated_mean0,alternated_mean1,average_kl,pba\n",
        );
        for g in &self.groups {
            let cells = [
                csv_field(&g.attribute),
                csv_field(&g.learner),
                csv_field(&g.group_names[0]),
                csv_field(&g.group_names[1]),
                fixed5(g.actual_means[0]),
                fixed5(g.actual_means[1]),
                fixed5(g.mean_original[0]),
                fixed5(g.mean_original[1]),
                fixed5(g.mean_alternated[0]),
                fixed5(g.mean_alternated[1]),
                fixed5(g.average_kl),
                g.pba_flag.to_string(),
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Quotes a field when it contains a separator, quote or line break.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
