use serde::Serialize;
use sha2::{Digest, Sha256};

use fairscope::audit::{AuditMode, LearnerAttributeResult};
use fairscope::ingest::PreprocessSummary;

/// Provenance record written next to the audit artifacts.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: Vec<String>,
    /// SHA-256 of the effective configuration (after command-line overrides).
    pub config_digest: String,
    /// SHA-256 of the input file bytes.
    pub dataset_digest: String,
    /// Content hash of the preprocessed frame.
    pub frame_digest: String,
    pub seed: u64,
    pub k: usize,
    pub mode: AuditMode,
    pub preprocess: PreprocessSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// File-name form of an attribute name: lowercase ASCII words joined by `_`.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for word in name.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push('_');
        }
        out.push_str(&word.to_ascii_lowercase());
    }
    if out.is_empty() {
        out.push_str("attribute");
    }
    out
}

/// The invocation's arguments. Reproducible runs leave out the output
/// directory and thread count, which do not affect results.
pub fn command_echo(deterministic: bool) -> Vec<String> {
    let mut args = std::env::args().skip(1);
    let mut out = vec!["fairscope".to_string()];
    while let Some(a) = args.next() {
        if deterministic {
            if a == "--out" || a == "--threads" {
                args.next();
                continue;
            }
            if a.starts_with("--out=") || a.starts_with("--threads=") || a == "--deterministic" {
                continue;
            }
        }
        out.push(a);
    }
    out
}

/// Per-fold group densities and divergences, one line per (predictor, fold).
pub fn fold_csv(rows: &[&LearnerAttributeResult]) -> String {
    let mut out = String::from(
        "learner,fold,count0,count1,mean0,mean1,sigma0,sigma1,alternated_mean0,alternated_mean1,alternated_sigma0,alternated_sigma1,kl0,kl1\n",
    );
    for r in rows {
        for f in &r.folds {
            let (o, a) = (&f.original, &f.alternated);
            let cells = [
                csv_field(&r.learner),
                f.fold_index.to_string(),
                o[0].count.to_string(),
                o[1].count.to_string(),
                o[0].mu.to_string(),
                o[1].mu.to_string(),
                o[0].sigma.to_string(),
                o[1].sigma.to_string(),
                a[0].mu.to_string(),
                a[1].mu.to_string(),
                a[0].sigma.to_string(),
                a[1].sigma.to_string(),
                f.kl[0].to_string(),
                f.kl[1].to_string(),
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("live in this house 1 year ago"), "live_in_this_house_1_year_ago");
        assert_eq!(slug("Sex"), "sex");
        assert_eq!(slug("--"), "attribute");
    }
}
