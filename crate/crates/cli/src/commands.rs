use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fairscope::audit::{bias_table, run_audit, AuditConfig};
use fairscope::ingest::{fetch_dataset, load_csv, preprocess, write_csv, Frame, PreprocessSummary, Schema};
use fairscope::learners::{tune_from, HyperSpace, LearnerConfig};
use fairscope::synth::{generate, SynthSpec};
use fairscope::{Error, ErrorClass};

use crate::artifacts::{self, Manifest};
use crate::{AuditArgs, FetchArgs, SynthArgs, TuneArgs};

pub const DEFAULT_AUDIT_CONFIG: &str = include_str!("../assets/census_audit.json");

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Internal => 1,
            ErrorClass::Config => 2,
            ErrorClass::Network => 3,
            ErrorClass::Data => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Errors while reading or parsing a configuration file are configuration
/// errors, whatever their underlying kind.
fn as_config(e: Error) -> CliError {
    CliError::config(e.to_string())
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Resolves a schema path relative to the directory of the config file that
/// names it; the bundled census schema when none is given.
fn load_schema(schema: Option<&str>, config_path: Option<&Path>) -> Result<Schema, CliError> {
    match schema {
        None => Ok(Schema::census_kdd()),
        Some(p) => {
            let p = Path::new(p);
            let full = match config_path.and_then(Path::parent) {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.to_path_buf(),
            };
            Schema::from_path(&full).map_err(as_config)
        }
    }
}

fn load_frame(data: &Path, schema: &Schema) -> Result<(Frame, PreprocessSummary), CliError> {
    let raw = load_csv(data, schema)?;
    let out = preprocess(&raw, schema)?;
    Ok((out.frame, out.summary))
}

pub fn fetch(args: &FetchArgs) -> Result<(), CliError> {
    let path = fetch_dataset(&args.url, &args.sha256, &args.out)?;
    println!("{}", path.display());
    Ok(())
}

pub fn audit(args: &AuditArgs, threads: Option<usize>) -> Result<(), CliError> {
    let text = match &args.config {
        Some(p) => read_config(p)?,
        None => DEFAULT_AUDIT_CONFIG.to_string(),
    };
    let mut config: AuditConfig = serde_json::from_str(&text).map_err(|e| CliError::config(e.to_string()))?;
    if let Some(k) = args.folds {
        config.k = k;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    config.validate().map_err(as_config)?;
    let schema = load_schema(config.schema.as_deref(), args.config.as_deref())?;

    let started = artifacts::now();
    let (frame, summary) = load_frame(&args.data, &schema)?;
    let mut report = run_audit(&frame, &config)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !args.deterministic {
        report.metadata.started_at = Some(started);
        report.metadata.finished_at = Some(artifacts::now());
        report.metadata.threads = Some(rayon::current_num_threads());
    }

    let out = &args.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::internal(format!("{}: {e}", out.display())))?;
    let table = bias_table(&report);
    let mut written: Vec<PathBuf> = Vec::new();
    let mut put = |name: &str, contents: &str| -> Result<(), CliError> {
        let path = out.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(&path, contents).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
        written.push(PathBuf::from(name));
        Ok(())
    };
    put("report.json", &report.to_json()?)?;
    put("bias_table.csv", &table.scores_csv())?;
    put("group_means.csv", &table.groups_csv())?;
    let stamp = (!args.deterministic).then(artifacts::now);
    for attr in &report.attributes {
        let slug = artifacts::slug(&attr.attribute);
        let stacked = report.stacked.as_ref().and_then(|s| {
            s.attributes
                .iter()
                .find(|a| a.attribute == attr.attribute)
                .and_then(|a| a.learners.first())
        });
        let rows: Vec<_> = attr.learners.iter().chain(stacked).collect();
        put(&format!("folds/{slug}.csv"), &artifacts::fold_csv(&rows))?;
        put(
            &format!("plots/{slug}.svg"),
            &crate::svg::fold_panels(&attr.attribute, &attr.group_names, &rows, stamp.as_deref()),
        )?;
    }

    let manifest = Manifest {
        command: artifacts::command_echo(args.deterministic),
        config_digest: artifacts::sha256_hex(serde_json::to_string(&config).map_err(Error::from)?.as_bytes()),
        dataset_digest: fairscope::ingest::sha256_file(&args.data)?,
        frame_digest: report.dataset_digest.clone(),
        seed: config.seed,
        k: config.k,
        mode: config.mode,
        preprocess: summary,
        threads: (!args.deterministic).then_some(threads.unwrap_or_else(rayon::current_num_threads)),
        started_at: report.metadata.started_at.clone(),
        finished_at: report.metadata.finished_at.clone(),
        artifacts: {
            let mut a: Vec<String> = written.iter().map(|p| p.to_string_lossy().into_owned()).collect();
            a.push("manifest.json".into());
            a
        },
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
    std::fs::write(out.join("manifest.json"), text)
        .map_err(|e| CliError::internal(format!("{}: {e}", out.display())))?;

    print!("{}", table.scores_csv());
    Ok(())
}

fn default_tune_folds() -> usize {
    5
}

/// Input document for `fairscope tune`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneConfig {
    #[serde(default)]
    pub schema: Option<String>,
    /// Starting configuration; sampled values replace its fields.
    pub learner: LearnerConfig,
    /// Search space; the nine boosting parameters when omitted.
    #[serde(default)]
    pub space: Option<HyperSpace>,
    pub budget: usize,
    #[serde(default = "default_tune_folds")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
}

pub fn tune(args: &TuneArgs) -> Result<(), CliError> {
    let text = read_config(&args.config)?;
    let config: TuneConfig = serde_json::from_str(&text).map_err(|e| CliError::config(e.to_string()))?;
    let k = args.folds.unwrap_or(config.k);
    let seed = args.seed.unwrap_or(config.seed);
    if k < 2 {
        return Err(CliError::config(format!("invalid config field `k`: need at least 2 folds, got {k}")));
    }
    config.learner.validate().map_err(as_config)?;
    let space = config.space.clone().unwrap_or_else(HyperSpace::boosting_default);
    space.validate().map_err(as_config)?;
    if config.budget == 0 {
        return Err(CliError::config("invalid config field `budget`: need at least one trial"));
    }
    let schema = load_schema(config.schema.as_deref(), Some(&args.config))?;
    let (frame, _) = load_frame(&args.data, &schema)?;
    let result = tune_from(&config.learner, &frame, &space, config.budget, k, seed)?;
    let json = serde_json::to_string_pretty(&result).map_err(Error::from)?;
    std::fs::write(&args.out, json).map_err(|e| CliError::internal(format!("{}: {e}", args.out.display())))?;
    println!("best cv rmse {:.5} over {} trials", result.best_cv_rmse, result.trials.len());
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let text = read_config(&args.spec)?;
    let spec: SynthSpec = serde_json::from_str(&text).map_err(|e| CliError::config(e.to_string()))?;
    spec.validate().map_err(as_config)?;
    let frame = generate(&spec)?;
    write_csv(&frame, &args.out).map_err(|e| CliError::internal(e.to_string()))?;
    Ok(())
}
