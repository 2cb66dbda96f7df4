//! `fairscope` command-line front end.
//!
//! Exit status: 0 success, 1 internal failure, 2 configuration error,
//! 3 network or digest failure, 4 data error.

mod artifacts;
mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fairscope::audit::AuditMode;

#[derive(Debug, Parser)]
#[command(name = "fairscope", version, about = "Attribute-alternation bias audits for regression models")]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "FAIRSCOPE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Download a dataset and verify its SHA-256 digest.
    Fetch(FetchArgs),
    /// Run an alternation audit and write report, tables and plots.
    Audit(AuditArgs),
    /// Random-search hyperparameters by cross-validated RMSE.
    Tune(TuneArgs),
    /// Generate a synthetic population as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub url: String,
    #[arg(long)]
    pub sha256: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Audit configuration (JSON); the bundled census audit when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input CSV (optionally gzip-compressed).
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the fold count.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Override the run seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the alternation mode.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<AuditMode>,
    /// Omit timestamps, thread counts and output paths from artifacts.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Tuning configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output JSON file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synthetic population spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_mode(s: &str) -> Result<AuditMode, String> {
    s.parse().map_err(|e: fairscope::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Fetch(a) => commands::fetch(a),
        Command::Audit(a) => commands::audit(a, cli.threads),
        Command::Tune(a) => commands::tune(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
