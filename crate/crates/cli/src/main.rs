//! `lcp`: corpus sampling, featurization, label aggregation, model training
//! and the evaluation experiments, plus the annotation service.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "lcp",
    version,
    about = "Lexical complexity prediction pipeline"
)]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Where to write the run manifest (default: next to the primary output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample single-word and two-word targets from tagged corpora.
    BuildCorpus(commands::corpus::BuildCorpusArgs),
    /// Compute the feature matrix for an instances file.
    Featurize(commands::corpus::FeaturizeArgs),
    /// Apply annotator QC and aggregate judgments into complexity labels.
    Aggregate(commands::labels::AggregateArgs),
    /// Agreement histogram, subjectivity correlation and mean-complexity table.
    AnalyzeAgreement(commands::labels::AnalyzeArgs),
    /// Fit a regression or forest model and save it as JSON.
    Train(commands::experiments::TrainArgs),
    /// Repeated train/test evaluation, or scoring of a saved model.
    Evaluate(commands::experiments::EvaluateArgs),
    /// Cross-validated feature-group ablation.
    Ablate(commands::experiments::AblateArgs),
    /// Principal-component feature ranking and per-feature correlations.
    RankFeatures(commands::experiments::RankArgs),
    /// Train on some genres, test on a held-out one.
    CrossGenre(commands::experiments::CrossGenreArgs),
    /// Run the annotation HTTP service.
    Serve(commands::serve::ServeArgs),
}

pub struct Global {
    pub threads: Option<usize>,
    pub manifest: Option<PathBuf>,
}

impl Global {
    pub fn manifest_path(&self, primary: &std::path::Path) -> PathBuf {
        self.manifest
            .clone()
            .unwrap_or_else(|| manifest::default_manifest_path(primary))
    }
}

/// Marker for user-facing validation failures (exit status 1).
#[derive(Debug)]
pub struct Validation(pub String);

impl std::fmt::Display for Validation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Validation {}

pub fn validation(message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Validation(message.into()))
}

/// 2 for anything caused by an I/O failure, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|c| c.is::<std::io::Error>()) {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(validation("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| validation(format!("cannot size thread pool: {e}")))?;
    }
    let global = Global {
        threads: cli.threads,
        manifest: cli.manifest,
    };
    match cli.command {
        Command::BuildCorpus(a) => commands::corpus::build_corpus(a, &global),
        Command::Featurize(a) => commands::corpus::featurize(a, &global),
        Command::Aggregate(a) => commands::labels::aggregate(a, &global),
        Command::AnalyzeAgreement(a) => commands::labels::analyze(a, &global),
        Command::Train(a) => commands::experiments::train(a, &global),
        Command::Evaluate(a) => commands::experiments::evaluate(a, &global),
        Command::Ablate(a) => commands::experiments::ablate(a, &global),
        Command::RankFeatures(a) => commands::experiments::rank_features(a, &global),
        Command::CrossGenre(a) => commands::experiments::cross_genre(a, &global),
        Command::Serve(a) => commands::serve::serve(a, &global),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
