//! `aad` pipeline: synth, ingest, build-folds, extract, train, eval, report.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use aad_core::corpus::Subset;
use aad_core::frontends::FrontendTag;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, failed validation or a detected leak; exit code 1.
    #[error("{0}")]
    Invalid(String),
    /// A required file or directory is absent; exit code 2.
    #[error("{0}")]
    MissingInput(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => 1,
            CliError::MissingInput(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "aad", version, about = "Attack-disjoint evaluation of audio deepfake detectors")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Restrict train/eval to one fold.
    #[arg(long, global = true)]
    pub fold: Option<u32>,
    /// Restrict train/eval to one seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the configured front-end (mfcc, lfcc, spec, mfcc+spec, lfcc+spec, mfcc+lfcc).
    #[arg(long, global = true)]
    pub frontend: Option<FrontendTag>,
    /// Override the configured work directory.
    #[arg(long, global = true)]
    pub workdir: Option<PathBuf>,
    /// Overwrite existing fold files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads for extraction (default: CPU count).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a toy corpus and a matching config.
    Synth(SynthArgs),
    /// Scan dataset roots into workdir/manifest.csv.
    Ingest,
    /// Build and validate attack-disjoint fold files.
    BuildFolds,
    /// Preprocess audio and write feature files.
    Extract {
        /// Only records in this subset of the configured folds.
        #[arg(long)]
        subset: Option<Subset>,
    },
    /// Fit the bona fide and spoof mixtures per fold and seed.
    Train,
    /// Score eval records and compute EER per fold and seed.
    Eval,
    /// Merge EER results into report.json and report.txt.
    Report,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory; receives `toy/` and `config.json`.
    pub out: PathBuf,
    #[arg(long, default_value_t = 40)]
    pub n_bonafide: usize,
    #[arg(long, default_value_t = 14)]
    pub n_per_attack: usize,
    #[arg(long, default_value_t = 3)]
    pub attacks: usize,
    /// Seed for the generated audio.
    #[arg(long, default_value_t = 0)]
    pub corpus_seed: u64,
}

impl Cli {
    /// Load the config and apply flag overrides.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::MissingInput("--config is required for this command".into()))?;
        let mut cfg = RunConfig::load(path)?;
        if let Some(tag) = self.frontend {
            cfg.frontend = tag;
        }
        if let Some(dir) = &self.workdir {
            cfg.workdir = dir.clone();
        }
        if let Some(fold) = self.fold {
            if !(1..=3).contains(&fold) {
                return Err(CliError::Invalid(format!("--fold must be 1, 2 or 3, got {fold}")));
            }
            cfg.folds = vec![fold];
        }
        if let Some(seed) = self.seed {
            cfg.seeds = vec![seed];
        }
        Ok(cfg)
    }
}

/// Run one parsed command, writing human output to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Synth(args) => commands::synth::run(args, out),
        Command::Ingest => cli.run_config().and_then(|c| commands::ingest::run(&c, out)),
        Command::BuildFolds => cli.run_config().and_then(|c| commands::folds::run(&c, cli.force, out)),
        Command::Extract { subset } => {
            cli.run_config().and_then(|c| commands::extract::run(&c, *subset, cli.jobs, out))
        }
        Command::Train => cli.run_config().and_then(|c| commands::train::run(&c, out)),
        Command::Eval => cli.run_config().and_then(|c| commands::eval::run(&c, out)),
        Command::Report => cli.run_config().and_then(|c| commands::report::run(&c, out)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            let _ = writeln!(out, "error: {e}");
            e.exit_code()
        }
    }
}

/// Parse `args` (including the program name) and run.
pub fn run_args<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out),
        Err(e) => {
            let _ = write!(out, "{e}");
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
