//! Command-line front end for the `oversmooth` library.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 2 for configuration, usage or input errors, and 1
//! for runtime failures or a failed verification.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use oversmooth::empirics::Statement;

use crate::commands::UsageError;
use crate::config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "oversmooth", version, about = "Layer-wise oversmoothing experiments on contextual SBMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatementArg {
    MeanGap,
    VarianceBounds,
    DegreeConcentration,
    NeighborhoodBound,
    VarianceLimit,
    SymMonotone,
    ReluNoGain,
}

impl From<StatementArg> for Statement {
    fn from(s: StatementArg) -> Self {
        match s {
            StatementArg::MeanGap => Statement::MeanGap,
            StatementArg::VarianceBounds => Statement::VarianceBounds,
            StatementArg::DegreeConcentration => Statement::DegreeConcentration,
            StatementArg::NeighborhoodBound => Statement::NeighborhoodBound,
            StatementArg::VarianceLimit => Statement::VarianceLimit,
            StatementArg::SymMonotone => Statement::SymMonotone,
            StatementArg::ReluNoGain => Statement::ReluNoGain,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train/test accuracy and class statistics per depth.
    Sweep(Common),
    /// Closed-form bound curves per depth.
    Theory(Common),
    /// Predicted depth intervals from the bound curves.
    PredictDepth(Common),
    /// Empirically check one theoretical statement.
    Verify {
        statement: StatementArg,
        #[command(flatten)]
        common: Common,
    },
    /// Per-depth class statistics on an external graph.
    Ingest {
        #[arg(long, requires = "labels")]
        edges: Option<PathBuf>,
        #[arg(long, requires = "edges")]
        labels: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

enum Outcome {
    Done,
    VerificationFailed,
}

/// Run the CLI on the given arguments (including the program name).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let common = match &cli.command {
        Command::Sweep(c) | Command::Theory(c) | Command::PredictDepth(c) => c,
        Command::Verify { common, .. } | Command::Ingest { common, .. } => common,
    };
    let cfg = match load_config(&cli.command, common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    match with_threads(common.threads, || execute(&cli.command, &cfg)) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::VerificationFailed) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    }
}

fn load_config(command: &Command, common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match (command, &common.config) {
        (_, Some(path)) => ExperimentConfig::load(path)?,
        (Command::Ingest { edges: Some(e), labels: Some(l), features, .. }, None) => {
            commands::ingest_config(e, l, features.as_deref(), vec![oversmooth::OperatorSpec::RANDOM_WALK], 10)
        }
        (_, None) => return Err(commands::usage("--config is required")),
    };
    if let Command::Ingest { edges, labels, features, .. } = command {
        if let config::Model::Ingest(paths) = &mut cfg.model {
            if let (Some(e), Some(l)) = (edges, labels) {
                paths.edges = e.clone();
                paths.labels = l.clone();
            }
            if let Some(f) = features {
                paths.features = Some(f.clone());
            }
        }
    }
    cfg.apply_overrides(common.seed, common.trials);
    if let Some(path) = &common.out {
        cfg.output.path = Some(path.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: &Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    let (bytes, passed) = match command {
        Command::Sweep(_) => (commands::sweep(cfg)?, true),
        Command::Theory(_) => (commands::theory(cfg)?, true),
        Command::PredictDepth(_) => (commands::predict(cfg)?, true),
        Command::Verify { statement, .. } => commands::verify_cmd((*statement).into(), cfg)?,
        Command::Ingest { .. } => (commands::ingest(cfg)?, true),
    };
    output::emit(&bytes, cfg.output.path.as_deref())?;
    Ok(if passed { Outcome::Done } else { Outcome::VerificationFailed })
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R>(_threads: usize, f: impl FnOnce() -> R) -> R {
    f()
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<oversmooth::Error>() {
            use oversmooth::Error::*;
            return match e {
                InvalidParameter(_) | Parse { .. } | NodeOutOfRange { .. } | MissingNode { .. } | Usage(_) => EXIT_USAGE,
                Io { .. } => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}
