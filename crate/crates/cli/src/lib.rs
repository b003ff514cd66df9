//! Command-line front end: file-based ingestion, model selection,
//! training, generation and evaluation.

pub mod commands;
pub mod config;
pub mod error;
pub mod files;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "termtraj", version, about = "Procedure-relative trajectory models for terminal airspace traffic")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads for parallel steps.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster radar-vector segments into candidate nominal paths and keep a subset.
    ReviewPaths {
        /// Number of candidate paths.
        #[arg(long)]
        k: Option<usize>,
        /// Candidate indices to keep (default: all).
        #[arg(long, value_delimiter = ',')]
        keep: Option<Vec<usize>>,
    },
    /// Build deviation-vector datasets from recorded tracks.
    Ingest,
    /// Silhouette and held-out rank curves per segment.
    Select,
    /// Fit the single-trajectory model.
    Train,
    /// Fit pairwise models per procedure combination.
    TrainPairwise,
    /// Generate single trajectories.
    Generate {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Generate multi-aircraft scenes.
    GenerateScenes {
        /// Independent single-model trajectories with resampled inter-arrival times.
        #[arg(long)]
        independent: bool,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        aircraft: Option<usize>,
    },
    /// Compare a synthetic set with an actual one.
    Evaluate {
        #[arg(long, value_name = "PATH")]
        actual: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        synthetic: Option<PathBuf>,
    },
}

/// Load the configuration with command-line overrides applied.
pub fn load_config(global: &GlobalArgs) -> CliResult<RunConfig> {
    let path = global
        .config
        .as_ref()
        .ok_or_else(|| CliError::usage("--config <path> is required"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = global.seed {
        cfg.settings.seed = seed;
    }
    if let Some(out) = &global.out {
        cfg.settings.out_dir = out.clone();
    }
    if let Some(t) = global.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        cfg.settings.threads = Some(t);
    }
    Ok(cfg)
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // a pool may already exist when several commands share a process
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialized");
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = load_config(&cli.global)?;
    init_threads(cfg.settings.threads);
    match &cli.command {
        Command::ReviewPaths { k, keep } => commands::review_paths(&cfg, *k, keep.as_deref()),
        Command::Ingest => commands::ingest(&cfg),
        Command::Select => commands::select(&cfg),
        Command::Train => commands::train(&cfg),
        Command::TrainPairwise => commands::train_pairwise_cmd(&cfg),
        Command::Generate { count } => commands::generate(&cfg, *count),
        Command::GenerateScenes {
            independent,
            count,
            aircraft,
        } => commands::generate_scenes(&cfg, *independent, *count, *aircraft),
        Command::Evaluate { actual, synthetic } => commands::evaluate(&cfg, actual.clone(), synthetic.clone()),
    }
}

/// Parse `args` (including the program name) and run.
pub fn run_args<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::usage(e.to_string()))?;
    run(&cli)
}
