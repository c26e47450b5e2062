mod commands;
mod config;
mod error;

use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Deterministic experiment runner for similarity-based group
/// recommendation on sparse explicit feedback.
#[derive(Parser)]
#[command(name = "cbsf", version)]
struct Cli {
    /// TOML experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in parameter preset (movielens100k, filmtrust).
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Override the split seed; group generation uses seed + 1.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// RMSE/MAE of every similarity measure under KNN and TOPSIS.
    PredictEval,
    /// Group satisfaction, consensus and fairness over the n_top sweep.
    GroupEval,
    /// Novelty, NTC and NTR over the n_top sweep (needs a trust file).
    NoveltyEval,
    /// Top-N recommendation for an ad-hoc group.
    Recommend {
        /// Comma-separated member user ids.
        #[arg(long)]
        members: String,
    },
    /// Emit the train/test split manifest.
    Split,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }

    let mut cfg = resolve_config(&cli)?;
    if let Some(seed) = cli.seed {
        cfg.apply_seed(seed);
    }
    cfg.validate().map_err(CliError::Config)?;

    let mut out: BufWriter<Box<dyn Write>> = BufWriter::new(match &cli.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    });

    match &cli.command {
        Command::PredictEval => commands::predict_eval(&cfg, &mut out)?,
        Command::GroupEval => commands::group_eval(&cfg, &mut out)?,
        Command::NoveltyEval => commands::novelty_eval(&cfg, &mut out)?,
        Command::Recommend { members } => commands::recommend_group(&cfg, members, &mut out)?,
        Command::Split => commands::split_manifest(&cfg, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "--config and --preset are mutually exclusive".into(),
        )),
        (Some(path), None) => ExperimentConfig::load(path),
        (None, Some(name)) => config::preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset {name:?}; available: {}",
                config::PRESET_NAMES.join(", ")
            ))
        }),
        (None, None) => Err(CliError::Config(
            "provide --config <file> or --preset <name>".into(),
        )),
    }
}
