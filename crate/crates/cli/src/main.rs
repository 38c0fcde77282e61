//! `dialstruct`: score, train, decode and evaluate dialogue structure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgAction, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "dialstruct", version, about = "Joint discourse parsing and topic segmentation of dialogues")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration field, e.g. `--set train.learning_rate=1e-3`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Seed for training and synthesis; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-dialogue work.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Input corpus; shorthand for `--set paths.corpus=...`.
    #[arg(long, global = true, value_name = "PATH")]
    corpus: Option<PathBuf>,
    /// Output file or directory; shorthand for `--set paths.output=...`.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write topic and rhetorical score matrices for a corpus.
    Score,
    /// Train fusion parameters and write them with the loss history.
    Train {
        /// Parameter file to write.
        #[arg(long, value_name = "PATH")]
        params: Option<PathBuf>,
    },
    /// Decode trees and segmentations.
    Infer {
        /// Parameter file to read.
        #[arg(long, value_name = "PATH", conflicts_with = "identity")]
        params: Option<PathBuf>,
        /// Use identity parameters (plain sum of the two matrices).
        #[arg(long)]
        identity: bool,
    },
    /// Score predicted structures against gold.
    Eval {
        /// Structures file to evaluate.
        #[arg(long, value_name = "PATH")]
        predictions: Option<PathBuf>,
        /// Leave out gold dialogues without a prediction instead of failing.
        #[arg(long)]
        allow_missing: bool,
    },
    /// Generate a synthetic corpus with planted structure and its matrices.
    Synth,
    /// Corpus statistics, optionally against a published dataset inventory.
    Stats {
        /// Reference dataset (molweni, stac, doc2dial, tiage, dialseg711).
        #[arg(long)]
        dataset: Option<String>,
        /// Exit with status 1 when a statistic is outside its band.
        #[arg(long, requires = "dataset")]
        check: bool,
    },
}

fn path_override(key: &str, p: &Option<PathBuf>) -> Option<String> {
    // TOML string syntax keeps paths with odd characters intact.
    p.as_ref().map(|p| {
        format!("paths.{key}={}", toml::Value::String(p.to_string_lossy().into_owned()))
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut overrides = cli.set.clone();
    overrides.extend(path_override("corpus", &cli.corpus));
    overrides.extend(path_override("output", &cli.output));
    match &cli.command {
        Command::Train { params } => overrides.extend(path_override("params_out", params)),
        Command::Infer { params, .. } => overrides.extend(path_override("params_in", params)),
        Command::Eval { predictions, .. } => overrides.extend(path_override("predictions", predictions)),
        _ => {}
    }
    if let Some(t) = cli.threads {
        overrides.push(format!("threads={t}"));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides, cli.seed)?;

    match cli.command {
        Command::Score => commands::score(&cfg)?,
        Command::Train { .. } => commands::train_cmd(&cfg)?,
        Command::Infer { identity, .. } => commands::infer_cmd(&cfg, identity)?,
        Command::Eval { allow_missing, .. } => commands::eval_cmd(&cfg, allow_missing)?,
        Command::Synth => commands::synth(&cfg)?,
        Command::Stats { dataset, check } => {
            let ok = commands::stats(&cfg, dataset.as_deref())?;
            if check && !ok {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
