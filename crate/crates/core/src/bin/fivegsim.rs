use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fivegsim::harness::{load_config, run_experiment, Experiment, ExperimentConfig, HarnessError};

/// Reproducible 5G technology experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, or all of them when none is named.
    Run {
        #[arg(long)]
        experiment: Option<String>,
        /// JSON config; every field is optional.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (results do not depend on it).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Parse and range-check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print experiment names and their CSV columns.
    List,
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { experiment, config, seed, out, workers } => {
            let mut cfg = match config {
                Some(path) => load_config(&path)?,
                None => ExperimentConfig::default(),
            };
            if experiment.is_some() {
                cfg.experiment = experiment;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.out = out;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            let manifest = run_experiment(&cfg)?;
            for o in &manifest.outputs {
                println!("{}", cfg.out.join(&o.file).display());
            }
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            let names: Vec<_> = cfg.experiments()?.iter().map(|e| e.name()).collect();
            println!("ok: {}", names.join(", "));
        }
        Command::List => {
            for e in Experiment::ALL {
                println!("{}: {}", e.name(), e.columns().join(","));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
