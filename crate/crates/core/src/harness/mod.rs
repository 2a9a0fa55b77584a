//! Configuration-driven experiment runner.
//!
//! A run reads one JSON [`ExperimentConfig`], executes one or all of the
//! [`Experiment`]s and writes one CSV per experiment plus a `manifest.json`
//! into the output directory. CSV numbers use Rust's shortest round-trip
//! formatting, and every random draw comes from
//! [`seeded_stream`](crate::rng::seeded_stream), so a `(config, seed)` pair
//! always reproduces the same bytes regardless of the worker count.

mod config;
mod run;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

pub use config::{load_config, parse_config, CellSplittingBlock, EntropyBlock, ExperimentConfig, GridSize, LsaBlock};
pub use run::{experiment_rows, run_experiment, OutputFile, RunManifest, MANIFEST_FILE};

/// Errors of the runner. [`HarnessError::exit_code`] maps them onto the CLI
/// exit status.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown config key `{key}` at line {line}, column {column}")]
    UnknownKey { key: String, line: usize, column: usize },
    #[error("unknown experiment `{0}` (expected one of: lsa_fig5, smallcell_fig7, fbmc_fig8, pon_fig10, entropy_table)")]
    UnknownExperiment(String),
    #[error("invalid value for {field}: {message}")]
    InvalidValue { field: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{experiment}: {source}")]
    Simulation { experiment: Experiment, source: crate::Error },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl HarnessError {
    /// 2 for configuration problems, 3 for everything raised while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. }
            | HarnessError::UnknownKey { .. }
            | HarnessError::UnknownExperiment(_)
            | HarnessError::InvalidValue { .. } => 2,
            HarnessError::Io { .. } | HarnessError::Simulation { .. } | HarnessError::ThreadPool(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    LsaFig5,
    SmallcellFig7,
    FbmcFig8,
    PonFig10,
    EntropyTable,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::LsaFig5,
        Experiment::SmallcellFig7,
        Experiment::FbmcFig8,
        Experiment::PonFig10,
        Experiment::EntropyTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::LsaFig5 => "lsa_fig5",
            Experiment::SmallcellFig7 => "smallcell_fig7",
            Experiment::FbmcFig8 => "fbmc_fig8",
            Experiment::PonFig10 => "pon_fig10",
            Experiment::EntropyTable => "entropy_table",
        }
    }

    /// CSV header.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Experiment::LsaFig5 => &["c_w", "M_opt", "W_opt_MHz", "eta_opt", "eta_maxM", "eta_maxW"],
            Experiment::SmallcellFig7 => &["D", "density", "mean_cell_capacity", "ase", "total_power_watts", "ci95"],
            Experiment::FbmcFig8 => &["L", "spacing_kHz", "N", "mean_sir_db", "trials"],
            Experiment::PonFig10 => &["group_size_N", "hot_load_fraction", "mean_delay_ms", "p95_delay_ms", "stable"],
            Experiment::EntropyTable => {
                &["allocation_kind", "N", "width", "height", "M", "h_of_M", "E_C", "conflicts", "converged"]
            }
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::UnknownExperiment(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert_eq!("bogus".parse::<Experiment>().unwrap_err().exit_code(), 2);
    }
}
