use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Experiment, ExperimentConfig, HarnessError};
use crate::cell_splitting::{ase, ScalingScenario};
use crate::fbmc_mimo::run_sir_sweep;
use crate::lsa_optimizer::{sweep_spectrum_price, Deployment, ResourceBounds};
use crate::pon_dba::hot_onu_experiment;
use crate::rng::seeded_stream;
use crate::selforg_entropy::{
    conflict_count, excess_entropy, generate_random, generate_regular, self_organize, ChannelGrid, TemplateSequence,
};

pub const MANIFEST_FILE: &str = "manifest.json";

/// One CSV written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub experiment: String,
    pub file: String,
    /// Data rows, header excluded.
    pub rows: usize,
    pub sha256: String,
}

/// Summary written next to the CSVs as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    /// SHA-256 of the effective config, without `out` and `workers`.
    pub config_hash: String,
    pub seed: u64,
    pub wall_clock_s: f64,
    pub outputs: Vec<OutputFile>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = ExperimentConfig { out: PathBuf::new(), workers: None, ..cfg.clone() };
    let json = serde_json::to_string(&canonical).expect("config serializes");
    hex(&Sha256::digest(json.as_bytes()))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn sim_err(experiment: Experiment) -> impl Fn(crate::Error) -> HarnessError {
    move |source| HarnessError::Simulation { experiment, source }
}

/// Compute the CSV rows of one experiment (header excluded).
pub fn experiment_rows(experiment: Experiment, cfg: &ExperimentConfig) -> Result<Vec<Vec<String>>, HarnessError> {
    let err = sim_err(experiment);
    let seed = cfg.seed;
    let rows = match experiment {
        Experiment::LsaFig5 => {
            let l = &cfg.lsa;
            let dep = Deployment::random_unit_square(
                l.n_antennas,
                l.n_users,
                l.radio,
                &mut seeded_stream(seed, "lsa_deployment", 0),
            )
            .map_err(&err)?;
            let bounds = ResourceBounds::new(l.m_max, l.w_min_mhz, l.w_max_mhz, l.w_grid_points);
            sweep_spectrum_price(&dep, l.c_m, l.c_o, &l.c_w_values, &bounds)
                .map_err(&err)?
                .into_iter()
                .map(|r| {
                    let c = r.comparison;
                    vec![
                        num(r.c_w),
                        c.optimal.m.to_string(),
                        num(c.optimal.w_mhz),
                        num(c.optimal.eta),
                        num(c.max_antennas.eta),
                        num(c.max_bandwidth.eta),
                    ]
                })
                .collect()
        }
        Experiment::SmallcellFig7 => {
            let c = &cfg.cell_splitting;
            let mut rows = Vec::new();
            for (i, &d) in c.scales.iter().enumerate() {
                let mut rng = seeded_stream(seed, "cell_splitting_alpha", i as u64);
                let s = ScalingScenario::with_profile(
                    d,
                    c.beta,
                    c.side_m,
                    c.p0_watts,
                    c.d0_m,
                    c.noise_power_watts,
                    c.alpha,
                    &mut rng,
                )
                .map_err(&err)?;
                let r = ase(&s, c.n_users, c.n_trials, seed).map_err(&err)?;
                rows.push(vec![
                    num(d),
                    num(r.density),
                    num(r.mean_cell_capacity),
                    num(r.ase),
                    num(r.total_power),
                    num(r.ci95),
                ]);
            }
            rows
        }
        Experiment::FbmcFig8 => run_sir_sweep(&cfg.fbmc, seed)
            .map_err(&err)?
            .into_iter()
            .map(|c| {
                vec![
                    c.subcarriers.to_string(),
                    num(c.spacing_khz),
                    c.antennas.to_string(),
                    num(c.mean_sir_db),
                    c.trials.to_string(),
                ]
            })
            .collect(),
        Experiment::PonFig10 => hot_onu_experiment(&cfg.pon, seed)
            .map_err(&err)?
            .into_iter()
            .map(|r| {
                vec![
                    r.group_size.to_string(),
                    num(r.hot_load_fraction),
                    num(r.mean_delay_ms),
                    num(r.p95_delay_ms),
                    r.stable.to_string(),
                ]
            })
            .collect(),
        Experiment::EntropyTable => entropy_rows(cfg).map_err(&err)?,
    };
    Ok(rows)
}

fn entropy_rows(cfg: &ExperimentConfig) -> crate::Result<Vec<Vec<String>>> {
    let e = &cfg.entropy;
    let template = TemplateSequence::new(e.template.clone())?;
    let organized = self_organize(e.n_channels, e.selforg.width, e.selforg.height, e.max_epochs, cfg.seed)?;
    let grids: [(&str, ChannelGrid, bool); 3] = [
        ("regular", generate_regular(e.n_channels, e.regular.width, e.regular.height)?, true),
        ("random", generate_random(e.n_channels, e.random.width, e.random.height, cfg.seed)?, false),
        ("selforg", organized.grid, organized.converged),
    ];
    let mut rows = Vec::new();
    for (kind, grid, converged) in grids {
        let est = excess_entropy(&grid, e.m_max, &template, e.bias_correction)?;
        let conflicts = conflict_count(&grid);
        let converged = converged && conflicts == 0;
        for (i, h) in est.h_of_m.iter().enumerate() {
            rows.push(vec![
                kind.to_string(),
                e.n_channels.to_string(),
                grid.width().to_string(),
                grid.height().to_string(),
                (i + 1).to_string(),
                num(*h),
                num(est.excess_entropy),
                conflicts.to_string(),
                converged.to_string(),
            ]);
        }
    }
    Ok(rows)
}

fn csv_bytes(experiment: Experiment, rows: &[Vec<String>]) -> Result<Vec<u8>, HarnessError> {
    let to_err = |e: csv::Error| HarnessError::Simulation {
        experiment,
        source: crate::Error::Degenerate(format!("CSV encoding: {e}")),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(experiment.columns()).map_err(to_err)?;
    for r in rows {
        w.write_record(r).map_err(to_err)?;
    }
    w.into_inner().map_err(|e| to_err(e.into_error().into()))
}

/// Write through a temporary file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let io = |e| HarnessError::Io { path: path.to_path_buf(), source: e };
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

fn run_all(cfg: &ExperimentConfig, written: &mut Vec<PathBuf>) -> Result<RunManifest, HarnessError> {
    let start = Instant::now();
    let experiments = cfg.experiments()?;
    fs::create_dir_all(&cfg.out).map_err(|e| HarnessError::Io { path: cfg.out.clone(), source: e })?;
    let mut outputs = Vec::new();
    for exp in experiments {
        let t = Instant::now();
        info!("running {exp}");
        let rows = experiment_rows(exp, cfg)?;
        let bytes = csv_bytes(exp, &rows)?;
        let path = cfg.out.join(exp.file_name());
        write_atomic(&path, &bytes)?;
        written.push(path);
        info!("{exp}: {} rows in {:.2?}", rows.len(), t.elapsed());
        outputs.push(OutputFile {
            experiment: exp.name().to_string(),
            file: exp.file_name(),
            rows: rows.len(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
    }
    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(cfg),
        seed: cfg.seed,
        wall_clock_s: start.elapsed().as_secs_f64(),
        outputs,
    };
    let path = cfg.out.join(MANIFEST_FILE);
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&path, &json)?;
    written.push(path);
    Ok(manifest)
}

/// Run the configured experiment(s), writing CSVs and the manifest into
/// `cfg.out`. On error every file written by this call is removed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest, HarnessError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
    let mut written = Vec::new();
    let result = pool.install(|| run_all(cfg, &mut written));
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    result
}
