use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Experiment, HarnessError};
use crate::cell_splitting::{self, AlphaProfile, DEFAULT_D0_M, DEFAULT_NOISE_POWER_W};
use crate::fbmc_mimo::{FbmcConfig, SweepConfig};
use crate::lsa_optimizer::{CostModel, RadioParams};
use crate::pon_dba::HotOnuScenario;
use crate::selforg_entropy::TemplateSequence;

/// Spectrum-price sweep of the LSA optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LsaBlock {
    /// Antennas available in the unit square.
    pub n_antennas: usize,
    pub n_users: usize,
    pub radio: RadioParams,
    pub m_max: usize,
    pub w_min_mhz: f64,
    pub w_max_mhz: f64,
    pub w_grid_points: usize,
    pub c_m: f64,
    pub c_o: f64,
    pub c_w_values: Vec<f64>,
}

impl Default for LsaBlock {
    fn default() -> Self {
        Self {
            n_antennas: 20,
            n_users: 4,
            radio: RadioParams::default(),
            m_max: 20,
            w_min_mhz: 0.1,
            w_max_mhz: 50.0,
            w_grid_points: 1000,
            c_m: 1.0,
            c_o: 0.01,
            c_w_values: (-8..=8).map(|k| 10f64.powf(k as f64 / 2.0)).collect(),
        }
    }
}

/// Cell-splitting densities and Monte Carlo sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSplittingBlock {
    pub scales: Vec<f64>,
    pub beta: f64,
    pub side_m: f64,
    pub p0_watts: f64,
    pub d0_m: f64,
    pub noise_power_watts: f64,
    pub alpha: AlphaProfile,
    pub n_users: usize,
    pub n_trials: usize,
}

impl Default for CellSplittingBlock {
    fn default() -> Self {
        Self {
            scales: vec![1.0, 0.5, 0.25],
            beta: 4.0,
            side_m: 800.0,
            p0_watts: 1.0,
            d0_m: DEFAULT_D0_M,
            noise_power_watts: DEFAULT_NOISE_POWER_W,
            alpha: AlphaProfile::default(),
            n_users: 2000,
            n_trials: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSize {
    pub width: usize,
    pub height: usize,
}

impl GridSize {
    pub const fn square(side: usize) -> Self {
        Self { width: side, height: side }
    }
}

/// Self-organization and entropy table. Each allocation kind has its own
/// grid size; the i.i.d. reference needs a large grid before `h(6)` is
/// resolvable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyBlock {
    pub n_channels: usize,
    pub regular: GridSize,
    pub random: GridSize,
    pub selforg: GridSize,
    pub m_max: usize,
    pub max_epochs: usize,
    pub bias_correction: bool,
    pub template: Vec<(isize, isize)>,
}

impl Default for EntropyBlock {
    fn default() -> Self {
        Self {
            n_channels: 6,
            regular: GridSize::square(1024),
            random: GridSize::square(4096),
            selforg: GridSize::square(256),
            m_max: 6,
            max_epochs: 1000,
            bias_correction: true,
            template: TemplateSequence::default().offsets().to_vec(),
        }
    }
}

/// A fully defaulted run description.
///
/// `experiment = None` runs every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; `None` uses every core. Results do not depend on it.
    pub workers: Option<usize>,
    pub lsa: LsaBlock,
    pub cell_splitting: CellSplittingBlock,
    pub fbmc: SweepConfig,
    pub pon: HotOnuScenario,
    pub entropy: EntropyBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 0,
            out: PathBuf::from("results"),
            workers: None,
            lsa: LsaBlock::default(),
            cell_splitting: CellSplittingBlock::default(),
            fbmc: SweepConfig::default(),
            pon: HotOnuScenario::default(),
            entropy: EntropyBlock::default(),
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::InvalidValue { field: field.to_string(), message: msg.to_string() }
}

fn positive_finite(field: &str, values: &[f64]) -> Result<(), HarnessError> {
    match values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        Some(v) => Err(invalid(field, format!("{v} must be finite and > 0"))),
        None => Ok(()),
    }
}

impl ExperimentConfig {
    /// Experiments selected by this config, in canonical order.
    pub fn experiments(&self) -> Result<Vec<Experiment>, HarnessError> {
        match &self.experiment {
            None => Ok(Experiment::ALL.to_vec()),
            Some(name) => Ok(vec![name.parse()?]),
        }
    }

    /// Range checks on every block, independent of the selected experiment.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.experiments()?;
        if self.workers == Some(0) {
            return Err(invalid("workers", "must be >= 1"));
        }

        let l = &self.lsa;
        if l.n_antennas == 0 || l.n_users == 0 {
            return Err(invalid("lsa.n_antennas/n_users", "must be >= 1"));
        }
        if l.m_max == 0 || l.m_max > l.n_antennas {
            return Err(invalid("lsa.m_max", format!("must be in 1..={}", l.n_antennas)));
        }
        if !(l.w_min_mhz > 0.0 && l.w_min_mhz < l.w_max_mhz && l.w_max_mhz.is_finite()) {
            return Err(invalid("lsa.w_min_mhz/w_max_mhz", "need 0 < w_min < w_max"));
        }
        if l.w_grid_points == 0 {
            return Err(invalid("lsa.w_grid_points", "must be >= 1"));
        }
        if l.c_w_values.is_empty() {
            return Err(invalid("lsa.c_w_values", "must be non-empty"));
        }
        for &c_w in &l.c_w_values {
            CostModel::new(l.c_m, c_w, l.c_o).map_err(|e| invalid("lsa costs", e))?;
        }
        let r = &l.radio;
        if !(r.per_antenna_power > 0.0 && r.noise_psd > 0.0 && r.min_distance > 0.0 && r.pathloss_exponent >= 2.0) {
            return Err(invalid("lsa.radio", "need power, noise_psd, min_distance > 0 and pathloss_exponent >= 2"));
        }

        let c = &self.cell_splitting;
        if c.scales.is_empty() {
            return Err(invalid("cell_splitting.scales", "must be non-empty"));
        }
        for &d in &c.scales {
            cell_splitting::sites_per_side(d, c.side_m, c.d0_m).map_err(|e| invalid("cell_splitting.scales", e))?;
        }
        positive_finite("cell_splitting.p0_watts", &[c.p0_watts])?;
        if !c.beta.is_finite() || !(c.noise_power_watts >= 0.0) {
            return Err(invalid("cell_splitting", "beta must be finite and noise power >= 0"));
        }
        if c.n_users == 0 || c.n_trials == 0 {
            return Err(invalid("cell_splitting.n_users/n_trials", "must be >= 1"));
        }
        c.alpha.draw(1, &mut crate::rng::seeded_stream(0, "validate", 0)).map_err(|e| invalid("cell_splitting.alpha", e))?;

        let f = &self.fbmc;
        if f.subcarriers.is_empty() || f.antennas.is_empty() || f.antennas.contains(&0) {
            return Err(invalid("fbmc.subcarriers/antennas", "must be non-empty with antennas >= 1"));
        }
        if f.trials == 0 || f.n_symbols <= 2 * f.edge_symbols {
            return Err(invalid("fbmc", "need trials >= 1 and n_symbols > 2 * edge_symbols"));
        }
        for &l in &f.subcarriers {
            let cfg = FbmcConfig { subcarriers: l, kappa: f.kappa, n_symbols: f.n_symbols, total_bandwidth_hz: f.total_bandwidth_hz };
            crate::fbmc_mimo::FilterBank::new(cfg).map_err(|e| invalid("fbmc.subcarriers/kappa", e))?;
        }
        f.pdp.validate().map_err(|e| invalid("fbmc.pdp", e))?;

        self.pon.validate().map_err(|e| invalid("pon", e))?;

        let e = &self.entropy;
        if e.n_channels < 5 || e.n_channels > 255 {
            return Err(invalid("entropy.n_channels", "must be in 5..=255"));
        }
        if e.m_max == 0 || e.m_max > e.template.len() {
            return Err(invalid("entropy.m_max", format!("must be in 1..={}", e.template.len())));
        }
        if e.max_epochs == 0 {
            return Err(invalid("entropy.max_epochs", "must be >= 1"));
        }
        for (name, g) in [("entropy.regular", e.regular), ("entropy.random", e.random), ("entropy.selforg", e.selforg)] {
            if g.width < 8 || g.height < 8 {
                return Err(invalid(name, "grids must be at least 8 x 8"));
            }
        }
        TemplateSequence::new(e.template.clone()).map_err(|err| invalid("entropy.template", err))?;
        Ok(())
    }
}

/// Parse a JSON config. Missing fields take their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        match message.strip_prefix("unknown field `") {
            Some(rest) => HarnessError::UnknownKey {
                key: rest.split('`').next().unwrap_or_default().to_string(),
                line: e.line(),
                column: e.column(),
            },
            None => HarnessError::Parse { line: e.line(), column: e.column(), message },
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e })?;
    parse_config(&text)
}
