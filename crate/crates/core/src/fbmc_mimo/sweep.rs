use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{convolve, ChannelModel, ChannelRealization, PowerDelayProfile};
use super::combine::MfAccumulator;
use super::filterbank::{destagger, FbmcConfig, FilterBank, DEFAULT_TOTAL_BANDWIDTH_HZ};
use super::sir::{measure_sir, SirMeasurement};
use super::Cplx;
use crate::error::{arg, Result};
use crate::rng::{seeded_stream, Stream};
use crate::stats;

/// Unit-energy QPSK symbols.
pub fn qpsk_frame(l: usize, n_symbols: usize, rng: &mut Stream) -> Array2<Cplx> {
    Array2::from_shape_fn((l, n_symbols), |_| {
        let re = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
        let im = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
        Cplx::new(re, im)
    })
}

/// Back-to-back synthesis and analysis of a random QPSK frame.
pub fn loopback_sir(config: FbmcConfig, seed: u64, edge_symbols: usize) -> Result<SirMeasurement> {
    let bank = FilterBank::new(config)?;
    let mut rng = seeded_stream(seed, "fbmc_loopback", config.subcarriers as u64);
    let frame = qpsk_frame(config.subcarriers, config.n_symbols, &mut rng);
    let rx = bank.analyze(&bank.synthesize(&frame)?)?;
    measure_sir(&frame, &rx, edge_symbols)
}

/// Aggregate SIR (dB) after matched-filter combining of the first `n`
/// antennas of `channel`, for each `n` in `antenna_counts` (ascending).
///
/// The receiver starts its analysis window `sync_delay` samples after the
/// transmit frame start, and the combining gains are the channel responses
/// seen with that timing.
pub fn trial_sir_curve(
    bank: &FilterBank,
    frame: &Array2<Cplx>,
    channel: &ChannelRealization,
    antenna_counts: &[usize],
    edge_symbols: usize,
    sync_delay: usize,
) -> Result<Vec<f64>> {
    if antenna_counts.windows(2).any(|w| w[1] <= w[0]) || antenna_counts.first() == Some(&0) {
        return arg("antenna counts must be positive and strictly ascending");
    }
    let n_max = antenna_counts.last().copied().unwrap_or(0);
    if n_max > channel.n_antennas() {
        return arg(format!("{n_max} antennas requested, channel has {}", channel.n_antennas()));
    }
    let l = bank.config().subcarriers;
    let tx = bank.synthesize(frame)?;
    let gains = channel.subcarrier_gains(l, sync_delay);
    let need = bank.config().signal_len();
    let mut acc = MfAccumulator::new(l, bank.config().oqam_symbols());
    let mut curve = Vec::with_capacity(antenna_counts.len());
    let mut next = antenna_counts.iter().peekable();
    for (n, taps) in channel.taps.iter().take(n_max).enumerate() {
        let mut rx = convolve(&tx, taps);
        rx.drain(..sync_delay.min(rx.len()));
        if rx.len() < need {
            rx.resize(need, Cplx::new(0.0, 0.0));
        }
        acc.add_branch(&bank.analyze_oqam(&rx)?, &gains[n])?;
        if next.peek() == Some(&&(n + 1)) {
            next.next();
            let qam = destagger(&acc.combined());
            curve.push(measure_sir(frame, &qam, edge_symbols)?.aggregate_sir_db);
        }
    }
    Ok(curve)
}

/// Parameters of the SIR sweep over subcarrier counts and antenna counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub subcarriers: Vec<usize>,
    pub antennas: Vec<usize>,
    pub kappa: usize,
    pub n_symbols: usize,
    pub trials: usize,
    /// QAM symbols excluded from statistics at each end of the frame.
    pub edge_symbols: usize,
    pub total_bandwidth_hz: f64,
    pub pdp: PowerDelayProfile,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            subcarriers: vec![16, 32, 64, 128, 256, 512],
            antennas: vec![1, 2, 4, 8, 16, 32, 64, 128],
            kappa: 4,
            n_symbols: 16,
            trials: 100,
            edge_symbols: 2,
            total_bandwidth_hz: DEFAULT_TOTAL_BANDWIDTH_HZ,
            pdp: PowerDelayProfile::default(),
        }
    }
}

/// Mean aggregate SIR for one `(L, N)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub subcarriers: usize,
    pub spacing_khz: f64,
    pub antennas: usize,
    /// Mean over trials of the per-trial aggregate SIR in dB.
    pub mean_sir_db: f64,
    pub trials: usize,
}

/// Run the `(L, N)` sweep.
///
/// The receiver synchronizes to the profile's mean delay
/// ([`PowerDelayProfile::sync_delay_samples`]).
///
/// Trial `t` uses channel realization `t` of the model seeded with `seed`
/// (identical taps for every `L`) and a QPSK frame from stream
/// `("fbmc_frame_L<L>", t)`. Rows are ordered by `L`, then `N`.
pub fn run_sir_sweep(config: &SweepConfig, seed: u64) -> Result<Vec<SweepCell>> {
    if config.trials == 0 {
        return arg("trials must be >= 1");
    }
    if config.subcarriers.is_empty() || config.antennas.is_empty() {
        return arg("subcarrier and antenna lists must be non-empty");
    }
    let mut antennas = config.antennas.clone();
    antennas.sort_unstable();
    antennas.dedup();
    if antennas[0] == 0 {
        return arg("antenna counts must be >= 1");
    }
    let model = ChannelModel { n_antennas: *antennas.last().unwrap(), pdp: config.pdp, seed };
    let sync = config.pdp.sync_delay_samples();
    let mut cells = Vec::new();
    for &l in &config.subcarriers {
        let fb_config = FbmcConfig {
            subcarriers: l,
            kappa: config.kappa,
            n_symbols: config.n_symbols,
            total_bandwidth_hz: config.total_bandwidth_hz,
        };
        let bank = FilterBank::new(fb_config)?;
        let tag = format!("fbmc_frame_L{l}");
        let curves: Vec<Result<Vec<f64>>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|t| {
                let channel = model.realize(t)?;
                let frame = qpsk_frame(l, config.n_symbols, &mut seeded_stream(seed, &tag, t));
                trial_sir_curve(&bank, &frame, &channel, &antennas, config.edge_symbols, sync)
            })
            .collect();
        let curves = curves.into_iter().collect::<Result<Vec<_>>>()?;
        for &n in &config.antennas {
            let idx = antennas.binary_search(&n).expect("deduplicated list contains n");
            let per_trial: Vec<f64> = curves.iter().map(|c| c[idx]).collect();
            cells.push(SweepCell {
                subcarriers: l,
                spacing_khz: fb_config.subcarrier_spacing_hz() / 1e3,
                antennas: n,
                mean_sir_db: stats::mean(&per_trial),
                trials: config.trials,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbmc_mimo::apply_channel;

    #[test]
    fn flat_channel_keeps_loopback_floor() {
        let cfg = FbmcConfig::new(32, 4, 12);
        let bank = FilterBank::new(cfg).unwrap();
        let mut rng = seeded_stream(1, "t", 0);
        let frame = qpsk_frame(32, 12, &mut rng);
        let floor = loopback_sir(cfg, 1, 2).unwrap().aggregate_sir_db;
        let flat = ChannelRealization::replicated(vec![Cplx::new(0.6, 0.8)], 4);
        let curve = trial_sir_curve(&bank, &frame, &flat, &[1, 4], 2, 0).unwrap();
        for s in curve {
            assert!((s - floor).abs() < 1.0, "{s} vs {floor}");
        }
        let per_antenna = apply_channel(&bank.synthesize(&frame).unwrap(), &flat);
        assert_eq!(per_antenna.len(), 4);
    }

    #[test]
    fn curve_rejects_unsorted_counts() {
        let cfg = FbmcConfig::new(16, 4, 6);
        let bank = FilterBank::new(cfg).unwrap();
        let frame = Array2::zeros((16, 6));
        let ch = ChannelRealization::replicated(vec![Cplx::new(1.0, 0.0)], 2);
        assert!(trial_sir_curve(&bank, &frame, &ch, &[2, 1], 1, 0).is_err());
        assert!(trial_sir_curve(&bank, &frame, &ch, &[1, 3], 1, 0).is_err());
    }
}
