use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Cplx;
use crate::error::{arg, Result};
use crate::rng::seeded_stream;

const RNG_TAG: &str = "fbmc_channel";

/// Exponential power-delay profile sampled at the baseband rate.
///
/// Tap `i` (delay `i / sample_rate`) has power proportional to
/// `exp(-i / (rms_delay_spread * sample_rate))`; powers sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerDelayProfile {
    /// Decay constant of the profile, seconds.
    pub rms_delay_spread_s: f64,
    pub n_taps: usize,
    pub sample_rate_hz: f64,
}

impl Default for PowerDelayProfile {
    fn default() -> Self {
        Self { rms_delay_spread_s: 1.0e-6, n_taps: 16, sample_rate_hz: super::DEFAULT_TOTAL_BANDWIDTH_HZ }
    }
}

impl PowerDelayProfile {
    pub fn validate(&self) -> Result<()> {
        if self.n_taps == 0 {
            return arg("power-delay profile needs at least one tap");
        }
        if !(self.rms_delay_spread_s >= 0.0 && self.sample_rate_hz > 0.0) {
            return arg("delay spread must be >= 0 and sample rate > 0");
        }
        Ok(())
    }

    /// Power-weighted mean tap delay, in samples.
    pub fn mean_delay_samples(&self) -> f64 {
        self.tap_powers().iter().enumerate().map(|(i, p)| i as f64 * p).sum()
    }

    /// Receiver timing offset: the mean delay rounded to the nearest sample.
    pub fn sync_delay_samples(&self) -> usize {
        (self.mean_delay_samples().round() as usize).min(self.n_taps.saturating_sub(1))
    }

    pub fn tap_powers(&self) -> Vec<f64> {
        let decay = self.rms_delay_spread_s * self.sample_rate_hz;
        let raw: Vec<f64> = (0..self.n_taps)
            .map(|i| if decay > 0.0 { (-(i as f64) / decay).exp() } else if i == 0 { 1.0 } else { 0.0 })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / total).collect()
    }
}

/// Independent Rayleigh multipath channels towards `n_antennas` receive antennas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub n_antennas: usize,
    pub pdp: PowerDelayProfile,
    pub seed: u64,
}

/// Tap vectors, one per receive antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Vec<Cplx>>,
}

impl ChannelRealization {
    /// The same tap vector on every antenna.
    pub fn replicated(taps: Vec<Cplx>, n_antennas: usize) -> Self {
        Self { taps: vec![taps; n_antennas] }
    }

    pub fn n_antennas(&self) -> usize {
        self.taps.len()
    }

    /// Per-antenna responses at the `l` subcarrier centers, as seen by a
    /// receiver whose timing is `advance` samples late relative to tap 0.
    pub fn subcarrier_gains(&self, l: usize, advance: usize) -> Vec<Vec<Cplx>> {
        self.taps
            .iter()
            .map(|h| {
                frequency_response(h, l)
                    .into_iter()
                    .enumerate()
                    .map(|(k, g)| g * Cplx::from_polar(1.0, 2.0 * PI * ((k * advance) % l) as f64 / l as f64))
                    .collect()
            })
            .collect()
    }
}

impl ChannelModel {
    /// Realization number `trial`. Antennas are drawn in order from one
    /// stream, so the first `n` antennas do not depend on `n_antennas`.
    pub fn realize(&self, trial: u64) -> Result<ChannelRealization> {
        self.pdp.validate()?;
        if self.n_antennas == 0 {
            return arg("channel model needs at least one antenna");
        }
        let mut rng = seeded_stream(self.seed, RNG_TAG, trial);
        let amp: Vec<f64> = self.pdp.tap_powers().iter().map(|p| (p / 2.0).sqrt()).collect();
        let taps = (0..self.n_antennas)
            .map(|_| {
                amp.iter()
                    .map(|&a| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Cplx::new(a * re, a * im)
                    })
                    .collect()
            })
            .collect();
        Ok(ChannelRealization { taps })
    }
}

/// Full linear convolution, `signal.len() + taps.len() - 1` samples.
pub fn convolve(signal: &[Cplx], taps: &[Cplx]) -> Vec<Cplx> {
    if signal.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Cplx::new(0.0, 0.0); signal.len() + taps.len() - 1];
    for (d, &h) in taps.iter().enumerate() {
        if h == Cplx::new(0.0, 0.0) {
            continue;
        }
        for (o, &s) in out[d..].iter_mut().zip(signal) {
            *o += h * s;
        }
    }
    out
}

/// The signal seen by every receive antenna. No noise is added.
pub fn apply_channel(signal: &[Cplx], channel: &ChannelRealization) -> Vec<Vec<Cplx>> {
    channel.taps.iter().map(|h| convolve(signal, h)).collect()
}

/// `H(k / l) = sum_d h[d] exp(-j 2 pi k d / l)` for `k = 0..l`.
pub fn frequency_response(taps: &[Cplx], l: usize) -> Vec<Cplx> {
    (0..l)
        .map(|k| {
            taps.iter()
                .enumerate()
                .map(|(d, &h)| h * Cplx::from_polar(1.0, -2.0 * PI * ((k * d) % l) as f64 / l as f64))
                .sum()
        })
        .collect()
}
