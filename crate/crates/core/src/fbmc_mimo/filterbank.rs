use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::prototype::design_prototype;
use super::Cplx;
use crate::error::{arg, Result};

/// Total simulated bandwidth, equal to the baseband sample rate.
pub const DEFAULT_TOTAL_BANDWIDTH_HZ: f64 = 2.8e6;

/// Filter bank dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmcConfig {
    /// Number of subcarriers `L` (power of two).
    pub subcarriers: usize,
    /// Overlapping factor: prototype length in multicarrier symbol periods.
    pub kappa: usize,
    /// QAM symbols per subcarrier in a frame.
    pub n_symbols: usize,
    pub total_bandwidth_hz: f64,
}

impl FbmcConfig {
    pub fn new(subcarriers: usize, kappa: usize, n_symbols: usize) -> Self {
        Self { subcarriers, kappa, n_symbols, total_bandwidth_hz: DEFAULT_TOTAL_BANDWIDTH_HZ }
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.total_bandwidth_hz / self.subcarriers as f64
    }

    /// Real OQAM symbols per subcarrier (two per QAM symbol).
    pub fn oqam_symbols(&self) -> usize {
        2 * self.n_symbols
    }

    pub fn prototype_len(&self) -> usize {
        self.kappa * self.subcarriers
    }

    /// Length of a synthesized frame: `(2T - 1) L/2 + kappa L`.
    pub fn signal_len(&self) -> usize {
        (self.oqam_symbols() - 1) * self.subcarriers / 2 + self.prototype_len()
    }

    fn validate(&self) -> Result<()> {
        if self.n_symbols == 0 {
            return arg("frame needs at least one QAM symbol");
        }
        if !(self.total_bandwidth_hz > 0.0) {
            return arg("total bandwidth must be > 0");
        }
        Ok(())
    }
}

/// OQAM staggering: `a[k, 2t] = Re c[k, t]`, `a[k, 2t + 1] = Im c[k, t]`.
pub fn stagger(qam: &Array2<Cplx>) -> Array2<f64> {
    let (l, t) = qam.dim();
    Array2::from_shape_fn((l, 2 * t), |(k, n)| {
        let c = qam[[k, n / 2]];
        if n % 2 == 0 {
            c.re
        } else {
            c.im
        }
    })
}

/// Inverse of [`stagger`] applied to phase-compensated analysis outputs:
/// keeps the real part of each OQAM sample and pairs them back into QAM.
pub fn destagger(oqam: &Array2<Cplx>) -> Array2<Cplx> {
    let (l, n) = oqam.dim();
    Array2::from_shape_fn((l, n / 2), |(k, t)| Cplx::new(oqam[[k, 2 * t]].re, oqam[[k, 2 * t + 1]].re))
}

/// `j^((k + n) mod 4)`.
fn oqam_phase(k: usize, n: usize) -> Cplx {
    match (k + n) % 4 {
        0 => Cplx::new(1.0, 0.0),
        1 => Cplx::new(0.0, 1.0),
        2 => Cplx::new(-1.0, 0.0),
        _ => Cplx::new(0.0, -1.0),
    }
}

/// Polyphase FBMC synthesis/analysis pair.
///
/// Basis function of OQAM sample `(k, n)`:
/// `g[m - n L/2] * exp(j 2 pi k (m - n L/2 - c) / L) * j^(k+n)`,
/// with `c = (kappa L - 1) / 2` the prototype center. Both banks run one
/// `L`-point FFT per OQAM symbol on a folded block of `kappa L` samples.
pub struct FilterBank {
    config: FbmcConfig,
    prototype: Vec<f64>,
    /// `exp(-j 2 pi k c / L)`.
    center_twiddle: Vec<Cplx>,
    ifft: Arc<dyn Fft<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FilterBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FilterBank").field("config", &self.config).finish_non_exhaustive()
    }
}

impl FilterBank {
    pub fn new(config: FbmcConfig) -> Result<Self> {
        config.validate()?;
        let prototype = design_prototype(config.subcarriers, config.kappa)?;
        let l = config.subcarriers;
        let center = (config.prototype_len() as f64 - 1.0) / 2.0;
        let center_twiddle =
            (0..l).map(|k| Cplx::from_polar(1.0, -2.0 * PI * k as f64 * center / l as f64)).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            prototype,
            center_twiddle,
            ifft: planner.plan_fft_inverse(l),
            fft: planner.plan_fft_forward(l),
        })
    }

    pub fn config(&self) -> &FbmcConfig {
        &self.config
    }

    pub fn prototype(&self) -> &[f64] {
        &self.prototype
    }

    /// Modulate an `L x T` QAM matrix into a baseband frame of
    /// [`FbmcConfig::signal_len`] samples.
    pub fn synthesize(&self, qam: &Array2<Cplx>) -> Result<Vec<Cplx>> {
        let l = self.config.subcarriers;
        if qam.dim() != (l, self.config.n_symbols) {
            return arg(format!(
                "symbol matrix is {:?}, expected ({l}, {})",
                qam.dim(),
                self.config.n_symbols
            ));
        }
        let oqam = stagger(qam);
        let mut out = vec![Cplx::new(0.0, 0.0); self.config.signal_len()];
        let mut block = vec![Cplx::new(0.0, 0.0); l];
        let mut scratch = vec![Cplx::new(0.0, 0.0); self.ifft.get_inplace_scratch_len()];
        for n in 0..self.config.oqam_symbols() {
            for k in 0..l {
                block[k] = oqam_phase(k, n) * self.center_twiddle[k] * oqam[[k, n]];
            }
            self.ifft.process_with_scratch(&mut block, &mut scratch);
            let start = n * l / 2;
            for (i, (&g, o)) in self.prototype.iter().zip(&mut out[start..]).enumerate() {
                *o += block[i % l] * g;
            }
        }
        Ok(out)
    }

    /// Matched analysis bank with phase compensation: the `L x 2T` complex
    /// OQAM outputs before the real-part decision.
    pub fn analyze_oqam(&self, signal: &[Cplx]) -> Result<Array2<Cplx>> {
        let need = self.config.signal_len();
        if signal.len() < need {
            return arg(format!("signal has {} samples, analysis needs {need}", signal.len()));
        }
        let l = self.config.subcarriers;
        let n_oqam = self.config.oqam_symbols();
        let mut out = Array2::zeros((l, n_oqam));
        let mut block = vec![Cplx::new(0.0, 0.0); l];
        let mut scratch = vec![Cplx::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for n in 0..n_oqam {
            block.iter_mut().for_each(|b| *b = Cplx::new(0.0, 0.0));
            let start = n * l / 2;
            for (i, (&g, &r)) in self.prototype.iter().zip(&signal[start..]).enumerate() {
                block[i % l] += r * g;
            }
            self.fft.process_with_scratch(&mut block, &mut scratch);
            for k in 0..l {
                out[[k, n]] = block[k] * self.center_twiddle[k].conj() * oqam_phase(k, n).conj();
            }
        }
        Ok(out)
    }

    /// Full demodulation of a single stream back to the `L x T` QAM matrix.
    pub fn analyze(&self, signal: &[Cplx]) -> Result<Array2<Cplx>> {
        Ok(destagger(&self.analyze_oqam(signal)?))
    }
}
