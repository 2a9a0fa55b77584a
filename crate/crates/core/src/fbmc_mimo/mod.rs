//! FBMC/OQAM transmultiplexer over per-antenna multipath channels with
//! matched-filter combining, and the SIR sweep over receive antennas `N` and
//! subcarriers `L`.
//!
//! ```text
//! QAM (L x T) -> OQAM stagger -> polyphase synthesis -> h_n[.] -> polyphase analysis -> MF combine -> Re{} -> QAM
//! ```
//!
//! The total bandwidth equals the sample rate, so subcarrier `k` sits at the
//! normalized frequency `k / L` and the spacing is `total_bandwidth / L`.

mod channel;
mod combine;
mod filterbank;
mod prototype;
mod sir;
mod sweep;

pub use channel::{apply_channel, convolve, frequency_response, ChannelModel, ChannelRealization, PowerDelayProfile};
pub use combine::{mf_combine, MfAccumulator};
pub use filterbank::{destagger, stagger, FbmcConfig, FilterBank, DEFAULT_TOTAL_BANDWIDTH_HZ};
pub use prototype::design_prototype;
pub use sir::{measure_sir, SirMeasurement};
pub use sweep::{loopback_sir, qpsk_frame, run_sir_sweep, trial_sir_curve, SweepCell, SweepConfig};

/// Complex baseband sample type.
pub type Cplx = num_complex::Complex64;
