//! Frame-level XG-PON upstream simulator with two dynamic bandwidth
//! assignment policies.
//!
//! - [`giant_allocate`]: every service interval each ONU gets an assured
//!   allowance of `min(backlog, assured bytes per interval)`; each frame
//!   serves the remaining allowances first and hands leftover capacity out
//!   round-robin as best effort.
//! - [`ggiant_allocate`]: as above, but the part of a group's assured pool
//!   that its members leave unused is handed round-robin to backlogged members
//!   of the same group before anything becomes best effort.
//!
//! Grants are computed at the start of frame `f` from the backlog known at
//! that instant (ideal reporting) and the granted bytes leave the ONU by the
//! end of the frame, at `(f + 1) * frame_period`.

mod dba;
mod experiment;
mod sim;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

pub use dba::{ggiant_allocate, giant_allocate, Algorithm, DbaPointers, Grant, OnuState, Packet};
pub use experiment::{hot_onu_experiment, HotOnuRow, HotOnuScenario};
pub use sim::{run_sim, run_sim_traced, DelayStats, OnuTraffic, SimOutput, Source, TrafficSpec};

/// XG-PON upstream line rate, bits/s.
pub const XGPON_UPSTREAM_BPS: f64 = 2.488_32e9;

/// Upstream frame structure and run length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PonConfig {
    pub upstream_capacity_bps: f64,
    pub frame_period_s: f64,
    /// Frames per assured-allocation cycle.
    pub service_interval_frames: u64,
    /// Bytes consumed by each non-empty grant (burst header, guard time).
    pub per_grant_overhead_bytes: u64,
    /// Fixed per-frame framing overhead, bytes.
    pub frame_overhead_bytes: u64,
    /// Length of the arrival process, seconds.
    pub sim_duration_s: f64,
    /// Leading fraction of the run excluded from statistics.
    pub warmup_fraction: f64,
    /// Extra frames, as a fraction of the run, allowed for queues to drain
    /// after arrivals stop.
    pub drain_fraction: f64,
}

impl Default for PonConfig {
    fn default() -> Self {
        Self {
            upstream_capacity_bps: XGPON_UPSTREAM_BPS,
            frame_period_s: 125e-6,
            service_interval_frames: 4,
            per_grant_overhead_bytes: 16,
            frame_overhead_bytes: 0,
            sim_duration_s: 4.0,
            warmup_fraction: 0.1,
            drain_fraction: 0.1,
        }
    }
}

impl PonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.upstream_capacity_bps > 0.0 && self.frame_period_s > 0.0) {
            return arg("capacity and frame period must be positive");
        }
        if self.service_interval_frames == 0 {
            return arg("service interval must be >= 1 frame");
        }
        if (self.upstream_capacity_bps * self.frame_period_s / 8.0).floor() < self.frame_overhead_bytes as f64 {
            return arg("framing overhead exceeds the frame");
        }
        if !(self.sim_duration_s >= 0.0) {
            return arg("simulation duration must be >= 0");
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) || !(self.drain_fraction >= 0.0) {
            return arg("warm-up fraction must be in [0, 1) and drain fraction >= 0");
        }
        Ok(())
    }

    /// Payload bytes per frame: `floor(capacity * T / 8) - framing overhead`.
    pub fn frame_capacity_bytes(&self) -> u64 {
        (self.upstream_capacity_bps * self.frame_period_s / 8.0).floor() as u64 - self.frame_overhead_bytes
    }

    /// Bytes an ONU with `rate_bps` is assured per service interval.
    pub fn assured_bytes_per_si(&self, rate_bps: f64) -> u64 {
        (rate_bps * self.frame_period_s * self.service_interval_frames as f64 / 8.0).floor() as u64
    }

    /// Number of frames carrying arrivals.
    pub fn frames(&self) -> u64 {
        (self.sim_duration_s / self.frame_period_s).round() as u64
    }
}
