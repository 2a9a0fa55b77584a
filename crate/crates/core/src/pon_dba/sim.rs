use rand_distr::{Distribution, Exp, Geometric};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dba::{ggiant_allocate, giant_allocate, Algorithm, DbaPointers, OnuState};
use super::PonConfig;
use crate::error::{arg, Result};
use crate::rng::{seeded_stream, Stream};
use crate::stats;

/// Number of batches used for the delay confidence interval.
const DELAY_BATCHES: usize = 20;

/// Offered traffic of one ONU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Idle,
    /// Always backlogged.
    Saturated,
    /// Poisson batch arrivals of fixed-size packets. Batch sizes are
    /// geometric on `{1, 2, ...}` with the given mean; 1 gives plain Poisson.
    Poisson { rate_bps: f64, packet_bytes: u64, mean_batch: f64 },
}

/// One ONU of a simulated PON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnuTraffic {
    pub group_id: u32,
    pub assured_rate_bps: f64,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub onus: Vec<OnuTraffic>,
}

/// Upstream delay of one ONU, over packets that arrived after warm-up.
///
/// Saturated and idle ONUs report `NaN` delays and zero samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayStats {
    pub onu_id: usize,
    pub mean_delay_s: f64,
    pub p95_delay_s: f64,
    /// Batch-means 95% half-width of the mean delay.
    pub ci95_s: f64,
    pub samples: usize,
    pub offered_bytes: u64,
    pub served_bytes: u64,
    /// Time-averaged backlog after warm-up.
    pub mean_backlog_bytes: f64,
    /// Backlog when arrivals stopped.
    pub final_backlog_bytes: u64,
    pub stable: bool,
}

impl DelayStats {
    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutput {
    pub per_onu: Vec<DelayStats>,
    /// Frames executed, including the drain phase.
    pub frames_run: u64,
    /// Largest `Σ grants + overheads` seen in any frame.
    pub peak_frame_bytes: u64,
    /// SHA-256 over every grant as little-endian `(frame, onu, bytes)`.
    pub grant_digest: [u8; 32],
}

struct Arrivals {
    rng: Stream,
    gap: Exp<f64>,
    batch: Option<Geometric>,
    packet_bytes: u64,
    next_s: f64,
}

impl Arrivals {
    fn new(source: &Source, seed: u64, index: u64) -> Result<Option<Self>> {
        let Source::Poisson { rate_bps, packet_bytes, mean_batch } = *source else {
            return Ok(None);
        };
        if !(rate_bps >= 0.0 && rate_bps.is_finite()) {
            return arg(format!("ONU {index}: arrival rate {rate_bps} must be finite and >= 0"));
        }
        if packet_bytes == 0 || !(mean_batch >= 1.0 && mean_batch.is_finite()) {
            return arg(format!("ONU {index}: packet size must be > 0 and mean batch >= 1"));
        }
        if rate_bps == 0.0 {
            return Ok(None);
        }
        let batch_rate = rate_bps / (8.0 * packet_bytes as f64 * mean_batch);
        let gap = Exp::new(batch_rate).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
        let batch = if mean_batch > 1.0 {
            Some(Geometric::new(1.0 / mean_batch).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?)
        } else {
            None
        };
        let mut rng = seeded_stream(seed, "pon_arrivals", index);
        let next_s = gap.sample(&mut rng);
        Ok(Some(Self { rng, gap, batch, packet_bytes, next_s }))
    }

    /// Enqueue every batch arriving before `until_s`; returns bytes offered at
    /// or after `count_from_s`.
    fn fill(&mut self, onu: &mut OnuState, until_s: f64, count_from_s: f64) -> u64 {
        let mut counted = 0;
        while self.next_s < until_s {
            let n = 1 + self.batch.as_ref().map_or(0, |b| b.sample(&mut self.rng));
            for _ in 0..n {
                onu.enqueue(self.packet_bytes, self.next_s);
            }
            if self.next_s >= count_from_s {
                counted += n * self.packet_bytes;
            }
            self.next_s += self.gap.sample(&mut self.rng);
        }
        counted
    }
}

#[derive(Default)]
struct Tally {
    delays: Vec<f64>,
    offered: u64,
    served: u64,
    backlog_sum: f64,
    backlog_frames: u64,
    final_backlog: u64,
}

/// Frame-by-frame simulation of the upstream.
///
/// Each frame: arrivals before its start are enqueued, the DBA grants bytes
/// from the current backlog and the granted bytes leave FIFO, completing at
/// the end of the frame. After `sim_duration_s` arrivals stop and the run
/// continues for up to `drain_fraction` of its length so queued packets can
/// leave.
///
/// An ONU is flagged unstable when its queue fails to drain in that window,
/// or when its backlog at the end of arrivals exceeds ten times its mean
/// (ignoring backlogs below one service interval of frames).
pub fn run_sim(traffic: &TrafficSpec, algorithm: Algorithm, config: &PonConfig, seed: u64) -> Result<SimOutput> {
    run_inner(traffic, algorithm, config, seed, None)
}

/// [`run_sim`] that also returns, per ONU, the arrival times of completed
/// packets in departure order.
pub fn run_sim_traced(
    traffic: &TrafficSpec,
    algorithm: Algorithm,
    config: &PonConfig,
    seed: u64,
) -> Result<(SimOutput, Vec<Vec<f64>>)> {
    let mut trace = vec![Vec::new(); traffic.onus.len()];
    let out = run_inner(traffic, algorithm, config, seed, Some(&mut trace))?;
    Ok((out, trace))
}

fn run_inner(
    traffic: &TrafficSpec,
    algorithm: Algorithm,
    config: &PonConfig,
    seed: u64,
    mut trace: Option<&mut Vec<Vec<f64>>>,
) -> Result<SimOutput> {
    config.validate()?;
    let mut onus = Vec::with_capacity(traffic.onus.len());
    let mut sources = Vec::with_capacity(traffic.onus.len());
    for (i, t) in traffic.onus.iter().enumerate() {
        if !(t.assured_rate_bps >= 0.0 && t.assured_rate_bps.is_finite()) {
            return arg(format!("ONU {i}: assured rate must be finite and >= 0"));
        }
        onus.push(match t.source {
            Source::Saturated => OnuState::saturated(i, t.group_id, t.assured_rate_bps),
            _ => OnuState::new(i, t.group_id, t.assured_rate_bps),
        });
        sources.push(Arrivals::new(&t.source, seed, i as u64)?);
    }

    let period = config.frame_period_s;
    let frames = config.frames();
    let drain_frames = (config.drain_fraction * frames as f64).ceil() as u64;
    let end_s = frames as f64 * period;
    let warm_s = config.warmup_fraction * end_s;
    let warm_frame = (config.warmup_fraction * frames as f64).ceil() as u64;
    let capacity = config.frame_capacity_bytes();
    let overhead = config.per_grant_overhead_bytes;

    let mut tallies: Vec<Tally> = (0..onus.len()).map(|_| Tally::default()).collect();
    let mut pointers = DbaPointers::default();
    let mut peak = 0;
    let mut digest = Sha256::new();
    let mut f = 0;
    while f < frames + drain_frames {
        let now = f as f64 * period;
        for ((onu, src), tally) in onus.iter_mut().zip(&mut sources).zip(&mut tallies) {
            if let Some(src) = src {
                tally.offered += src.fill(onu, now.min(end_s), warm_s);
            }
        }
        if f == frames {
            for (onu, tally) in onus.iter().zip(&mut tallies) {
                tally.final_backlog = onu.backlog();
            }
        }
        if f >= frames && onus.iter().all(|o| o.saturated || o.backlog() == 0) {
            break;
        }
        if f >= warm_frame && f < frames {
            for (onu, tally) in onus.iter().zip(&mut tallies) {
                tally.backlog_sum += onu.backlog() as f64;
                tally.backlog_frames += 1;
            }
        }

        let grants = match algorithm {
            Algorithm::Giant => giant_allocate(&mut onus, &mut pointers, config, f),
            Algorithm::GroupGiant => ggiant_allocate(&mut onus, &mut pointers, config, f),
        };
        let used: u64 = grants.iter().map(|g| g.bytes + overhead).sum();
        assert!(used <= capacity, "frame {f}: {used} B granted, capacity {capacity} B");
        peak = peak.max(used);
        for g in &grants {
            digest.update(g.frame_index.to_le_bytes());
            digest.update((g.onu_id as u64).to_le_bytes());
            digest.update(g.bytes.to_le_bytes());
        }

        let done_s = (f + 1) as f64 * period;
        for g in grants {
            let tally = &mut tallies[g.onu_id];
            let mut log = trace.as_deref_mut().map(|t| &mut t[g.onu_id]);
            onus[g.onu_id].dequeue(g.bytes, |p| {
                if let Some(log) = log.as_deref_mut() {
                    log.push(p.arrival_s);
                }
                if p.arrival_s >= warm_s {
                    tally.delays.push(done_s - p.arrival_s);
                    tally.served += p.bytes;
                }
            });
        }
        f += 1;
    }
    let drained_at = f;

    let per_onu = onus
        .iter()
        .zip(tallies)
        .map(|(onu, t)| finish(onu, t, capacity * config.service_interval_frames))
        .collect();
    Ok(SimOutput { per_onu, frames_run: drained_at, peak_frame_bytes: peak, grant_digest: digest.finalize().into() })
}

fn finish(onu: &OnuState, t: Tally, backlog_floor: u64) -> DelayStats {
    let mean_backlog = if t.backlog_frames > 0 { t.backlog_sum / t.backlog_frames as f64 } else { 0.0 };
    let runaway = t.final_backlog > backlog_floor && t.final_backlog as f64 > 10.0 * mean_backlog;
    let stable = !onu.saturated && onu.backlog() == 0 && !runaway;
    let (mean, p95, ci95) = if t.delays.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let mut sorted = t.delays.clone();
        sorted.sort_by(f64::total_cmp);
        (stats::mean(&t.delays), stats::quantile_sorted(&sorted, 0.95), batch_means_ci95(&t.delays))
    };
    DelayStats {
        onu_id: onu.onu_id,
        mean_delay_s: mean,
        p95_delay_s: p95,
        ci95_s: ci95,
        samples: t.delays.len(),
        offered_bytes: t.offered,
        served_bytes: t.served,
        mean_backlog_bytes: mean_backlog,
        final_backlog_bytes: t.final_backlog,
        stable,
    }
}

/// Half-width from [`DELAY_BATCHES`] contiguous batch means; falls back to
/// the i.i.d. formula when there are too few samples to batch.
fn batch_means_ci95(delays: &[f64]) -> f64 {
    if delays.len() < 2 * DELAY_BATCHES {
        return stats::ci95_half_width(delays);
    }
    let size = delays.len() / DELAY_BATCHES;
    let means: Vec<f64> = delays.chunks_exact(size).take(DELAY_BATCHES).map(stats::mean).collect();
    stats::ci95_half_width(&means)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(rate_bps: f64, packet_bytes: u64) -> Source {
        Source::Poisson { rate_bps, packet_bytes, mean_batch: 1.0 }
    }

    fn cfg(duration: f64) -> PonConfig {
        PonConfig { sim_duration_s: duration, ..PonConfig::default() }
    }

    fn single(rate: f64, assured: f64) -> TrafficSpec {
        TrafficSpec { onus: vec![OnuTraffic { group_id: 0, assured_rate_bps: assured, source: poisson(rate, 1250) }] }
    }

    #[test]
    fn light_load_served_fully_and_quickly() {
        let c = cfg(0.5);
        let out = run_sim(&single(50e6, 100e6), Algorithm::Giant, &c, 1).unwrap();
        let s = &out.per_onu[0];
        assert!(s.samples > 1000);
        assert_eq!(s.served_bytes, s.offered_bytes);
        assert!(s.mean_delay_s < 10.0 * c.frame_period_s);
        assert!(s.mean_delay_s <= s.p95_delay_s);
        assert!(s.stable);
    }

    #[test]
    fn zero_rate_reports_empty() {
        let out = run_sim(&single(0.0, 100e6), Algorithm::Giant, &cfg(0.1), 1).unwrap();
        assert!(out.per_onu[0].is_empty());
        assert_eq!(out.per_onu[0].offered_bytes, 0);
        assert!(out.per_onu[0].mean_delay_s.is_nan());
    }

    #[test]
    fn overload_flags_instability() {
        let c = cfg(0.5);
        let out = run_sim(&single(1.5 * c.upstream_capacity_bps, 100e6), Algorithm::Giant, &c, 1).unwrap();
        assert!(!out.per_onu[0].stable);
        assert!(out.per_onu[0].served_bytes < out.per_onu[0].offered_bytes);
    }

    #[test]
    fn invalid_rates_rejected() {
        assert!(run_sim(&single(-1.0, 1e6), Algorithm::Giant, &cfg(0.1), 0).is_err());
        assert!(run_sim(&single(f64::NAN, 1e6), Algorithm::Giant, &cfg(0.1), 0).is_err());
        assert!(run_sim(&single(1e6, -1.0), Algorithm::Giant, &cfg(0.1), 0).is_err());
    }

    #[test]
    fn batch_means_falls_back() {
        assert_eq!(batch_means_ci95(&[1.0]), 0.0);
        let xs: Vec<f64> = (0..400).map(|i| (i % 20) as f64).collect();
        // every batch of 20 has the same mean
        assert_eq!(batch_means_ci95(&xs), 0.0);
    }
}
