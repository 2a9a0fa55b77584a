use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dba::Algorithm;
use super::sim::{run_sim, OnuTraffic, Source, TrafficSpec};
use super::PonConfig;
use crate::error::{arg, Result};

/// Group-sharing study: one ONU's load is swept while the rest stay fixed.
///
/// The PON holds the hot ONU, `max(group_sizes) - 1` light ONUs and
/// `n_saturated` always-backlogged ONUs. For group size `N` the hot ONU and
/// the first `N - 1` light ONUs form one group; everything else is ungrouped,
/// so the offered traffic is identical across `N`. Loads are fractions of the
/// per-ONU assured rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HotOnuScenario {
    pub group_sizes: Vec<usize>,
    pub hot_load_points: Vec<f64>,
    /// Load of every light ONU.
    pub light_load: f64,
    pub n_saturated: usize,
    /// Fraction of the frame capacity assured across all ONUs.
    pub assured_share: f64,
    pub packet_bytes: u64,
    pub mean_batch: f64,
    pub algorithm: Algorithm,
    pub pon: PonConfig,
}

impl Default for HotOnuScenario {
    fn default() -> Self {
        Self {
            group_sizes: vec![1, 2, 4],
            hot_load_points: vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5],
            light_load: 0.1,
            n_saturated: 4,
            assured_share: 0.9,
            packet_bytes: 1250,
            mean_batch: 1.0,
            algorithm: Algorithm::GroupGiant,
            pon: PonConfig::default(),
        }
    }
}

impl HotOnuScenario {
    pub fn validate(&self) -> Result<()> {
        self.pon.validate()?;
        if self.group_sizes.is_empty() || self.group_sizes.contains(&0) {
            return arg("group sizes must be non-empty and >= 1");
        }
        if self.hot_load_points.is_empty() || self.hot_load_points.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return arg("hot load points must be non-empty, finite and >= 0");
        }
        if !(self.light_load >= 0.0 && self.light_load.is_finite()) {
            return arg("light load must be finite and >= 0");
        }
        if !(self.assured_share > 0.0 && self.assured_share <= 1.0) {
            return arg("assured share must be in (0, 1]");
        }
        if self.packet_bytes == 0 || !(self.mean_batch >= 1.0) {
            return arg("packet size must be > 0 and mean batch >= 1");
        }
        Ok(())
    }

    pub fn n_onus(&self) -> usize {
        1 + self.n_light() + self.n_saturated
    }

    fn n_light(&self) -> usize {
        self.group_sizes.iter().max().map_or(0, |&n| n - 1)
    }

    /// Assured rate of every ONU, bits/s.
    pub fn assured_rate_bps(&self) -> f64 {
        let payload_bps = self.pon.frame_capacity_bytes() as f64 * 8.0 / self.pon.frame_period_s;
        self.assured_share * payload_bps / self.n_onus() as f64
    }

    /// Traffic for one `(N, hot load)` point. ONU 0 is the hot ONU.
    pub fn traffic(&self, group_size: usize, hot_load: f64) -> TrafficSpec {
        let ab = self.assured_rate_bps();
        let src = |load: f64| Source::Poisson {
            rate_bps: load * ab,
            packet_bytes: self.packet_bytes,
            mean_batch: self.mean_batch,
        };
        let mut onus = vec![OnuTraffic { group_id: 1, assured_rate_bps: ab, source: src(hot_load) }];
        for i in 0..self.n_light() {
            let group_id = if i + 1 < group_size { 1 } else { 0 };
            onus.push(OnuTraffic { group_id, assured_rate_bps: ab, source: src(self.light_load) });
        }
        for _ in 0..self.n_saturated {
            onus.push(OnuTraffic { group_id: 0, assured_rate_bps: ab, source: Source::Saturated });
        }
        TrafficSpec { onus }
    }
}

/// Hot-ONU delay at one `(N, load)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HotOnuRow {
    pub group_size: usize,
    pub hot_load_fraction: f64,
    pub mean_delay_ms: f64,
    pub p95_delay_ms: f64,
    pub ci95_ms: f64,
    pub stable: bool,
}

/// Run every `(N, load)` point, rows ordered by `N` then load. Every point
/// uses the same seed, so arrival streams are shared across `N`.
pub fn hot_onu_experiment(scenario: &HotOnuScenario, seed: u64) -> Result<Vec<HotOnuRow>> {
    scenario.validate()?;
    let points: Vec<(usize, f64)> = scenario
        .group_sizes
        .iter()
        .flat_map(|&n| scenario.hot_load_points.iter().map(move |&l| (n, l)))
        .collect();
    points
        .par_iter()
        .map(|&(n, load)| {
            let out = run_sim(&scenario.traffic(n, load), scenario.algorithm, &scenario.pon, seed)?;
            let hot = &out.per_onu[0];
            Ok(HotOnuRow {
                group_size: n,
                hot_load_fraction: load,
                mean_delay_ms: hot.mean_delay_s * 1e3,
                p95_delay_ms: hot.p95_delay_s * 1e3,
                ci95_ms: hot.ci95_s * 1e3,
                stable: hot.stable,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_is_fixed_across_group_sizes() {
        let s = HotOnuScenario::default();
        assert_eq!(s.n_onus(), 8);
        let t1 = s.traffic(1, 1.0);
        let t4 = s.traffic(4, 1.0);
        assert_eq!(t1.onus.len(), t4.onus.len());
        assert_eq!(t1.onus.iter().filter(|o| o.group_id == 1).count(), 1);
        assert_eq!(t4.onus.iter().filter(|o| o.group_id == 1).count(), 4);
        for (a, b) in t1.onus.iter().zip(&t4.onus) {
            assert_eq!(a.source, b.source);
        }
    }

    #[test]
    fn validation() {
        let bad = HotOnuScenario { group_sizes: vec![0], ..Default::default() };
        assert!(hot_onu_experiment(&bad, 0).is_err());
        let bad = HotOnuScenario { hot_load_points: vec![-1.0], ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
