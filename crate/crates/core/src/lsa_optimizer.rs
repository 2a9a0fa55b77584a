//! Cost efficiency of a virtual operator that rents `M` distributed antennas
//! from a cloud RAN pool and `W` MHz of shared (LSA) spectrum.
//!
//! The efficiency is the number of bits delivered per cost unit:
//!
//! ```text
//!            W_Hz * sum_k log2(1 + r_k(M) / (N0 * W_Hz))
//! eta(M,W) = --------------------------------------------
//!                 c_m * M + c_w * W_MHz + c_o
//! ```
//!
//! `W` is carried in MHz for the cost term (`c_w` is priced per MHz per second)
//! and converted to Hz with [`HZ_PER_MHZ`] inside the Shannon term.
//!
//! The operator rents a single antenna subset shared by every user: the `M`
//! antennas with the largest summed path gain over all users (ties broken by
//! antenna index). User `k` then receives the coherent sum of the selected
//! antennas' path gains, so `r_k(M)` grows strictly with `M`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, config, Result};

/// Conversion factor between the cost-side MHz and the rate-side Hz.
pub const HZ_PER_MHZ: f64 = 1.0e6;

/// Default clamp on the (dimensionless) antenna–user distance.
pub const DEFAULT_MIN_DISTANCE: f64 = 1.0e-3;

/// Per-second resource prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Cost units per second per active antenna.
    pub c_m: f64,
    /// Cost units per second per MHz of LSA spectrum.
    pub c_w: f64,
    /// Operative (infrastructure) cost units per second.
    pub c_o: f64,
}

impl CostModel {
    pub fn new(c_m: f64, c_w: f64, c_o: f64) -> Result<Self> {
        let costs = Self { c_m, c_w, c_o };
        costs.validate()?;
        Ok(costs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_m", self.c_m), ("c_w", self.c_w), ("c_o", self.c_o)] {
            if !(v.is_finite() && v >= 0.0) {
                return config(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.c_m == 0.0 && self.c_w == 0.0 && self.c_o == 0.0 {
            return config("at least one of c_m, c_w, c_o must be positive");
        }
        Ok(())
    }

    /// Total cost per second of using `m` antennas and `w_mhz` MHz.
    pub fn cost(&self, m: usize, w_mhz: f64) -> f64 {
        self.c_m * m as f64 + self.c_w * w_mhz + self.c_o
    }

    /// The same prices multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { c_m: self.c_m * factor, c_w: self.c_w * factor, c_o: self.c_o * factor }
    }
}

/// Radio parameters shared by all antennas of a [`Deployment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioParams {
    /// Transmit power of each antenna, watts.
    pub per_antenna_power: f64,
    /// Path loss exponent of the unit-square geometry (>= 2).
    pub pathloss_exponent: f64,
    /// Noise power spectral density N0, W/Hz.
    pub noise_psd: f64,
    /// Clamp on the antenna–user distance.
    pub min_distance: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            per_antenna_power: 1.0e-13,
            pathloss_exponent: 4.0,
            // -174 dBm/Hz
            noise_psd: 3.981_071_705_534_972e-21,
            min_distance: DEFAULT_MIN_DISTANCE,
        }
    }
}

/// Antenna and user geometry in the unit square plus the radio parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    antenna_positions: Vec<[f64; 2]>,
    user_positions: Vec<[f64; 2]>,
    radio: RadioParams,
    /// Antenna indices in shared-selection order (best first).
    selection: Vec<usize>,
}

impl Deployment {
    pub fn new(
        antenna_positions: Vec<[f64; 2]>,
        user_positions: Vec<[f64; 2]>,
        radio: RadioParams,
    ) -> Result<Self> {
        if antenna_positions.is_empty() {
            return arg("deployment needs at least one antenna");
        }
        if user_positions.is_empty() {
            return arg("deployment needs at least one user");
        }
        if !(radio.per_antenna_power > 0.0 && radio.per_antenna_power.is_finite()) {
            return arg("per_antenna_power must be > 0");
        }
        if !(radio.noise_psd > 0.0 && radio.noise_psd.is_finite()) {
            return arg("noise_psd must be > 0");
        }
        if !(radio.min_distance > 0.0) {
            return arg("min_distance must be > 0");
        }
        if !(radio.pathloss_exponent >= 2.0 && radio.pathloss_exponent.is_finite()) {
            return arg("pathloss_exponent must be >= 2");
        }
        let mut dep = Self { antenna_positions, user_positions, radio, selection: Vec::new() };
        dep.selection = dep.shared_selection_order();
        Ok(dep)
    }

    /// Antennas and users dropped uniformly in the unit square.
    pub fn random_unit_square<R: rand::Rng + ?Sized>(
        n_antennas: usize,
        n_users: usize,
        radio: RadioParams,
        rng: &mut R,
    ) -> Result<Self> {
        let point = |rng: &mut R| [rng.random::<f64>(), rng.random::<f64>()];
        let antennas = (0..n_antennas).map(|_| point(rng)).collect();
        let users = (0..n_users).map(|_| point(rng)).collect();
        Self::new(antennas, users, radio)
    }

    pub fn antenna_count(&self) -> usize {
        self.antenna_positions.len()
    }

    pub fn user_count(&self) -> usize {
        self.user_positions.len()
    }

    pub fn radio(&self) -> &RadioParams {
        &self.radio
    }

    pub fn antenna_positions(&self) -> &[[f64; 2]] {
        &self.antenna_positions
    }

    pub fn user_positions(&self) -> &[[f64; 2]] {
        &self.user_positions
    }

    /// Path gain `max(dist, min_distance)^-beta'` from antenna `a` to user `k`.
    pub fn path_gain(&self, antenna: usize, user: usize) -> f64 {
        let [ax, ay] = self.antenna_positions[antenna];
        let [ux, uy] = self.user_positions[user];
        let d = (ax - ux).hypot(ay - uy).max(self.radio.min_distance);
        d.powf(-self.radio.pathloss_exponent)
    }

    /// Antennas in the order they are rented: decreasing summed gain over all
    /// users, ties by index.
    pub fn selection_order(&self) -> &[usize] {
        &self.selection
    }

    fn shared_selection_order(&self) -> Vec<usize> {
        let score: Vec<f64> = (0..self.antenna_count())
            .map(|a| (0..self.user_count()).map(|k| self.path_gain(a, k)).sum())
            .collect();
        let mut order: Vec<usize> = (0..self.antenna_count()).collect();
        order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
        order
    }

    /// Power received by `user` when the first `m` antennas of the selection
    /// order transmit.
    pub fn received_power(&self, user: usize, m: usize) -> Result<f64> {
        if user >= self.user_count() {
            return arg(format!("user index {user} out of range (K = {})", self.user_count()));
        }
        self.check_m(m)?;
        let sum: f64 = self.selection[..m].iter().map(|&a| self.path_gain(a, user)).sum();
        Ok(self.radio.per_antenna_power * sum)
    }

    /// `r_k(m)` for every user.
    pub fn received_powers(&self, m: usize) -> Result<Vec<f64>> {
        (0..self.user_count()).map(|k| self.received_power(k, m)).collect()
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.antenna_count() {
            return arg(format!("M = {m} outside 1..={}", self.antenna_count()));
        }
        Ok(())
    }
}

/// Search space of the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceBounds {
    pub m_max: usize,
    pub w_min_mhz: f64,
    pub w_max_mhz: f64,
    /// Points on the uniform bandwidth grid. A single point means `{W_max}`.
    pub w_grid_points: usize,
}

impl ResourceBounds {
    pub fn new(m_max: usize, w_min_mhz: f64, w_max_mhz: f64, w_grid_points: usize) -> Self {
        Self { m_max, w_min_mhz, w_max_mhz, w_grid_points }
    }

    pub fn validate(&self, deployment: &Deployment) -> Result<()> {
        if self.m_max == 0 {
            return arg("M_max must be >= 1");
        }
        if self.m_max > deployment.antenna_count() {
            return arg(format!(
                "M_max = {} exceeds the {} available antennas",
                self.m_max,
                deployment.antenna_count()
            ));
        }
        if !(self.w_min_mhz > 0.0 && self.w_min_mhz < self.w_max_mhz && self.w_max_mhz.is_finite()) {
            return arg(format!(
                "bandwidth bounds must satisfy 0 < W_min < W_max, got [{}, {}]",
                self.w_min_mhz, self.w_max_mhz
            ));
        }
        if self.w_grid_points == 0 {
            return arg("W_grid_points must be >= 1");
        }
        Ok(())
    }

    /// The bandwidth grid in MHz, ascending.
    pub fn w_grid(&self) -> Vec<f64> {
        let n = self.w_grid_points;
        if n == 1 {
            return vec![self.w_max_mhz];
        }
        let step = (self.w_max_mhz - self.w_min_mhz) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.w_max_mhz } else { self.w_min_mhz + step * i as f64 })
            .collect()
    }
}

/// One evaluated `(M, W)` operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    pub m: usize,
    pub w_mhz: f64,
    /// Sum rate, bits/s.
    pub rate: f64,
    /// Cost units per second.
    pub cost: f64,
    /// Bits per cost unit, `rate / cost`.
    pub eta: f64,
}

fn evaluate(received: &[f64], noise_psd: f64, m: usize, w_mhz: f64, costs: &CostModel) -> Result<EfficiencyPoint> {
    if !(w_mhz > 0.0 && w_mhz.is_finite()) {
        return arg(format!("bandwidth must be > 0 MHz, got {w_mhz}"));
    }
    let cost = costs.cost(m, w_mhz);
    if !(cost > 0.0) {
        return config(format!("total cost is {cost}; the efficiency denominator must be positive"));
    }
    let w_hz = w_mhz * HZ_PER_MHZ;
    let noise = noise_psd * w_hz;
    let rate = w_hz * received.iter().map(|r| (r / noise).ln_1p()).sum::<f64>() / std::f64::consts::LN_2;
    Ok(EfficiencyPoint { m, w_mhz, rate, cost, eta: rate / cost })
}

/// Evaluate the cost efficiency at `(m, w_mhz)`.
pub fn cost_efficiency(deployment: &Deployment, m: usize, w_mhz: f64, costs: &CostModel) -> Result<EfficiencyPoint> {
    let received = deployment.received_powers(m)?;
    evaluate(&received, deployment.radio.noise_psd, m, w_mhz, costs)
}

/// Received powers for every M in `1..=m_max`, index `m - 1`.
fn received_table(deployment: &Deployment, m_max: usize) -> Result<Vec<Vec<f64>>> {
    (1..=m_max).map(|m| deployment.received_powers(m)).collect()
}

/// First maximum in iteration order wins, so callers iterating M then W
/// ascending get the smallest-M, smallest-W tie-break.
fn argmax(points: impl IntoIterator<Item = EfficiencyPoint>) -> Option<EfficiencyPoint> {
    points.into_iter().fold(None, |best, p| match best {
        Some(b) if p.eta <= b.eta => Some(b),
        _ => Some(p),
    })
}

/// Evaluate the full `(M, W)` grid, row-major in M.
pub fn evaluate_grid(deployment: &Deployment, costs: &CostModel, bounds: &ResourceBounds) -> Result<Vec<EfficiencyPoint>> {
    costs.validate()?;
    bounds.validate(deployment)?;
    let table = received_table(deployment, bounds.m_max)?;
    let grid = bounds.w_grid();
    let noise_psd = deployment.radio.noise_psd;
    let rows: Vec<Result<Vec<EfficiencyPoint>>> = (1..=bounds.m_max)
        .into_par_iter()
        .map(|m| grid.iter().map(|&w| evaluate(&table[m - 1], noise_psd, m, w, costs)).collect())
        .collect();
    let mut out = Vec::with_capacity(bounds.m_max * grid.len());
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

/// Exhaustive search for the `(M, W)` that maximizes bits per cost unit.
pub fn optimize(deployment: &Deployment, costs: &CostModel, bounds: &ResourceBounds) -> Result<EfficiencyPoint> {
    let points = evaluate_grid(deployment, costs, bounds)?;
    Ok(argmax(points).expect("grid is non-empty"))
}

/// The optimum next to the two single-resource strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyComparison {
    pub optimal: EfficiencyPoint,
    /// `M = M_max`, best W on the grid.
    pub max_antennas: EfficiencyPoint,
    /// `W = W_max`, best M.
    pub max_bandwidth: EfficiencyPoint,
}

impl StrategyComparison {
    /// `eta_optimal / min(eta_max_antennas, eta_max_bandwidth)`.
    pub fn gain_over_worse_strategy(&self) -> f64 {
        self.optimal.eta / self.max_antennas.eta.min(self.max_bandwidth.eta)
    }
}

pub fn compare_strategies(
    deployment: &Deployment,
    costs: &CostModel,
    bounds: &ResourceBounds,
) -> Result<StrategyComparison> {
    let points = evaluate_grid(deployment, costs, bounds)?;
    let optimal = argmax(points.iter().copied()).expect("grid is non-empty");
    let max_antennas = argmax(points.iter().copied().filter(|p| p.m == bounds.m_max)).expect("row M_max exists");
    // the last grid point is W_max exactly
    let max_bandwidth =
        argmax(points.iter().copied().filter(|p| p.w_mhz == bounds.w_max_mhz)).expect("column W_max exists");
    Ok(StrategyComparison { optimal, max_antennas, max_bandwidth })
}

/// One row of a bandwidth-price sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub c_w: f64,
    pub comparison: StrategyComparison,
}

/// Compare strategies for every spectrum price in `c_w_values`, other prices fixed.
pub fn sweep_spectrum_price(
    deployment: &Deployment,
    c_m: f64,
    c_o: f64,
    c_w_values: &[f64],
    bounds: &ResourceBounds,
) -> Result<Vec<SweepRow>> {
    c_w_values
        .iter()
        .map(|&c_w| {
            let costs = CostModel::new(c_m, c_w, c_o)?;
            Ok(SweepRow { c_w, comparison: compare_strategies(deployment, &costs, bounds)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_stream;

    fn radio() -> RadioParams {
        RadioParams { per_antenna_power: 1.0, pathloss_exponent: 4.0, noise_psd: 1.0e-6, min_distance: 1.0e-3 }
    }

    #[test]
    fn unit_distance_identity() {
        let dep = Deployment::new(vec![[0.0, 0.0]], vec![[1.0, 0.0]], radio()).unwrap();
        assert_eq!(dep.received_power(0, 1).unwrap(), 1.0);
    }

    #[test]
    fn equal_gain_sum() {
        let dep = Deployment::new(vec![[0.0, 0.0], [2.0, 0.0]], vec![[1.0, 0.0]], radio()).unwrap();
        assert_eq!(dep.received_power(0, 2).unwrap(), 2.0);
    }

    #[test]
    fn received_power_rejects_bad_indices() {
        let dep = Deployment::new(vec![[0.0, 0.0]], vec![[1.0, 0.0]], radio()).unwrap();
        assert!(dep.received_power(1, 1).is_err());
        assert!(dep.received_power(0, 0).is_err());
        assert!(dep.received_power(0, 2).is_err());
    }

    #[test]
    fn coincident_antenna_is_clamped() {
        let dep = Deployment::new(vec![[0.5, 0.5]], vec![[0.5, 0.5]], radio()).unwrap();
        let r = dep.received_power(0, 1).unwrap();
        assert!((r - 1.0e12).abs() / 1.0e12 < 1e-12);
    }

    #[test]
    fn zero_rate_gives_zero_eta() {
        let received = [0.0, 0.0];
        let p = evaluate(&received, 1e-9, 1, 10.0, &CostModel::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.rate, 0.0);
        assert_eq!(p.eta, 0.0);
    }

    #[test]
    fn one_bit_per_hz_case() {
        // r / (N0 W_Hz) = 1 at W = 1 MHz
        let n0 = 1.0e-12;
        let r = n0 * HZ_PER_MHZ;
        let p = evaluate(&[r], n0, 1, 1.0, &CostModel::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert!((p.rate - 1.0e6).abs() < 1e-6);
        assert!((p.eta - 1.0e6).abs() < 1e-6);
    }

    #[test]
    fn bad_bandwidth_and_zero_cost() {
        let dep = Deployment::new(vec![[0.0, 0.0]], vec![[1.0, 0.0]], radio()).unwrap();
        let costs = CostModel::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(cost_efficiency(&dep, 1, 0.0, &costs), Err(crate::Error::InvalidArgument(_))));
        assert!(matches!(cost_efficiency(&dep, 1, -2.0, &costs), Err(crate::Error::InvalidArgument(_))));
        let zero = CostModel { c_m: 0.0, c_w: 0.0, c_o: 0.0 };
        assert!(matches!(cost_efficiency(&dep, 1, 1.0, &zero), Err(crate::Error::Configuration(_))));
        assert!(CostModel::new(0.0, 0.0, 0.0).is_err());
        assert!(CostModel::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn degenerate_search_space() {
        let mut rng = seeded_stream(3, "lsa-test", 0);
        let dep = Deployment::random_unit_square(4, 2, RadioParams::default(), &mut rng).unwrap();
        let bounds = ResourceBounds::new(1, 1.0, 20.0, 1);
        let cmp = compare_strategies(&dep, &CostModel::new(1.0, 1.0, 1.0).unwrap(), &bounds).unwrap();
        assert_eq!(cmp.optimal, cmp.max_antennas);
        assert_eq!(cmp.optimal, cmp.max_bandwidth);
        assert_eq!(cmp.optimal.w_mhz, 20.0);
    }

    #[test]
    fn grid_endpoints_exact() {
        let b = ResourceBounds::new(1, 0.1, 50.0, 1000);
        let g = b.w_grid();
        assert_eq!(g.len(), 1000);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[999], 50.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bounds_validation() {
        let dep = Deployment::new(vec![[0.0, 0.0]; 3], vec![[1.0, 0.0]], radio()).unwrap();
        assert!(ResourceBounds::new(4, 1.0, 2.0, 10).validate(&dep).is_err());
        assert!(ResourceBounds::new(0, 1.0, 2.0, 10).validate(&dep).is_err());
        assert!(ResourceBounds::new(2, 0.0, 2.0, 10).validate(&dep).is_err());
        assert!(ResourceBounds::new(2, 3.0, 2.0, 10).validate(&dep).is_err());
        assert!(ResourceBounds::new(2, 1.0, 2.0, 10).validate(&dep).is_ok());
    }

    #[test]
    fn shared_selection_prefers_total_gain() {
        // antenna 1 sits between both users
        let dep = Deployment::new(
            vec![[0.0, 0.0], [0.5, 0.0], [5.0, 5.0]],
            vec![[0.4, 0.0], [0.6, 0.0]],
            radio(),
        )
        .unwrap();
        assert_eq!(dep.selection_order()[2], 2);
        assert_eq!(dep.selection_order()[0], 1);
    }
}
