//! Area spectral efficiency and total transmit power under cell splitting.
//!
//! Base stations sit on a square grid of spacing `D * d0` inside an `L x L`
//! window. Each transmits `P_k = P0 * D^beta * alpha_k`, the minimum-power rule
//! that keeps the ASE gain linear in the BS density `d = D^-2`. Summed over the
//! `N = (L / (D d0))^2` sites this gives `P_tot = P0 * D^(beta-2) * mean(alpha) * (L/d0)^2`.
//!
//! The Monte Carlo part drops users uniformly, attaches each to its nearest BS
//! and evaluates the full-buffer downlink SINR with toroidal distances, so that
//! the window has no edge. With `P ∝ D^beta` every received power depends only
//! on distances measured in units of the grid spacing, which is what makes the
//! capacity per cell independent of `D`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, config, Result};
use crate::rng::seeded_stream;
use crate::stats;

/// Default reference inter-site distance at `D = 1`, meters.
pub const DEFAULT_D0_M: f64 = 100.0;
/// -104 dBm in watts.
pub const DEFAULT_NOISE_POWER_W: f64 = 3.981_071_705_534_972e-14;

const RNG_TAG: &str = "cell_splitting";

/// How the per-BS coefficients `alpha_k` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaProfile {
    Constant { value: f64 },
    /// i.i.d. uniform on `[low, high]`.
    Uniform { low: f64, high: f64 },
}

impl Default for AlphaProfile {
    fn default() -> Self {
        AlphaProfile::Constant { value: 1.0 }
    }
}

impl AlphaProfile {
    /// Random profile, i.i.d. uniform on `[0.5, 1.5]`.
    pub fn uniform_default() -> Self {
        AlphaProfile::Uniform { low: 0.5, high: 1.5 }
    }

    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        match *self {
            AlphaProfile::Constant { value } => {
                if !(value > 0.0 && value.is_finite()) {
                    return arg(format!("alpha must be > 0, got {value}"));
                }
                Ok(vec![value; n])
            }
            AlphaProfile::Uniform { low, high } => {
                if !(low > 0.0 && high >= low && high.is_finite()) {
                    return arg(format!("alpha range [{low}, {high}] must satisfy 0 < low <= high"));
                }
                Ok((0..n).map(|_| low + (high - low) * rng.random::<f64>()).collect())
            }
        }
    }
}

/// `P0 * D^beta * alpha_k`.
pub fn per_bs_power(p0: f64, scale: f64, beta: f64, alpha_k: f64) -> Result<f64> {
    if !(p0 > 0.0 && scale > 0.0 && alpha_k > 0.0) {
        return arg(format!("P0, D and alpha must be positive (got {p0}, {scale}, {alpha_k})"));
    }
    if !beta.is_finite() {
        return arg("path loss exponent must be finite");
    }
    Ok(p0 * scale.powf(beta) * alpha_k)
}

/// Number of grid sites along one side, `L / (D d0)`, when it is an integer.
pub fn sites_per_side(scale: f64, side_m: f64, d0_m: f64) -> Result<usize> {
    if !(scale > 0.0 && scale <= 1.0) {
        return arg(format!("scaling factor D must lie in (0, 1], got {scale}"));
    }
    if !(side_m > 0.0 && d0_m > 0.0) {
        return arg("network side and d0 must be positive");
    }
    let ratio = side_m / (scale * d0_m);
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
        return config(format!(
            "a grid of spacing {} m does not tile a {side_m} m window ({ratio} sites per side)",
            scale * d0_m
        ));
    }
    Ok(rounded as usize)
}

/// One network scale and its per-BS power coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingScenario {
    scale: f64,
    beta: f64,
    side_m: f64,
    p0: f64,
    d0_m: f64,
    noise_power: f64,
    alpha: Vec<f64>,
    sites_per_side: usize,
}

impl ScalingScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scale: f64,
        beta: f64,
        side_m: f64,
        p0: f64,
        d0_m: f64,
        noise_power: f64,
        alpha: Vec<f64>,
    ) -> Result<Self> {
        let n = sites_per_side(scale, side_m, d0_m)?;
        if !(p0 > 0.0 && p0.is_finite()) {
            return arg("P0 must be > 0");
        }
        if !beta.is_finite() {
            return arg("beta must be finite");
        }
        if !(noise_power >= 0.0) {
            return arg("noise power must be >= 0");
        }
        if alpha.len() != n * n {
            return config(format!("{} alpha coefficients for {} base stations", alpha.len(), n * n));
        }
        if alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return arg("every alpha_k must be > 0");
        }
        Ok(Self { scale, beta, side_m, p0, d0_m, noise_power, alpha, sites_per_side: n })
    }

    /// Build a scenario whose `alpha_k` are drawn from `profile`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_profile<R: Rng + ?Sized>(
        scale: f64,
        beta: f64,
        side_m: f64,
        p0: f64,
        d0_m: f64,
        noise_power: f64,
        profile: AlphaProfile,
        rng: &mut R,
    ) -> Result<Self> {
        let n = sites_per_side(scale, side_m, d0_m)?;
        let alpha = profile.draw(n * n, rng)?;
        Self::new(scale, beta, side_m, p0, d0_m, noise_power, alpha)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn side_m(&self) -> f64 {
        self.side_m
    }
    pub fn p0(&self) -> f64 {
        self.p0
    }
    pub fn d0_m(&self) -> f64 {
        self.d0_m
    }
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
    pub fn n_bs(&self) -> usize {
        self.sites_per_side * self.sites_per_side
    }
    pub fn spacing_m(&self) -> f64 {
        self.scale * self.d0_m
    }

    /// `D^-2`, base stations per `d0^2`.
    pub fn density(&self) -> f64 {
        self.scale.powi(-2)
    }

    pub fn mean_alpha(&self) -> f64 {
        stats::mean(&self.alpha)
    }

    /// Transmit power of base station `k` (row-major grid index).
    pub fn bs_power(&self, k: usize) -> f64 {
        self.p0 * self.scale.powf(self.beta) * self.alpha[k]
    }

    /// Position of base station `k`, cell-centered.
    pub fn bs_position(&self, k: usize) -> [f64; 2] {
        let s = self.spacing_m();
        let (row, col) = (k / self.sites_per_side, k % self.sites_per_side);
        [(col as f64 + 0.5) * s, (row as f64 + 0.5) * s]
    }

    fn torus_distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let wrap = |d: f64| {
            let d = d.abs() % self.side_m;
            d.min(self.side_m - d)
        };
        wrap(a[0] - b[0]).hypot(wrap(a[1] - b[1]))
    }

    /// Downlink SINR at `pos` from its nearest base station, all others interfering.
    pub fn user_sinr(&self, pos: [f64; 2]) -> f64 {
        let r_min = 1e-6 * self.spacing_m();
        let mut serving = (f64::INFINITY, 0.0);
        let mut total = 0.0;
        for k in 0..self.n_bs() {
            let r = self.torus_distance(pos, self.bs_position(k));
            let rx = self.bs_power(k) * r.max(r_min).powf(-self.beta);
            total += rx;
            if r < serving.0 {
                serving = (r, rx);
            }
        }
        let own = serving.1;
        own / (total - own + self.noise_power)
    }

    fn drop_user<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        [rng.random::<f64>() * self.side_m, rng.random::<f64>() * self.side_m]
    }

    /// SINRs of `n_users` uniformly dropped users for trial `trial`.
    pub fn sinr_samples(&self, n_users: usize, seed: u64, trial: u64) -> Vec<f64> {
        let mut rng = seeded_stream(seed, RNG_TAG, trial);
        (0..n_users).map(|_| self.user_sinr(self.drop_user(&mut rng))).collect()
    }
}

/// Closed-form network transmit power `P0 * D^(beta-2) * mean(alpha) * (L/d0)^2`.
pub fn total_tx_power(scenario: &ScalingScenario) -> f64 {
    let side = scenario.side_m / scenario.d0_m;
    scenario.p0 * scenario.scale.powf(scenario.beta - 2.0) * scenario.mean_alpha() * side * side
}

/// Monte Carlo estimate of the mean cell capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    /// bits/s/Hz.
    pub mean: f64,
    /// 95% half-width over per-trial means.
    pub ci95: f64,
    pub per_trial: Vec<f64>,
}

/// Mean user spectral efficiency `log2(1 + SINR)` over users and trials.
///
/// Trial `t` draws its users from `seeded_stream(seed, "cell_splitting", t)`,
/// so scenarios simulated with the same seed see the same user positions.
pub fn simulate_cell_capacity(
    scenario: &ScalingScenario,
    n_users: usize,
    n_trials: usize,
    seed: u64,
) -> Result<CapacityEstimate> {
    if n_users == 0 || n_trials == 0 {
        return arg("n_users and n_trials must be >= 1");
    }
    let per_trial: Vec<f64> = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let sinrs = scenario.sinr_samples(n_users, seed, t);
            sinrs.iter().map(|s| s.log2_1p()).sum::<f64>() / n_users as f64
        })
        .collect();
    Ok(CapacityEstimate { mean: stats::mean(&per_trial), ci95: stats::ci95_half_width(&per_trial), per_trial })
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

/// One point of the ASE / power curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AseResult {
    pub scale: f64,
    /// BS per `d0^2`.
    pub density: f64,
    /// bits/s/Hz.
    pub mean_cell_capacity: f64,
    /// bits/s/Hz per `d0^2`.
    pub ase: f64,
    /// watts.
    pub total_power: f64,
    pub ci95: f64,
}

/// `ASE = d * C_cell` together with the closed-form total power.
pub fn ase(scenario: &ScalingScenario, n_users: usize, n_trials: usize, seed: u64) -> Result<AseResult> {
    let cap = simulate_cell_capacity(scenario, n_users, n_trials, seed)?;
    let density = scenario.density();
    Ok(AseResult {
        scale: scenario.scale,
        density,
        mean_cell_capacity: cap.mean,
        ase: density * cap.mean,
        total_power: total_tx_power(scenario),
        ci95: cap.ci95,
    })
}

/// Least-squares slope of `log(ase)` against `log(density)`.
pub fn log_log_slope(points: &[AseResult]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.density.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ase.ln()).collect();
    let (mx, my) = (stats::mean(&xs), stats::mean(&ys));
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(scale: f64, beta: f64) -> ScalingScenario {
        let n = sites_per_side(scale, 400.0, 100.0).unwrap();
        ScalingScenario::new(scale, beta, 400.0, 1.0, 100.0, DEFAULT_NOISE_POWER_W, vec![1.0; n * n]).unwrap()
    }

    #[test]
    fn per_bs_power_cases() {
        assert_eq!(per_bs_power(1.0, 1.0, 3.7, 1.0).unwrap(), 1.0);
        assert_eq!(per_bs_power(2.0, 0.5, 4.0, 1.0).unwrap(), 0.125);
        assert!(per_bs_power(0.0, 0.5, 4.0, 1.0).is_err());
        assert!(per_bs_power(1.0, -0.5, 4.0, 1.0).is_err());
        assert!(per_bs_power(1.0, 0.5, 4.0, 0.0).is_err());
    }

    #[test]
    fn unit_total_power() {
        let s = ScalingScenario::new(1.0, 4.0, 100.0, 3.5, 100.0, 0.0, vec![1.0]).unwrap();
        assert_eq!(total_tx_power(&s), 3.5);
    }

    #[test]
    fn grid_must_tile_window() {
        assert!(matches!(sites_per_side(0.3, 400.0, 100.0), Err(crate::Error::Configuration(_))));
        assert_eq!(sites_per_side(0.25, 400.0, 100.0).unwrap(), 16);
        assert!(sites_per_side(1.5, 400.0, 100.0).is_err());
        let bad = ScalingScenario::new(1.0, 4.0, 400.0, 1.0, 100.0, 0.0, vec![1.0; 3]);
        assert!(matches!(bad, Err(crate::Error::Configuration(_))));
    }

    #[test]
    fn beta_two_total_power_is_scale_free() {
        let p1 = total_tx_power(&scenario(1.0, 2.0));
        let p2 = total_tx_power(&scenario(0.5, 2.0));
        let p4 = total_tx_power(&scenario(0.25, 2.0));
        assert_eq!(p1, p2);
        assert_eq!(p1, p4);
    }

    #[test]
    fn single_link_capacity() {
        // one BS at (50, 50) in a 100 m torus
        let s = ScalingScenario::new(1.0, 3.0, 100.0, 2.0, 100.0, 1e-9, vec![1.0]).unwrap();
        let r = 20.0;
        let sinr = s.user_sinr([50.0 + r, 50.0]);
        let expected = 2.0 * r.powf(-3.0) / 1e-9;
        assert!((sinr - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn huge_noise_kills_capacity() {
        let n = 4;
        let s = ScalingScenario::new(1.0, 4.0, 400.0, 1.0, 100.0, 1e30, vec![1.0; n * n]).unwrap();
        let cap = simulate_cell_capacity(&s, 50, 2, 1).unwrap();
        assert!(cap.mean < 1e-12);
    }

    #[test]
    fn simulate_rejects_empty_runs() {
        let s = scenario(1.0, 4.0);
        assert!(simulate_cell_capacity(&s, 0, 1, 0).is_err());
        assert!(simulate_cell_capacity(&s, 1, 0, 0).is_err());
    }

    #[test]
    fn torus_wraps() {
        let s = scenario(1.0, 4.0);
        assert!((s.torus_distance([1.0, 0.0], [399.0, 0.0]) - 2.0).abs() < 1e-12);
    }
}
