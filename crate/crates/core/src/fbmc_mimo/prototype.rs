use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{arg, Result};

/// Frequency-sampling coefficients `H_1..H_{kappa-1}` (with `H_0 = 1`).
fn frequency_samples(kappa: usize) -> Option<&'static [f64]> {
    match kappa {
        3 => Some(&[1.0, 0.911_438, 0.411_438]),
        4 => Some(&[1.0, 0.971_960, FRAC_1_SQRT_2, 0.235_147]),
        _ => None,
    }
}

/// Frequency-sampling prototype filter of length `kappa * l`.
///
/// Tap `n` is `H_0 + 2 * sum_{k>=1} H_k cos(2 pi k t / (kappa l))` with
/// `t = n - (kappa l - 1) / 2`, i.e. the pulse is centered between the two
/// middle taps and exactly symmetric. Taps are scaled to unit energy.
pub fn design_prototype(l: usize, kappa: usize) -> Result<Vec<f64>> {
    if l < 2 || !l.is_power_of_two() {
        return arg(format!("number of subcarriers must be a power of two >= 2, got {l}"));
    }
    let Some(coeffs) = frequency_samples(kappa) else {
        return arg(format!("overlapping factor {kappa} not supported (use 3 or 4)"));
    };
    let len = kappa * l;
    let center = (len as f64 - 1.0) / 2.0;
    let mut taps = vec![0.0; len];
    for n in 0..len / 2 {
        let t = n as f64 - center;
        let v = coeffs[0]
            + 2.0
                * coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, &h)| h * (2.0 * PI * k as f64 * t / len as f64).cos())
                    .sum::<f64>();
        taps[n] = v;
        taps[len - 1 - n] = v;
    }
    let norm = taps.iter().map(|x| x * x).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|x| *x /= norm);
    Ok(taps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_unit_energy() {
        for kappa in [3, 4] {
            for l in [16, 32, 512] {
                let g = design_prototype(l, kappa).unwrap();
                assert_eq!(g.len(), kappa * l);
                for i in 0..g.len() {
                    assert_eq!(g[i], g[g.len() - 1 - i]);
                }
                let e: f64 = g.iter().map(|x| x * x).sum();
                assert!((e - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(design_prototype(32, 5).is_err());
        assert!(design_prototype(32, 2).is_err());
        assert!(design_prototype(24, 4).is_err());
        assert!(design_prototype(1, 4).is_err());
    }

    #[test]
    fn nyquist_pairs_of_frequency_samples() {
        // H_k^2 + H_{kappa-k}^2 = 1
        let h = frequency_samples(4).unwrap();
        assert!((h[1] * h[1] + h[3] * h[3] - 1.0).abs() < 1e-5);
        assert!((2.0 * h[2] * h[2] - 1.0).abs() < 1e-12);
        let h = frequency_samples(3).unwrap();
        assert!((h[1] * h[1] + h[2] * h[2] - 1.0).abs() < 1e-5);
    }
}
