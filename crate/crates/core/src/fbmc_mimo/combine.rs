use ndarray::Array2;

use super::Cplx;
use crate::error::{arg, Result};

/// Running matched-filter combiner, one antenna branch at a time.
///
/// Keeps `sum_n conj(H_n) y_n` and `sum_n |H_n|^2` per subcarrier so the
/// combined output for every prefix of antennas is available without
/// recomputing earlier branches.
#[derive(Debug, Clone)]
pub struct MfAccumulator {
    numerator: Array2<Cplx>,
    gain_energy: Vec<f64>,
    branches: usize,
}

impl MfAccumulator {
    pub fn new(subcarriers: usize, columns: usize) -> Self {
        Self { numerator: Array2::zeros((subcarriers, columns)), gain_energy: vec![0.0; subcarriers], branches: 0 }
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn add_branch(&mut self, demod: &Array2<Cplx>, gains: &[Cplx]) -> Result<()> {
        if demod.dim() != self.numerator.dim() {
            return arg(format!("branch is {:?}, expected {:?}", demod.dim(), self.numerator.dim()));
        }
        if gains.len() != self.gain_energy.len() {
            return arg(format!("{} subcarrier gains for {} subcarriers", gains.len(), self.gain_energy.len()));
        }
        for (k, (mut row, &h)) in self.numerator.rows_mut().into_iter().zip(gains).enumerate() {
            let w = h.conj();
            for (acc, &y) in row.iter_mut().zip(demod.row(k)) {
                *acc += w * y;
            }
            self.gain_energy[k] += h.norm_sqr();
        }
        self.branches += 1;
        Ok(())
    }

    /// Combined output normalized by the accumulated gain energy; subcarriers
    /// with zero energy yield zeros.
    pub fn combined(&self) -> Array2<Cplx> {
        let mut out = self.numerator.clone();
        for (mut row, &e) in out.rows_mut().into_iter().zip(&self.gain_energy) {
            let scale = if e > 0.0 { 1.0 / e } else { 0.0 };
            row.mapv_inplace(|x| x * scale);
        }
        out
    }
}

/// Matched-filter combining:
/// `out[l, t] = sum_n conj(H_n(l)) y_n[l, t] / sum_n |H_n(l)|^2`.
pub fn mf_combine(per_antenna: &[Array2<Cplx>], gains: &[Vec<Cplx>]) -> Result<Array2<Cplx>> {
    if per_antenna.is_empty() {
        return arg("no antenna branches to combine");
    }
    if per_antenna.len() != gains.len() {
        return arg(format!("{} demodulated branches but {} gain vectors", per_antenna.len(), gains.len()));
    }
    let (l, t) = per_antenna[0].dim();
    let mut acc = MfAccumulator::new(l, t);
    for (y, h) in per_antenna.iter().zip(gains) {
        acc.add_branch(y, h)?;
    }
    Ok(acc.combined())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> Array2<Cplx> {
        Array2::from_shape_fn((4, 3), |(k, t)| Cplx::new(k as f64 - 1.5, t as f64 * 0.5))
    }

    #[test]
    fn single_flat_branch_is_identity() {
        let x = frame();
        let g = Cplx::new(0.3, -1.2);
        let y = x.mapv(|v| v * g);
        let out = mf_combine(&[y], &[vec![g; 4]]).unwrap();
        for (a, b) in out.iter().zip(x.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let x = frame();
        assert!(mf_combine(&[x.clone(), x.clone()], &[vec![Cplx::new(1.0, 0.0); 4]]).is_err());
        assert!(mf_combine(std::slice::from_ref(&x), &[vec![Cplx::new(1.0, 0.0); 3]]).is_err());
        assert!(mf_combine(&[x, Array2::zeros((4, 2))], &vec![vec![Cplx::new(1.0, 0.0); 4]; 2]).is_err());
        assert!(mf_combine(&[], &[]).is_err());
    }

    #[test]
    fn zero_gain_subcarrier_outputs_zero() {
        let x = frame();
        let mut g = vec![Cplx::new(1.0, 0.0); 4];
        g[2] = Cplx::new(0.0, 0.0);
        let out = mf_combine(&[x], &[g]).unwrap();
        assert!(out.row(2).iter().all(|v| v.norm() == 0.0));
    }
}
