use ndarray::Array2;

use super::Cplx;
use crate::error::{arg, Result};

/// SIR of a received QAM frame against the transmitted reference.
#[derive(Debug, Clone, PartialEq)]
pub struct SirMeasurement {
    pub per_subcarrier_sir_db: Vec<f64>,
    /// `10 log10(sum signal / sum residual)` over all subcarriers.
    pub aggregate_sir_db: f64,
}

fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Compare `received` with `reference`, ignoring `edge_symbols` columns at
/// each end of the frame.
///
/// Per subcarrier the best complex scalar `a = <y, x> / <x, x>` is removed
/// first: signal power is `|a|^2 sum |x|^2`, residual is `sum |y - a x|^2`.
pub fn measure_sir(reference: &Array2<Cplx>, received: &Array2<Cplx>, edge_symbols: usize) -> Result<SirMeasurement> {
    if reference.dim() != received.dim() {
        return arg(format!("reference {:?} and received {:?} differ in shape", reference.dim(), received.dim()));
    }
    let (l, t) = reference.dim();
    if t <= 2 * edge_symbols {
        return arg(format!("{t} symbols leave nothing after excluding {edge_symbols} at each edge"));
    }
    let cols = edge_symbols..t - edge_symbols;
    let mut per_subcarrier = Vec::with_capacity(l);
    let (mut sig_total, mut res_total) = (0.0, 0.0);
    for k in 0..l {
        let x = reference.row(k);
        let y = received.row(k);
        let mut xy = Cplx::new(0.0, 0.0);
        let mut xx = 0.0;
        for c in cols.clone() {
            xy += y[c] * x[c].conj();
            xx += x[c].norm_sqr();
        }
        let a = if xx > 0.0 { xy / xx } else { Cplx::new(0.0, 0.0) };
        let residual: f64 = cols.clone().map(|c| (y[c] - a * x[c]).norm_sqr()).sum();
        let signal = a.norm_sqr() * xx;
        per_subcarrier.push(db(signal / residual));
        sig_total += signal;
        res_total += residual;
    }
    Ok(SirMeasurement { per_subcarrier_sir_db: per_subcarrier, aggregate_sir_db: db(sig_total / res_total) })
}
