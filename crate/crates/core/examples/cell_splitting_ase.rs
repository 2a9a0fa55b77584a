//! Area spectral efficiency and network power as cells shrink.

use fivegsim::cell_splitting::{ase, log_log_slope, AlphaProfile, ScalingScenario};
use fivegsim::rng::seeded_stream;

fn main() -> fivegsim::Result<()> {
    let mut points = Vec::new();
    for (i, d) in [1.0, 0.5, 0.25].into_iter().enumerate() {
        let mut rng = seeded_stream(0, "cell_splitting_alpha", i as u64);
        let s = ScalingScenario::with_profile(d, 4.0, 800.0, 1.0, 100.0, 3.98e-14, AlphaProfile::default(), &mut rng)?;
        let r = ase(&s, 2000, 20, 0)?;
        println!(
            "D = {d:<5} sites = {:<4} C_cell = {:.3} +- {:.3}  ASE = {:>7.3}  P_tot = {:.2} W",
            s.n_bs(),
            r.mean_cell_capacity,
            r.ci95,
            r.ase,
            r.total_power
        );
        points.push(r);
    }
    println!("log-log slope of ASE vs density: {:.4}", log_log_slope(&points));
    Ok(())
}
