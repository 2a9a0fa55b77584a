//! Optimal antenna count and bandwidth as the spectrum price changes.

use fivegsim::lsa_optimizer::{compare_strategies, CostModel, Deployment, RadioParams, ResourceBounds};
use fivegsim::rng::seeded_stream;

fn main() -> fivegsim::Result<()> {
    let dep = Deployment::random_unit_square(20, 4, RadioParams::default(), &mut seeded_stream(0, "lsa_deployment", 0))?;
    let bounds = ResourceBounds::new(20, 0.1, 50.0, 1000);
    println!("{:>8} {:>4} {:>8} {:>12} {:>12} {:>12}", "c_w", "M*", "W* MHz", "eta*", "eta(maxM)", "eta(maxW)");
    for k in -8..=8 {
        let c_w = 10f64.powf(k as f64 / 2.0);
        let c = compare_strategies(&dep, &CostModel::new(1.0, c_w, 0.01)?, &bounds)?;
        println!(
            "{c_w:>8.0e} {:>4} {:>8.2} {:>12.4e} {:>12.4e} {:>12.4e}",
            c.optimal.m, c.optimal.w_mhz, c.optimal.eta, c.max_antennas.eta, c.max_bandwidth.eta
        );
    }
    Ok(())
}
