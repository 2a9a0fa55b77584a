//! SIR of FBMC/OQAM over a frequency-selective channel as receive antennas
//! are added.

use fivegsim::fbmc_mimo::{loopback_sir, run_sir_sweep, FbmcConfig, SweepConfig};

fn main() -> fivegsim::Result<()> {
    for l in [32, 512] {
        let floor = loopback_sir(FbmcConfig::new(l, 4, 16), 0, 2)?;
        println!("L = {l}: loopback {:.1} dB", floor.aggregate_sir_db);
    }
    let cfg = SweepConfig { subcarriers: vec![32, 128, 512], trials: 30, ..SweepConfig::default() };
    for cell in run_sir_sweep(&cfg, 0)? {
        println!(
            "L = {:<4} ({:>6.2} kHz)  N = {:<4} SIR = {:.2} dB",
            cell.subcarriers, cell.spacing_khz, cell.antennas, cell.mean_sir_db
        );
    }
    Ok(())
}
