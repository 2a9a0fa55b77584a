//! Delay of one heavily loaded ONU when it shares assured bandwidth with
//! lightly loaded group members.

use fivegsim::pon_dba::{hot_onu_experiment, HotOnuScenario};

fn main() -> fivegsim::Result<()> {
    let scenario = HotOnuScenario::default();
    println!("assured rate per ONU: {:.1} Mb/s", scenario.assured_rate_bps() / 1e6);
    for r in hot_onu_experiment(&scenario, 0)? {
        let flag = if r.stable { "" } else { "  (unstable)" };
        println!(
            "N = {}  load = {:>4.2} x AB  mean = {:>9.3} ms  p95 = {:>9.3} ms{flag}",
            r.group_size, r.hot_load_fraction, r.mean_delay_ms, r.p95_delay_ms
        );
    }
    Ok(())
}
