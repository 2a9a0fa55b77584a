//! Run the PON study through the harness twice and check the CSV bytes match.

use fivegsim::harness::{parse_config, run_experiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("fivegsim-reproducible-run");
    let text = r#"{ "experiment": "pon_fig10", "seed": 42, "pon": { "pon": { "sim_duration_s": 0.5 } } }"#;
    let mut cfg = parse_config(text)?;
    let mut digests = Vec::new();
    for workers in [1, 2] {
        cfg.out = dir.join(format!("workers-{workers}"));
        cfg.workers = Some(workers);
        let manifest = run_experiment(&cfg)?;
        println!("{} workers: config {} -> {}", workers, &manifest.config_hash[..12], manifest.outputs[0].sha256);
        digests.push(manifest.outputs[0].sha256.clone());
    }
    assert_eq!(digests[0], digests[1]);
    println!("outputs in {}", dir.display());
    Ok(())
}
