use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fivegsim::harness::{parse_config, run_experiment, Experiment, ExperimentConfig, HarnessError, MANIFEST_FILE};

/// Every experiment shrunk to run in well under a second.
const SMALL: &str = r#"{
  "lsa": { "n_antennas": 6, "m_max": 6, "w_grid_points": 40, "c_w_values": [0.01, 1, 100] },
  "cell_splitting": { "scales": [1, 0.5], "n_users": 100, "n_trials": 2 },
  "fbmc": { "subcarriers": [16, 32], "antennas": [1, 2], "trials": 3, "n_symbols": 8 },
  "pon": { "hot_load_points": [0.5, 1.5], "pon": { "sim_duration_s": 0.02 } },
  "entropy": {
    "regular": { "width": 256, "height": 256 },
    "random": { "width": 256, "height": 256 },
    "selforg": { "width": 256, "height": 256 }
  }
}"#;

fn small(out: &Path) -> ExperimentConfig {
    ExperimentConfig { out: out.to_path_buf(), ..parse_config(SMALL).unwrap() }
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fivegsim")).args(args).output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn empty_document_is_all_defaults() {
    assert_eq!(parse_config("{}").unwrap(), ExperimentConfig::default());
    let seven = parse_config(r#"{"seed": 7}"#).unwrap();
    assert_eq!(seven, ExperimentConfig { seed: 7, ..Default::default() });
}

#[test]
fn config_errors_are_classified() {
    let e = parse_config(r#"{"experiment": "bogus"}"#).unwrap_err();
    assert!(matches!(&e, HarnessError::UnknownExperiment(n) if n == "bogus"), "{e}");

    let e = parse_config("{\n  \"seed\": 1,\n  \"sede\": 2\n}").unwrap_err();
    assert!(matches!(&e, HarnessError::UnknownKey { key, line: 3, .. } if key == "sede"), "{e}");

    let e = parse_config(r#"{"pon": {"pon": {"frame_period": 1}}}"#).unwrap_err();
    assert!(matches!(&e, HarnessError::UnknownKey { key, .. } if key == "frame_period"), "{e}");

    let e = parse_config("{\n  \"seed\": ,\n}").unwrap_err();
    assert!(matches!(e, HarnessError::Parse { line: 2, .. }), "{e}");

    let e = parse_config(r#"{"workers": 0}"#).unwrap_err();
    assert!(matches!(e, HarnessError::InvalidValue { .. }), "{e}");
    let e = parse_config(r#"{"cell_splitting": {"scales": [0.3]}}"#).unwrap_err();
    assert!(matches!(e, HarnessError::InvalidValue { .. }), "{e}");
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn csvs_have_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let manifest = run_experiment(&cfg).unwrap();
    assert_eq!(manifest.outputs.len(), 5);
    for e in Experiment::ALL {
        let (header, rows) = read_csv(&dir.path().join(e.file_name()));
        assert_eq!(header, e.columns());
        let listed = manifest.outputs.iter().find(|o| o.experiment == e.name()).unwrap();
        assert_eq!(listed.rows, rows.len());
        assert!(rows.iter().all(|r| r.len() == header.len()));
    }
    let (_, entropy) = read_csv(&dir.path().join("entropy_table.csv"));
    assert_eq!(entropy.len(), 18);
    let kinds: Vec<&str> = entropy.iter().step_by(6).map(|r| r[0].as_str()).collect();
    assert_eq!(kinds, ["regular", "random", "selforg"]);
    let (_, pon) = read_csv(&dir.path().join("pon_fig10.csv"));
    assert_eq!(pon.len(), cfg.pon.group_sizes.len() * cfg.pon.hot_load_points.len());
    let (_, lsa) = read_csv(&dir.path().join("lsa_fig5.csv"));
    for v in lsa.iter().flat_map(|r| r.iter()) {
        let x: f64 = v.parse().unwrap();
        assert_eq!(x.to_string(), *v);
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(json["seed"], 0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = small(&dir.path().join("a"));
    let b = ExperimentConfig { out: dir.path().join("b"), ..a.clone() };
    run_experiment(&a).unwrap();
    run_experiment(&b).unwrap();
    for e in Experiment::ALL {
        let f = e.file_name();
        assert_eq!(fs::read(a.out.join(&f)).unwrap(), fs::read(b.out.join(&f)).unwrap(), "{f}");
    }
    let c = ExperimentConfig { seed: 1, out: dir.path().join("c"), ..a.clone() };
    run_experiment(&c).unwrap();
    assert_ne!(fs::read(a.out.join("pon_fig10.csv")).unwrap(), fs::read(c.out.join("pon_fig10.csv")).unwrap());
}

#[test]
fn failed_run_removes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // a directory where the last CSV should go makes the final write fail
    fs::create_dir(dir.path().join("entropy_table.csv")).unwrap();
    let e = run_experiment(&small(dir.path())).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    for exp in &Experiment::ALL[..4] {
        assert!(!dir.path().join(exp.file_name()).exists(), "{exp} left behind");
    }
    assert!(!dir.path().join(MANIFEST_FILE).exists());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.json");
    fs::write(&config, SMALL).unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"experiment": "bogus"}"#).unwrap();
    let cfg = config.to_str().unwrap();

    let list = cli(&["list"]);
    assert_eq!(list.status.code(), Some(0));
    let text = String::from_utf8(list.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("pon_fig10: group_size_N,hot_load_fraction,mean_delay_ms,p95_delay_ms,stable"));

    assert_eq!(cli(&["validate", "--config", cfg]).status.code(), Some(0));
    assert_eq!(cli(&["validate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cli(&["run", "--experiment", "nope", "--config", cfg]).status.code(), Some(2));

    let out = dir.path().join("out");
    let run = cli(&["run", "--experiment", "pon_fig10", "--config", cfg, "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("pon_fig10.csv").exists());
    assert!(!out.join("lsa_fig5.csv").exists());

    // output directory path occupied by a file
    let blocked = cli(&["run", "--experiment", "pon_fig10", "--config", cfg, "--out", config.to_str().unwrap()]);
    assert_eq!(blocked.status.code(), Some(3));
}
