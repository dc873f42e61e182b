use std::fs;
use std::path::Path;
use std::process::Command;

use conewalk_cli::{parse_config, run};

fn config(body: &str, out: &Path) -> String {
    format!("{body}\nout_dir = {:?}\n", out.display().to_string())
}

const DP: &str = r#"
experiment = "dp_exact"
model = "ex1:family:1"
x = [2, 0]
n_list = [50]
seed = 3
"#;

#[test]
fn dp_exact_example_one_has_constant_en() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&config(DP, dir.path())).unwrap();
    let outcome = run(&cfg).unwrap();
    assert!(outcome.passed);
    let csv = fs::read_to_string(dir.path().join("dp.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "E_n").unwrap();
    let values: Vec<String> = lines.map(|l| l.split(',').nth(col).unwrap().to_string()).collect();
    assert_eq!(values.len(), 51);
    assert!(values.iter().all(|v| v == "8.000000000000000000000000000000"), "{values:?}");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["model"], "ex1:family:1");
    assert_eq!(manifest["passed"], true);
}

#[test]
fn forced_zero_shift_fails_the_halfline_run() {
    let dir = tempfile::tempdir().unwrap();
    let body = "experiment = \"halfline\"\nlaw = \"pm1\"\nr = 0\ngrid_points = 100\nseed = 1";
    let outcome = run(&parse_config(&config(body, dir.path())).unwrap()).unwrap();
    assert!(!outcome.passed);
}

#[test]
fn identical_configs_give_identical_csvs() {
    let body = r#"
experiment = "survival"
cone = "orthant:2"
model = "gauss:2"
x = [1.0, 2.0]
n_list = [1, 10, 100]
reps = 5000
seed = 11
"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&parse_config(&config(body, a.path())).unwrap()).unwrap();
    let mut cfg = parse_config(&config(body, b.path())).unwrap();
    cfg.workers = 1;
    run(&cfg).unwrap();
    let read = |d: &Path| fs::read(d.join("survival.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn binary_honours_flags_and_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    fs::write(&cfg_path, DP.replace("seed = 3", "")).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_conewalk"))
        .args(["--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "1"])
        .env("CONEWALK_SEED", "5")
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("dp.csv").exists());

    let status = Command::new(env!("CARGO_BIN_EXE_conewalk"))
        .args(["--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env_remove("CONEWALK_SEED")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
