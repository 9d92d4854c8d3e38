use std::path::Path;
use std::process::{Command, Output};

fn hcmem(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_hcmem")).args(args).output().unwrap();
    assert!(out.status.success(), "hcmem {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(hcmem(args).stdout).unwrap()
}

#[test]
fn gen_prints_a_parseable_circuit() {
    let text = stdout(&["gen", "--code", "honeycomb", "--model", "EM3", "--distance", "4", "--p", "0.001", "--observable", "H"]);
    assert!(text.contains("MPP"));
    assert!(text.contains("OBSERVABLE_INCLUDE(1)"));
    let c = honeycomb_memory::circuit::Circuit::parse(&text).unwrap();
    assert_eq!(c.to_string(), text);

    let surface = stdout(&["gen", "--code", "surface", "--model", "SI1000", "--distance", "3", "--rounds", "2"]);
    assert!(surface.contains("DETECTOR"));
}

#[test]
fn gen_rejects_bad_arguments() {
    let bad = Command::new(env!("CARGO_BIN_EXE_hcmem"))
        .args(["gen", "--code", "honeycomb", "--distance", "5"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_hcmem"))
        .args(["gen", "--code", "surface", "--observable", "H"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn dem_output_is_graphlike_unless_raw() {
    let args = ["dem", "--code", "honeycomb", "--model", "SD6", "--distance", "4", "--p", "0.001"];
    let dem = honeycomb_memory::dem::DetectorErrorModel::parse(&stdout(&args)).unwrap();
    assert!(!dem.mechanisms.is_empty());
    let raw = stdout(&[&args[..], &["--raw"]].concat());
    assert_ne!(raw, stdout(&args));
}

#[test]
fn sample_reports_fractions() {
    let json = stdout(&["sample", "--code", "surface", "--distance", "3", "--p", "0.01", "--shots", "500", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["shots"], 500);
    let mean = v["mean"].as_f64().unwrap();
    assert!(mean > 0.0 && mean < 0.5);

    let raw = stdout(&["sample", "--code", "surface", "--distance", "3", "--p", "0.01", "--shots", "20", "--raw-events"]);
    let lines: Vec<&str> = raw.lines().collect();
    assert_eq!(lines.len(), 20);
    assert!(lines.iter().all(|l| l.len() == lines[0].len() && l.chars().all(|c| c == '0' || c == '1')));
}

fn run_small(out: &Path, seed: &str) {
    hcmem(&[
        "run", "--code", "surface", "--model", "SD6", "--distance", "3", "5", "--p", "0.004", "0.008",
        "--shots-cap", "400", "--errors-cap", "1000", "--batch", "200", "--seed", seed, "--threads", "2",
        "--out", out.to_str().unwrap(),
    ]);
}

#[test]
fn run_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.csv");
    run_small(&stats, "1");
    let rows = honeycomb_memory::experiment::read_csv(&stats).unwrap();
    // 2 distances x 2 rates x 2 observables.
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.shots == 400));

    // A second run merges into the same file.
    run_small(&stats, "2");
    let rows = honeycomb_memory::experiment::read_csv(&stats).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.shots == 800));

    let metrics = dir.path().join("metrics.csv");
    let thresholds = dir.path().join("thresholds.json");
    hcmem(&[
        "fit", stats.to_str().unwrap(), "--out", metrics.to_str().unwrap(),
        "--thresholds", thresholds.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&metrics).unwrap();
    assert_eq!(text.lines().next().unwrap(), honeycomb_memory::analysis::METRICS_COLUMNS.join(","));
    assert_eq!(text.lines().count(), 3);
    let brackets: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&thresholds).unwrap()).unwrap();
    assert_eq!(brackets.as_array().unwrap().len(), 1);
}

#[test]
fn run_reads_a_campaign_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{"seed": 9, "budget": {"max_shots": 128, "batch": 64},
            "groups": [{"code": "honeycomb", "models": ["EM3"], "distances": [4], "ps": [0.01]}]}"#,
    )
    .unwrap();
    let stats = dir.path().join("s.csv");
    hcmem(&["run", "--config", config.to_str().unwrap(), "--out", stats.to_str().unwrap(), "--threads", "1"]);
    let rows = honeycomb_memory::experiment::read_csv(&stats).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.shots == 128));
}
