use std::path::PathBuf;
use std::process::{Command, Output};

fn zygmund(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zygmund"))
        .args(args)
        .env_remove("ZYGMUND_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("zygmund-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn help_exits_zero() {
    assert_eq!(zygmund(&["--help"]).status.code(), Some(0));
    assert_eq!(zygmund(&["classify", "--help"]).status.code(), Some(0));
}

#[test]
fn unknown_flag_exits_one() {
    let out = zygmund(&["stencil", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_function_spec_reports_position() {
    let out = zygmund(&["seminorm", "--fn", "weierstrass:depht=20"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("position 12"), "{err}");
}

#[test]
fn zero_threads_is_an_error() {
    let out = zygmund(&["--threads", "0", "stencil", "--m", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stencil_example_certifies() {
    let out = zygmund(&["stencil", "--m", "3", "--kind", "zygmund"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let result = &v["result"];
    assert!(result["certified_order"].as_f64().unwrap() >= 3.9);
    assert_eq!(v["config"]["m"], 3);
}

#[test]
fn classify_matching_label_exits_zero() {
    let out = zygmund(&["classify", "--fn", "weierstrass"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn classify_mismatch_exits_two() {
    let out = zygmund(&["classify", "--fn", "power_abs:alpha=0.5", "--holder", "0.55"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stdout.is_empty(), "report is still written on mismatch");
}

#[test]
fn identities_pass() {
    let out = zygmund(&["identities", "--m", "3", "--trials", "20", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["result"]["passed"], true);
}

#[test]
fn env_dir_receives_report_and_metadata() {
    let dir = scratch_dir("env");
    let out = Command::new(env!("CARGO_BIN_EXE_zygmund"))
        .args(["stencil", "--m", "2"])
        .env("ZYGMUND_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report = std::fs::read_to_string(dir.join("stencil.json")).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("stencil.json.meta.json")).unwrap()).unwrap();
    assert!(!report.contains("timestamp"));
    assert!(meta["timestamp_unix"].is_number());
    assert_eq!(meta["matched"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn out_flag_overrides_env_dir() {
    let dir = scratch_dir("out");
    let target = dir.join("custom.json");
    let out = Command::new(env!("CARGO_BIN_EXE_zygmund"))
        .args(["--out", target.to_str().unwrap(), "stencil", "--m", "1"])
        .env("ZYGMUND_OUT_DIR", dir.join("unused"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.exists());
    assert!(!dir.join("unused").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn csv_report_has_header() {
    let out = zygmund(&["--format", "csv", "seminorm", "--fn", "sin", "--grid", "1025"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["quantity", "value", "witness_x", "witness_h"]);
    assert!(reader.records().count() >= 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["seminorm", "--fn", "tlog", "--grid", "4097"];
    let a = zygmund(&args);
    let b = zygmund(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
