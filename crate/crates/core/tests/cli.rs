use std::path::Path;
use std::process::Command;

use dirac_lab::report::{parse_scan_table, SCAN_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_dirac-lab");
const CANONICAL: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/canonical.toml");
const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/record_v1.jsonl");

fn run(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

#[test]
fn scan_with_overrides_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["scan", "-c", CANONICAL, "--f-grid", "0,0.5", "--t1", "0.5", "--tf", "1", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let scan = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let rows = parse_scan_table(&scan).unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[1].f - 0.5 * rows[1].f_star).abs() < 1e-12 * rows[1].f_star);
    assert!(dir.path().join("record.jsonl").exists());
    assert!(!dir.path().join("series_ode_f0.csv").exists());
}

#[test]
fn report_reemits_tables_from_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report", "--record", GOLDEN, "--out", dir.path().to_str().unwrap(), "--format", "table"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let scan = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert!(scan.starts_with(SCAN_HEADER));
    assert_eq!(parse_scan_table(&scan).unwrap().len(), 2);
}

#[test]
fn invalid_configs_fail_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = run(&["run", "-c", CANONICAL, "--tf", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stage `config`"), "{err}");
    assert!(!Path::new(&out).exists());

    let o = run(&["scan", "-c", CANONICAL, "--ramp", "linear", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage `pulse`"));

    let o = run(&["scan", "-c", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1));
}
