//! The command-line front end on a small configuration.

use std::path::Path;
use std::process::Command;

use secure_mimo::harness::read_rows;
use secure_mimo::io::read_matrix;

const TINY: &str = r#"{
    "interfering_cells": 1,
    "users": 2,
    "bs_antennas": 16,
    "eve_antennas": 2,
    "coherence_len": 64,
    "pilot_len": 2,
    "p0_over_n0_db": 5,
    "snr_db": 5,
    "rho": 30
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_secure-mimo"))
}

fn run(args: &[&str], dir: &Path) -> String {
    let cfg = dir.join("tiny.json");
    std::fs::write(&cfg, TINY).unwrap();
    let out = bin().args(args).arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn asymptotic_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["asymptotic"], dir.path());
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,a1,a2,gamma_bar,rate_bits"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn simulate_writes_named_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("point.csv");
    let gains = dir.path().join("gains.csv");
    run(
        &["simulate", "--trials", "3", "--seed", "4", "--out", csv.to_str().unwrap(), "--dump-gains", gains.to_str().unwrap()],
        dir.path(),
    );
    let rows = read_rows(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.secrecy_bits >= 0.0 && r.seed == 4));
    assert_eq!(rows[0].scheme, "proposed");
    assert_eq!(rows[3].scheme, "asymptotic");
    let dump = std::fs::read_to_string(&gains).unwrap();
    assert!(dump.starts_with("trial,l,t,k,re,im,g_eve"));
    // 3 trials x 2 cells x 2 streams x 2 users
    assert_eq!(dump.lines().count(), 1 + 24);
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = |w: &'static str| ["sweep", "--axis", "rho", "--values", "10,30", "--trials", "3", "--workers", w, "--schemes", "proposed,mfan"];
    let one = run(&args("1"), dir.path());
    let eight = run(&args("8"), dir.path());
    assert_eq!(one, eight);
    assert_eq!(read_rows(one.as_bytes()).unwrap().len(), 8);
}

#[test]
fn compare_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["compare-mfan", "--trials", "3", "--phi", "0.5,0.9"], dir.path());
    let rows = read_rows(out.as_bytes()).unwrap();
    assert!(rows.iter().any(|r| r.scheme == "mfan"));

    let mats = dir.path().join("mats");
    let spectrum = run(&["spectrum-dump", "--matrix-dir", mats.to_str().unwrap()], dir.path());
    let lines: Vec<&str> = spectrum.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue,class");
    assert_eq!(lines.len(), 1 + 16);
    assert!(lines[1].ends_with("noise") && lines[16].ends_with("eavesdropper"));
    let y0 = read_matrix(std::io::BufReader::new(std::fs::File::open(mats.join("y0_bs0.csv")).unwrap())).unwrap();
    assert_eq!(y0.shape(), (16, 64));
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"users": 3, "pilot_len": 2}"#).unwrap();
    let out = bin().args(["asymptotic", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = bin().args(["sweep", "--axis", "bogus", "--values", "1"]).output().unwrap();
    assert!(!out.status.success());
}
