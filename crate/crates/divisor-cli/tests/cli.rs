//! End-to-end tests of the `divisor` binary: exit codes, output
//! formats, spec-file handling, and byte stability.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn divisor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divisor"))
        .args(args)
        .env_remove("DIVISOR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const NU_SPEC: &str = r#"{"atoms": [[0, 0.6666666667], [1, 0.3333333333]]}"#;

#[test]
fn member_non_member_exit_codes_and_lines() {
    let dir = tempfile::tempdir().unwrap();
    let nu = write_spec(dir.path(), "nu.spec", NU_SPEC);

    let out = divisor(&["member", &nu, "--t", "1.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(
        stdout(&out).trim(),
        "NON-MEMBER t=1.5 min_weight=-4.2526e-3 at=3"
    );

    let out = divisor(&["member", &nu, "--t", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "MEMBER t=2");
}

#[test]
fn member_psd_method() {
    let out = divisor(&["member", "--example", "nu", "--t", "1.5", "--method", "psd"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).starts_with("NON-MEMBER t=1.5 min_eig="));
}

#[test]
fn example_shortcuts_cover_both_families() {
    let out = divisor(&["member", "--example", "mu", "--alpha", "0.5", "--t", "1.4143"]);
    assert_eq!(out.status.code(), Some(0));
    let out = divisor(&["member", "--example", "nu", "--alpha", "0.25", "--t", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn psi_csv_to_file_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("psi.csv");
    let out = divisor(&[
        "psi",
        "--example",
        "mu",
        "--ymax",
        "10",
        "--samples",
        "64",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("psi:"), "summary on stdout");
    let csv = fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("y,re_psi,im_psi\n"));
    assert_eq!(csv.lines().count(), 130, "header + 2*64 + 1 samples");
    assert!(!csv.contains('\r'));
}

#[test]
fn csv_output_is_byte_stable() {
    let run = || {
        let out = divisor(&["psi", "--example", "nu", "--ymax", "8", "--samples", "128"]);
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(run(), run());

    let scan = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_divisor"));
        cmd.args(["scan", "--example", "nu", "--tmin", "0.5", "--tmax", "2.5", "--steps", "9"]);
        match threads {
            Some(n) => cmd.env("DIVISOR_THREADS", n),
            None => cmd.env_remove("DIVISOR_THREADS"),
        };
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    // parallel and capped runs produce identical bytes
    assert_eq!(scan(None), scan(Some("1")));
}

#[test]
fn fracpow_series_reports_signed_result() {
    let out = divisor(&["fracpow", "--example", "nu", "--t", "1.5"]);
    assert_eq!(out.status.code(), Some(3), "signed result exits 3");
    let csv = stdout(&out);
    assert!(csv.starts_with("location,weight\n"));
    assert!(stderr(&out).contains("SIGNED"));

    let out = divisor(&["fracpow", "--example", "nu", "--t", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn fracpow_grid_route_on_atomic_distribution_fails_cleanly() {
    let out = divisor(&["fracpow", "--example", "nu", "--t", "1.5", "--route", "grid"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("aliasing"), "{}", stderr(&out));
}

#[test]
fn fracpow_grid_density_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("density.csv");
    let out = divisor(&[
        "fracpow",
        "--example",
        "mu",
        "--t",
        "2",
        "--route",
        "grid",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout(&out);
    assert!(summary.contains("route=grid") && summary.contains("non-negative"));
    let csv = fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("x,value\n"));
}

#[test]
fn scan_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("scan.csv");
    let out = divisor(&[
        "scan",
        "--example",
        "nu",
        "--tmin",
        "0.1",
        "--tmax",
        "3",
        "--steps",
        "59",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout(&out);
    assert!(report.contains("classification: minimally_divisible_candidate"));
    assert!(report.contains("lambda0_est   : 1"));
    let csv = fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("t,member,method,evidence_value\n"));
    let members: Vec<&str> = csv
        .lines()
        .filter(|l| l.contains(",true,"))
        .collect();
    assert_eq!(members.len(), 3, "exactly the integers are members");
}

#[test]
fn check_passes_for_admissible_and_fails_for_coin() {
    let dir = tempfile::tempdir().unwrap();
    let out = divisor(&["check", "--example", "nu"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().all(|l| l.starts_with("OK")));

    let coin = write_spec(
        dir.path(),
        "coin.spec",
        r#"{"atoms": [[0, 0.5], [1, 0.5]]}"#,
    );
    let out = divisor(&["check", &coin]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn usage_errors_exit_one() {
    let out = divisor(&[]);
    assert_eq!(out.status.code(), Some(1));

    let out = divisor(&["member", "--t", "1.5"]);
    assert_eq!(out.status.code(), Some(1), "missing spec and example");

    let dir = tempfile::tempdir().unwrap();
    let nu = write_spec(dir.path(), "nu.spec", NU_SPEC);
    let out = divisor(&["member", &nu, "--example", "nu", "--t", "1.5"]);
    assert_eq!(out.status.code(), Some(1), "both spec and example");

    let out = divisor(&["member", "--example", "nu", "--t", "1.5", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    let out = divisor(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn spec_errors_exit_two_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();

    let bad_syntax = write_spec(dir.path(), "bad.spec", "{\"atoms\": [[0, 0.5],\n  [1, ]]}");
    let out = divisor(&["member", &bad_syntax, "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let bad_mass = write_spec(dir.path(), "mass.spec", r#"{"atoms": [[0, 0.5]]}"#);
    let out = divisor(&["member", &bad_mass, "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("invalid spec"), "{}", stderr(&out));

    let out = divisor(&["member", "/nonexistent/nu.spec", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
