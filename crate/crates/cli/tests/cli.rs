use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const CESARO: &str = "space.kind = finite\nspace.alpha = linear:1\ntheta = reciprocal\nchecks = [continuity, compactness, power_bound]\nN = 80\n";

fn rhaly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhaly"))
        .args(args)
        .output()
        .unwrap()
}

fn config(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_emits_verdicts_and_exits_zero() {
    let cfg = config(CESARO);
    let out = rhaly(&[
        "check",
        "--config",
        cfg.path().to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let status: Vec<&str> = v["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["status"].as_str().unwrap())
        .collect();
    assert_eq!(status[..2], ["Certified", "Refuted"]);
}

#[test]
fn refutations_do_not_change_the_exit_code() {
    let cfg = config("theta = geometric:6:0.3333333333333333\nchecks = [power_bound]\n");
    let out = rhaly(&[
        "check",
        "--config",
        cfg.path().to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Refuted"));
}

#[test]
fn config_errors_exit_one() {
    let missing = rhaly(&["check", "--config", "/nonexistent/rhaly.cfg"]);
    assert_eq!(missing.status.code(), Some(1));
    let cfg = config("checks = [continuity]\n");
    let no_theta = rhaly(&["check", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(no_theta.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&no_theta.stderr).contains("theta"));
    let cfg = config("theta = zero\nquad.r0 = 0.8\nquad.r1 = 0.5\n");
    assert_eq!(
        rhaly(&["check", "--config", cfg.path().to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn unwritable_output_exits_two() {
    let cfg = config(CESARO);
    let out = rhaly(&[
        "check",
        "--config",
        cfg.path().to_str().unwrap(),
        "--out",
        "/nonexistent/dir/report.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn no_timing_reruns_are_byte_identical() {
    let cfg = config(CESARO);
    let path = cfg.path().to_str().unwrap();
    for format in ["json", "csv", "text"] {
        let a = rhaly(&[
            "check",
            "--config",
            path,
            "--format",
            format,
            "--no-timing",
            "--workers",
            "1",
        ]);
        let b = rhaly(&[
            "check",
            "--config",
            path,
            "--format",
            format,
            "--no-timing",
            "--workers",
            "1",
        ]);
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn out_flag_writes_file() {
    let cfg = config(CESARO);
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("r.csv");
    let out = rhaly(&[
        "check",
        "--config",
        cfg.path().to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(dest).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("check,status"));
}

#[test]
fn extract_prints_exp_coefficients() {
    let out = rhaly(&[
        "extract", "--g", "exp", "--n-max", "6", "--nodes", "64", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut rd = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let h = rd.headers().unwrap().clone();
    let (n, v) = (
        h.iter().position(|c| c == "n").unwrap(),
        h.iter().position(|c| c == "value").unwrap(),
    );
    let rows: Vec<(usize, f64)> = rd
        .records()
        .map(|r| r.unwrap())
        .map(|r| (r[n].parse().unwrap(), r[v].parse().unwrap()))
        .collect();
    assert_eq!(rows.len(), 7);
    assert!((rows[3].1 - 1.0 / 6.0).abs() < 1e-14);
}

#[test]
fn validate_reports_pass() {
    let out = rhaly(&[
        "validate",
        "--g",
        "exp",
        "--f",
        "poly:1;1",
        "--points",
        "0.3,1+0.5i",
        "--format",
        "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["records"][0]["status"], "Pass");
}

#[test]
fn sweep_substitutes_every_value() {
    let cfg = config("theta = geometric:{}:0.5\nsweep.values = [0.5, 3]\nchecks = [power_bound]\n");
    let out = rhaly(&[
        "sweep",
        "--config",
        cfg.path().to_str().unwrap(),
        "--format",
        "json",
        "--N",
        "60",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["status"], "Certified");
    assert_eq!(recs[1]["status"], "Refuted");
    assert_eq!(recs[0]["policy"]["n_max"], 60);
}
