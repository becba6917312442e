//! End-to-end tests of the `skipover` binary: exit codes, formats, and
//! output stability.

use std::path::PathBuf;
use std::process::{Command, Output};

use skipover::report::ReportDocument;

const NET_A: &str = r#"{
  "stations": [
    {"name": "first", "capacity": 1, "service_time": 1.0},
    {"name": "second", "capacity": 1, "service_time": 1.0}
  ],
  "routing": [[0.0, 1.0], [1.0, 0.0]]
}"#;

const NET_B: &str = r#"{
  "stations": [
    {"name": "wide", "capacity": 2, "service_time": 1.0},
    {"name": "slow", "capacity": 1, "service_time": 2.0}
  ],
  "routing": [[0.0, 1.0], [1.0, 0.0]]
}"#;

const NET_ASYM: &str = r#"{
  "stations": [
    {"name": "a", "capacity": 2, "service_time": 0.7},
    {"name": "b", "capacity": 1, "service_time": 1.3},
    {"name": "c", "capacity": 2, "service_time": 0.9}
  ],
  "routing": [[0.0, 0.6, 0.4], [0.5, 0.0, 0.5], [1.0, 0.0, 0.0]],
  "reference": "a"
}"#;

const NET_BAD_ROW: &str = r#"{
  "stations": [
    {"name": "a", "capacity": 1, "service_time": 1.0},
    {"name": "b", "capacity": 1, "service_time": 1.0}
  ],
  "routing": [[0.5, 0.5], [0.3, 0.8]]
}"#;

const NET_HUGE: &str = r#"{
  "stations": [
    {"name": "a", "capacity": 300, "service_time": 1.0},
    {"name": "b", "capacity": 300, "service_time": 1.0},
    {"name": "c", "capacity": 300, "service_time": 1.0},
    {"name": "d", "capacity": 300, "service_time": 1.0}
  ],
  "routing": [
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0, 0.0]
  ]
}"#;

fn write_model(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn skipover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skipover"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr_str(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn solve_json_reports_saturated_throughput() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netA.json", NET_A);
    let out = skipover(&[
        "solve",
        "-m",
        model.to_str().unwrap(),
        "-n",
        "2",
        "--method",
        "convolution",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let doc: ReportDocument = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc.solver.method, "convolution");
    assert_eq!(doc.reports.len(), 2);
    for r in &doc.reports {
        assert!((r.total_throughput - 2.0).abs() < 1e-12);
    }
}

#[test]
fn infeasible_population_exits_3_and_cites_capacity_sum() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netA.json", NET_A);
    let out = skipover(&["solve", "-m", model.to_str().unwrap(), "-n", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_str(&out);
    assert!(err.contains("capacity sum 2"), "stderr: {err}");
}

#[test]
fn mva_solve_matches_convolution() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netB.json", NET_B);
    let path = model.to_str().unwrap();
    let conv = skipover(&["solve", "-m", path, "-n", "2", "--format", "json"]);
    let mva = skipover(&[
        "solve", "-m", path, "-n", "2", "--method", "mva", "--format", "json",
    ]);
    assert_eq!(conv.status.code(), Some(0));
    assert_eq!(mva.status.code(), Some(0));
    let conv_doc: ReportDocument = serde_json::from_str(&stdout_str(&conv)).unwrap();
    let mva_doc: ReportDocument = serde_json::from_str(&stdout_str(&mva)).unwrap();
    for (a, b) in conv_doc.reports.iter().zip(&mva_doc.reports) {
        assert!((a.total_throughput - b.total_throughput).abs() <= 1e-8);
        assert!((a.utilization - b.utilization).abs() <= 1e-8);
        for (p, q) in a.distribution.iter().zip(&b.distribution) {
            assert!((p - q).abs() <= 1e-8);
        }
    }
    // MVA reports carry stability flags, convolution reports do not.
    assert!(mva_doc.reports.iter().all(|r| r.stability_flag.is_some()));
    assert!(conv_doc.reports.iter().all(|r| r.stability_flag.is_none()));
}

#[test]
fn sweep_covers_range_and_saturates_finite() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netB.json", NET_B);
    let out = skipover(&[
        "sweep",
        "-m",
        model.to_str().unwrap(),
        "--from",
        "1",
        "--to",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let csv = stdout_str(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2, "header plus one row per (n, station)");
    // Station 1 at population 2: total throughput 1.
    let row: Vec<&str> = lines
        .iter()
        .find(|l| l.starts_with("2,1,"))
        .expect("row for (2, slow)")
        .split(',')
        .collect();
    let x: f64 = row[3].parse().unwrap();
    assert!((x - 1.0).abs() < 1e-12);
    // Values at the capacity sum are finite.
    for line in lines.iter().filter(|l| l.starts_with("3,")) {
        let fields: Vec<&str> = line.split(',').collect();
        for field in &fields[3..9] {
            let v: f64 = field.parse().unwrap();
            assert!(v.is_finite(), "line: {line}");
        }
    }
}

#[test]
fn sweep_rejects_reversed_range() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netB.json", NET_B);
    let out = skipover(&[
        "sweep",
        "-m",
        model.to_str().unwrap(),
        "--from",
        "3",
        "--to",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_on_consistent_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netA.json", NET_A);
    let out = skipover(&["verify", "-m", model.to_str().unwrap(), "-n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_str(&out));
    assert!(stdout_str(&out).contains("result: PASS"));
}

#[test]
fn verify_passes_at_single_state_boundary() {
    const NET_C: &str = r#"{
      "stations": [
        {"name": "a", "capacity": 1, "service_time": 1.0},
        {"name": "b", "capacity": 1, "service_time": 1.0},
        {"name": "c", "capacity": 1, "service_time": 1.0}
      ],
      "routing": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netC.json", NET_C);
    let out = skipover(&["verify", "-m", model.to_str().unwrap(), "-n", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_str(&out));
    // At the capacity sum the complement-based solver is out of its domain
    // and the exemption must be reported.
    assert!(stdout_str(&out).contains("mva exempted"));
}

#[test]
fn verify_zero_tolerance_fails_with_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netAsym.json", NET_ASYM);
    let out = skipover(&[
        "verify",
        "-m",
        model.to_str().unwrap(),
        "-n",
        "3",
        "--tolerance",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stdout_str(&out).contains("result: FAIL"));
}

#[test]
fn verify_respects_oracle_size_limit() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "huge.json", NET_HUGE);
    let out = skipover(&["verify", "-m", model.to_str().unwrap(), "-n", "600"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr_str(&out));
}

#[test]
fn invalid_model_exits_2_naming_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "bad.json", NET_BAD_ROW);
    let out = skipover(&["solve", "-m", model.to_str().unwrap(), "-n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("routing row 1"));
}

#[test]
fn json_output_is_stable_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netB.json", NET_B);
    let path = model.to_str().unwrap();
    let args = ["solve", "-m", path, "-n", "2", "--format", "json"];
    let first = stdout_str(&skipover(&args));
    let second = stdout_str(&skipover(&args));
    let strip = |text: &str| -> String {
        text.lines()
            .filter(|l| !l.contains("timing_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn seed_flag_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netA.json", NET_A);
    let out = skipover(&[
        "solve",
        "--seed",
        "42",
        "-m",
        model.to_str().unwrap(),
        "-n",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
}

#[test]
fn table_format_is_default() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netA.json", NET_A);
    let out = skipover(&["solve", "-m", model.to_str().unwrap(), "-n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let table = stdout_str(&out);
    assert!(table.contains("method: convolution"));
    assert!(table.contains("first"));
    assert!(table.contains("2.00000000000e0"));
}

#[test]
fn mva_warning_suggests_stable_variant() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(&dir, "netB.json", NET_B);
    // Population 3 = capacity sum: the complement degrades and the flag trips.
    let out = skipover(&[
        "solve",
        "-m",
        model.to_str().unwrap(),
        "-n",
        "3",
        "--method",
        "mva",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr_str(&out).contains("stable-mva"));
}
