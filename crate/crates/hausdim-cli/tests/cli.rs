//! End-to-end tests that drive the installed binary as a subprocess.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hausdim"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawning the binary");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_ndjson(path: &Path) -> Vec<serde_json::Value> {
    let text = std::fs::read_to_string(path).expect("reading the ledger");
    text.lines()
        .map(|line| serde_json::from_str(line).expect("parsing a ledger line"))
        .collect()
}

/// Timestamps and wall-clock timings are the only run-dependent fields.
fn scrub(value: &mut serde_json::Value) {
    value["timestamp"] = serde_json::Value::String(String::new());
    value["timings"]["total_ms"] = serde_json::json!(0.0);
}

#[test]
fn repeated_runs_are_deterministic_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.ndjson");
    for _ in 0..2 {
        run_ok(bin().args([
            "cantor",
            "--digits",
            "1,2",
            "--h",
            "0.002",
            "--out",
            ledger.to_str().unwrap(),
        ]));
    }
    let mut lines = read_ndjson(&ledger);
    assert_eq!(lines.len(), 2, "one appended line per run");
    let (a, b) = lines.split_at_mut(1);
    scrub(&mut a[0]);
    scrub(&mut b[0]);
    assert_eq!(a[0], b[0]);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    let ledger = dir.path().join("runs.ndjson");
    std::fs::write(&config, "h = 0.004\ntol_s = 1e-10\n# comment\n").unwrap();

    run_ok(bin().args([
        "cantor",
        "--digits",
        "1,2",
        "--config",
        config.to_str().unwrap(),
        "--out",
        ledger.to_str().unwrap(),
    ]));
    run_ok(bin().args([
        "cantor",
        "--digits",
        "1,2",
        "--h",
        "0.002",
        "--tol-s",
        "1e-9",
        "--config",
        config.to_str().unwrap(),
        "--out",
        ledger.to_str().unwrap(),
    ]));

    let lines = read_ndjson(&ledger);
    assert_eq!(lines[0]["config"]["h"].as_f64().unwrap(), 0.004);
    assert_eq!(lines[0]["config"]["tol_s"].as_f64().unwrap(), 1e-10);
    assert_eq!(lines[1]["config"]["h"].as_f64().unwrap(), 0.002);
    assert_eq!(lines[1]["config"]["tol_s"].as_f64().unwrap(), 1e-9);
}

#[test]
fn jobs_flag_beats_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.ndjson");
    run_ok(bin().env("HAUSDIM_JOBS", "2").args([
        "cantor",
        "--digits",
        "2,3",
        "--h",
        "0.004",
        "--out",
        ledger.to_str().unwrap(),
    ]));
    run_ok(bin().env("HAUSDIM_JOBS", "2").args([
        "cantor",
        "--digits",
        "2,3",
        "--h",
        "0.004",
        "--jobs",
        "1",
        "--out",
        ledger.to_str().unwrap(),
    ]));
    let lines = read_ndjson(&ledger);
    assert_eq!(lines[0]["config"]["jobs"].as_u64().unwrap(), 2);
    assert_eq!(lines[1]["config"]["jobs"].as_u64().unwrap(), 1);
}

#[test]
fn invalid_inputs_exit_nonzero_with_a_message() {
    let repeated = bin()
        .args(["cantor", "--digits", "1,1", "--h", "0.01"])
        .output()
        .unwrap();
    assert!(!repeated.status.success());
    let msg = String::from_utf8_lossy(&repeated.stderr);
    assert!(msg.contains("repeat"), "stderr was: {msg}");

    let bad_lambda = bin()
        .args(["perturbed", "--lambda", "1.5", "--h", "0.01"])
        .output()
        .unwrap();
    assert!(!bad_lambda.status.success());

    let bad_radius = bin()
        .args([
            "complex",
            "--set",
            "i1",
            "--h",
            "0.05",
            "--truncation-radius",
            "1.0",
        ])
        .output()
        .unwrap();
    assert!(!bad_radius.status.success());

    let bad_h_2d = bin()
        .args(["complex", "--set", "i3", "--h", "0.03"])
        .output()
        .unwrap();
    assert!(!bad_h_2d.status.success(), "0.03 is not a unit fraction");
}

#[test]
fn csv_ledger_has_a_single_header() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.csv");
    for _ in 0..2 {
        run_ok(bin().args([
            "cantor",
            "--digits",
            "1,2",
            "--h",
            "0.004",
            "--format",
            "csv",
            "--out",
            ledger.to_str().unwrap(),
        ]));
    }
    let text = std::fs::read_to_string(&ledger).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "header plus one row per run");
    assert!(lines[0].starts_with("problem,h,truncation_radius"));
    assert_eq!(
        lines.iter().filter(|l| l.starts_with("problem,")).count(),
        1
    );
    // The problem label contains a comma and must arrive quoted.
    assert!(lines[1].starts_with("\"E[1,2]\","));
}

#[test]
fn reproduce_respects_the_budget_and_subset() {
    let out = run_ok(bin().args(["reproduce", "t4", "--budget-secs", "0.000001"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("0 passed, 0 failed, 15 skipped"),
        "stdout: {text}"
    );

    let out = run_ok(bin().args(["reproduce", "t1", "--subset", "E[3,4]"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("2 passed, 0 failed, 0 skipped"),
        "stdout: {text}"
    );

    let missing = bin()
        .args(["reproduce", "t1", "--subset", "no-such-row"])
        .output()
        .unwrap();
    assert!(!missing.status.success());
}

#[test]
fn matrix_dump_is_parseable_coordinate_data() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("upper.coords");
    run_ok(bin().args([
        "cantor",
        "--digits",
        "1,2",
        "--h",
        "0.01",
        "--dump-matrix",
        dump.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&dump).unwrap();
    let mut rows = 0usize;
    for line in text.lines() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(parts.len(), 3, "coordinate line: {line}");
        let _: u32 = parts[0].parse().expect("row index");
        let _: u32 = parts[1].parse().expect("column index");
        let value: f64 = parts[2].parse().expect("entry value");
        assert!(value > 0.0, "stored entries are positive");
        rows += 1;
    }
    assert!(rows > 100, "the kernel matrix is not tiny");
}
