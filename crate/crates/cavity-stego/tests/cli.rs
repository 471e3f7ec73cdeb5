//! End-to-end checks of the command-line binary: exit codes, file outputs
//! and byte-level determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavity-stego"))
}

#[test]
fn verify_evolution_passes_and_reports_diffs() {
    let out = bin()
        .args(["verify-evolution", "--json"])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    assert_eq!(report["status"], "pass");
    assert_eq!(report["diffs"].as_array().unwrap().len(), 4);
}

#[test]
fn derive_table_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("swap.csv");
    let out = bin()
        .args([
            "derive-table",
            "--compare",
            "--format",
            "csv",
            "--out",
            path.to_str().unwrap(),
            "--json",
        ])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 33, "header plus 32 rows");
    assert!(csv.starts_with("family,ghz_kind,ghz_code,bell_kind,bell_code,cell_code"));
}

#[test]
fn run_writes_deterministic_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("one.json");
    let second = dir.path().join("two.json");
    for path in [&first, &second] {
        let out = bin()
            .args([
                "run",
                "--secret",
                "11100",
                "--n",
                "8",
                "--seed",
                "42",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let one = std::fs::read(&first).unwrap();
    let two = std::fs::read(&second).unwrap();
    assert_eq!(one, two, "same seed must give byte-identical transcripts");
}

#[test]
fn run_then_account_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("transcript.json");
    let out = bin()
        .args([
            "run",
            "--secret",
            "01011",
            "--n",
            "10",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
            "--json",
        ])
        .output()
        .expect("binary runs");
    assert!(out.status.success());

    let out = bin()
        .args(["account", "--transcript", path.to_str().unwrap(), "--json"])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["results"]["account"]["qubits_communicated"], 3);
}

#[test]
fn tampered_transcript_fails_accounting_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("transcript.json");
    let out = bin()
        .args([
            "run",
            "--secret",
            "11100",
            "--n",
            "8",
            "--seed",
            "19",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert!(out.status.success());

    let tampered = std::fs::read_to_string(&path)
        .unwrap()
        .replace("\"z_measurements\": 5", "\"z_measurements\": 7");
    std::fs::write(&path, tampered).unwrap();

    let out = bin()
        .args(["account", "--transcript", path.to_str().unwrap(), "--json"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1), "assertion failures exit 1");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "fail");
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = bin()
        .args(["run", "--secret", "badbits"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["account", "--transcript", "/nonexistent/path.json"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["no-such-command"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2), "clap usage errors exit 2");
}

#[test]
fn aborted_round_exits_with_code_three() {
    // An explicit info sequence without the plan's pattern cannot hide.
    let out = bin()
        .args([
            "run",
            "--secret",
            "11100",
            "--n",
            "4",
            "--info",
            "0000000000000000",
            "--seed",
            "3",
        ])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn attack_command_matches_analytic_rate() {
    let out = bin()
        .args([
            "attack",
            "--model",
            "measure-resend",
            "--line",
            "d",
            "--trials",
            "20000",
            "--seed",
            "11",
            "--json",
        ])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["results"]["analytic_rate"], 0.25);
}

#[test]
fn stats_command_reports_usable_fraction() {
    let out = bin()
        .args([
            "stats-m", "--trials", "500", "--n", "32", "--seed", "5", "--json",
        ])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "pass");
    let usable = report["results"]["usable_fraction"].as_f64().unwrap();
    assert!((usable - 0.25).abs() < 0.02);
}
