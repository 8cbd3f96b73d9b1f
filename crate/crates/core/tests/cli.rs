use std::process::{Command, Output};

use serde_json::Value;

fn qmpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmpc")).args(args).env_remove("QMPC_SEED").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = qmpc(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn run_decodes_examples() {
    let v = json(&["run", "--n", "2", "--inputs", "11", "--paddings", "00"]);
    assert_eq!(v["result"]["decoded"], 1);
    let v = json(&["run", "--n", "4", "--inputs", "0000", "--paddings", "1010"]);
    assert_eq!(v["result"]["decoded"], 0);
    assert_eq!(v["result"]["expected"], 0);
}

#[test]
fn length_mismatch_exits_2() {
    let out = qmpc(&["run", "--inputs", "111", "--paddings", "11"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--paddings"));
}

#[test]
fn malformed_bits_exit_2_naming_the_flag() {
    let out = qmpc(&["run", "--inputs", "10x1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--inputs") && err.contains('x'), "{err}");
}

#[test]
fn unknown_flag_exits_2() {
    assert_eq!(qmpc(&["sweep", "--bogus"]).status.code(), Some(2));
    assert_eq!(qmpc(&["run", "--inputs", "11", "--mode", "analog"]).status.code(), Some(2));
}

#[test]
fn sweep_row_counts() {
    let v = json(&["sweep", "--n", "2"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
    assert_eq!(v["summary"]["correctness"], 1.0);
    let v = json(&["sweep", "--n", "4", "--seed", "3"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 256);
    assert_eq!(v["summary"]["matches"], 256);
    assert_eq!(v["seed"], 3);
}

#[test]
fn sweep_output_is_byte_identical_across_invocations() {
    for args in [
        &["sweep", "--n", "3", "--seed", "9"][..],
        &["sweep", "--n", "2", "--seed", "9", "--mode", "photonic", "--shots", "100", "--format", "csv"][..],
    ] {
        let a = qmpc(args);
        let b = qmpc(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qmpc"));
        cmd.args(["run", "--inputs", "1011", "--mode", "photonic", "--shots", "200"]).args(extra);
        match env {
            Some(s) => cmd.env("QMPC_SEED", s),
            None => cmd.env_remove("QMPC_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("42"), &[]), run(None, &["--seed", "42"]));
    assert_ne!(run(Some("42"), &[]), run(Some("43"), &[]));
}

#[test]
fn audit_small_and_skipped() {
    let v = json(&["audit", "--n", "2", "--shots", "1000"]);
    assert_eq!(v["all_passed"], 1);
    let out = qmpc(&["audit", "--n", "5", "--shots", "500", "--format", "csv"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("leakage,skipped,0.0,skipped: n > 4"), "{csv}");
}

#[test]
fn noise_file_changes_photonic_results() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noise.json");
    std::fs::write(
        &path,
        r#"{"angle_jitter_sigma":0.0,"dark_count_prob":0.0,"crosstalk_prob":0.0,"extinction_ratio_db":null,"coupling_efficiency":1.0}"#,
    )
    .unwrap();
    let v = json(&[
        "run", "--inputs", "0110", "--paddings", "1001", "--mode", "photonic", "--shots", "400", "--noise-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(v["result"]["detected"], 400);
    assert_eq!(v["result"]["correctness"], 1.0);

    std::fs::write(&path, r#"{"angle_jitter_sigma":0.0}"#).unwrap();
    let out = qmpc(&["run", "--inputs", "01", "--noise-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
