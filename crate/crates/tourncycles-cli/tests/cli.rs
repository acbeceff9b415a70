//! End-to-end tests of the binary: determinism of generated files,
//! frozen command outputs and the exit-code contract.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tourncycles"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("tourncycles-test-{}-{name}", std::process::id()));
    p
}

const TRIANGLE: &str = "TRN 1 3\n010\n001\n100\n";

#[test]
fn gen_is_deterministic_and_valid() {
    let out1 = run(&["gen", "--family", "blowup", "--z", "0.5", "--n", "60", "--seed", "7"]);
    let out2 = run(&["gen", "--family", "blowup", "--z", "0.5", "--n", "60", "--seed", "7"]);
    assert!(out1.status.success());
    assert_eq!(out1.stdout, out2.stdout, "reruns are byte-identical");
    let text = stdout_of(&out1);
    assert!(text.starts_with("TRN 1 60\n"));
    let echo = String::from_utf8_lossy(&out1.stderr);
    assert!(echo.contains("\"part_sizes\":[30,30,0]"), "{echo}");
}

#[test]
fn gen_writes_file_and_echoes_to_stdout() {
    let path = tmp_path("blowup.trn");
    let out = run(&[
        "gen", "--family", "blowup", "--z", "0.5", "--n", "30", "--seed", "3", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let echo = stdout_of(&out);
    assert!(echo.contains("\"family\":\"blowup\""), "{echo}");
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("TRN 1 30\n"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn gen_circular_zero_is_transitive() {
    let a = run(&["gen", "--family", "circular", "--xi", "0", "--n", "20"]);
    let b = run(&["gen", "--family", "transitive", "--n", "20"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gen_potential_reads_file() {
    let path = tmp_path("zs.txt");
    std::fs::write(&path, "0.0\n0.1\n0.2\n0.3\n0.4\n").unwrap();
    let out = run(&[
        "gen", "--family", "potential", "--n", "5", "--z-file", path.to_str().unwrap(), "--seed",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_of(&out).starts_with("TRN 1 5\n"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn count_triangle_frozen() {
    let path = tmp_path("tri.trn");
    std::fs::write(&path, TRIANGLE).unwrap();
    let out = run(&["count", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(v["homs3"], 3);
    assert_eq!(v["homs4"], 0);
    assert_eq!(v["sigma3"], 0.125);
    std::fs::remove_file(&path).ok();
}

#[test]
fn count_rejects_malformed_trn_with_position() {
    let path = tmp_path("bad.trn");
    std::fs::write(&path, "TRN 1 2\n00\n00\n").unwrap();
    let out = run(&["count", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column 2"), "{err}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn spectral_triangle_frozen() {
    let path = tmp_path("tri-spec.trn");
    std::fs::write(&path, TRIANGLE).unwrap();
    let out = run(&["spectral", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert!((v["spectrum"]["rho"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let b = v["spectrum"]["complex_pairs"][0][1].as_f64().unwrap();
    assert!((b - 3.0_f64.sqrt() / 6.0).abs() < 1e-12);
    let lambda = v["profile"]["pairs"][0]["lambda"].as_f64().unwrap();
    assert!((lambda - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
    std::fs::remove_file(&path).ok();
}

#[test]
fn bound_frozen() {
    let out = run(&["bound", "--d", "0.03125"]);
    let v: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(v["g"], 0.0078125);
    assert_eq!(v["z"], 0.5);
    assert_eq!(v["k"], 2);
}

#[test]
fn region_grid_two_endpoints() {
    let out = run(&["region", "--grid", "2"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 3, "header plus two rows: {text}");
    assert_eq!(lines[0], "d,g,lm_lower,upper,z,k");
    let last: Vec<&str> = lines[2].split(',').collect();
    assert!((last[1].parse::<f64>().unwrap() - 0.0625).abs() < 1e-15);
    assert!((last[3].parse::<f64>().unwrap() - 1.0 / 12.0).abs() < 1e-15);
    // 17 significant digits, '.' decimal.
    assert!(last[0].contains('e') && last[0].len() >= 20, "{}", last[0]);
}

#[test]
fn optimize_corner_and_sweep() {
    let out = run(&["optimize", "--s3", "0.013888888888888888", "--rho", "0.16666666666666666"]);
    let v: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0 / 432.0).abs() < 1e-9);
    assert!(v["case_tag"].as_str().unwrap().starts_with("case"));

    let out = run(&["optimize", "--s3", "0.0625", "--sweep"]);
    let v: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!(value > 0.0 && value < 0.0625);
}

#[test]
fn optimize_infeasible_exits_2() {
    let out = run(&["optimize", "--s3", "0.0138888888888", "--rho", "0.05"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn optimize_batch_jsonl() {
    let path = tmp_path("batch.csv");
    std::fs::write(&path, "s3,rho\n0.0625,0.4\n0.125,0.5\n").unwrap();
    let out = run(&["optimize", "--batch", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.trim().lines().map(|l| l.trim()).collect();
    assert_eq!(lines.len(), 2);
    let second: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    assert!((second["value"].as_f64().unwrap() - 1.0 / 16.0).abs() < 1e-12);
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_small_suite_passes() {
    let out = run(&["verify", "--suite", "small-exhaustive", "--max-n", "5"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suite"], "small-exhaustive");
}

#[test]
fn verify_unknown_suite_exits_1() {
    let out = run(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_error_exits_1() {
    let out = run(&["gen", "--family", "uniform", "--n", "5"]);
    assert_eq!(out.status.code(), Some(1), "missing --seed is a validation error");
    let out = run(&["nonsense-command"]);
    assert_eq!(out.status.code(), Some(1));
}
