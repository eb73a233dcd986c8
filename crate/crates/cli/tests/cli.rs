use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn agler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agler"))
        .args(args)
        .env_remove("AGLER_CONFIG")
        .output()
        .unwrap()
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn spec(name: &str) -> String {
    corpus_dir().join(format!("{name}.json")).display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn z1z2_commutator_rank_is_one() {
    let out = agler(&["commutator-rank", &spec("z1z2"), "--grid", "64", "--ladder", "3,4,5,6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "stabilized", "{v}");
    assert_eq!(v["rank"], 1);
}

#[test]
fn non_inner_quotient_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "avg.json",
        r#"{"kind": "quotient",
            "num": {"degree": [1, 1], "coeffs": [[[0, 0], [0.5, 0]], [[0.5, 0], [0, 0]]]},
            "den": {"degree": [0, 0], "coeffs": [[[1, 0]]]}}"#,
    );
    let out = agler(&["verify-inner", &path, "--grid", "64"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["pass"], false);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["exit_code"], 1);
}

#[test]
fn corpus_functions_verify() {
    for name in ["z1z2", "four_minus_z1_minus_z2"] {
        let out = agler(&["verify-inner", &spec(name), "--grid", "64"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{not json");
    let out = agler(&["verify-inner", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);

    let out = agler(&["verify-inner", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = agler(&["commutator-rank", &spec("z1z2"), "--grid", "100"]);
    assert_eq!(out.status.code(), Some(2));

    let out = agler(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"grid_n": 128, "ladder": [3, 4, 5]}"#);
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_agler"))
            .args(args)
            .env("AGLER_CONFIG", &cfg)
            .output()
            .unwrap()
    };
    let out = run(&["commutator-rank", &spec("z1z2"), "--grid", "64", "--ladder", "3,4,5,6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["ladder"].as_array().unwrap().len(), 4);

    let out = run(&["verify-inner", &spec("z1z2")]);
    assert_eq!(stdout_json(&out)["grid_n"], 128);
    let out = run(&["verify-inner", &spec("z1z2"), "--grid", "64"]);
    assert_eq!(stdout_json(&out)["grid_n"], 64);

    let unknown = write(dir.path(), "unknown.json", r#"{"grid": 64}"#);
    let out = agler(&["--config", &unknown, "verify-inner", &spec("z1z2")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = agler(&[
            "reducing-test",
            &spec("blaschke_1_1"),
            "--grid",
            "64",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["verdict"], "reducing_product");
}

#[test]
fn decompose_reports_ranks() {
    let out = agler(&["agler-decompose", &spec("blaschke_1_2"), "--flavor", "min1max2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["method"], "closed_form");
    assert_eq!(v["kernel_ranks"], serde_json::json!([2, 1]));
    assert!(v["identity_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn spectrum_of_product() {
    let out = agler(&["spectrum", &spec("blaschke_1_1"), "--grid", "64", "-d", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["point_spectrum"].is_object());
}

#[test]
fn corpus_check_on_corpus_dir() {
    let out = agler(&["corpus-check", corpus_dir().to_str().unwrap(), "--grid", "64", "--ladder", "3,4,5,6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = stdout_json(&out);
    assert_eq!(v["total"], 12);
    assert_eq!(v["passed"], 12);
}

#[test]
fn corpus_files_match_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = agler(&["export-corpus", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let path = e.unwrap().path();
        let exported = std::fs::read_to_string(&path).unwrap();
        let shipped = std::fs::read_to_string(corpus_dir().join(path.file_name().unwrap())).unwrap();
        assert_eq!(exported, shipped, "{}", path.display());
    }
}
