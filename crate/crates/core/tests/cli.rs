//! End-to-end checks of the `pixel-wpt` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pixel-wpt"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn gen_small_antenna(dir: &Path, name: &str) {
    let out = run(dir, &["gen-antenna", "--q", "8", "--k", "12", "--n-eff", "3", "--out", name]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn zero_numbers(v: &mut Value) {
    match v {
        Value::Number(_) => *v = Value::from(0.0),
        Value::Array(items) => items.iter_mut().for_each(zero_numbers),
        Value::Object(map) => map.values_mut().for_each(zero_numbers),
        _ => {}
    }
}

#[test]
fn generated_antenna_decomposes() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_antenna(dir.path(), "ant.json");
    let out = run(dir.path(), &["--antenna", "ant.json", "decompose"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("index,singular_value,cumulative_energy"));
    assert!(text.contains("N_eff = 3"), "{text}");
}

#[test]
fn sweep_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_antenna(dir.path(), "ant.json");
    let args = |out: &'static str| {
        [
            "--antenna", "ant.json", "--tx", "1,2", "--rx", "1", "--realizations", "3", "--seed", "11", "--out", out,
            "sweep",
        ]
    };
    assert!(run(dir.path(), &args("a.csv")).status.success());
    assert!(run(dir.path(), &args("b.csv")).status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    // header plus 2 array sizes times 4 schemes
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn unknown_config_key_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[experiment]\nrealisations = 5\n").unwrap();
    let out = run(dir.path(), &["--config", "bad.toml", "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("realisations"));
}

#[test]
fn truncated_dataset_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_antenna(dir.path(), "ant.json");
    let text = std::fs::read_to_string(dir.path().join("ant.json")).unwrap();
    std::fs::write(dir.path().join("cut.json"), &text[..text.len() / 2]).unwrap();
    let out = run(dir.path(), &["--antenna", "cut.json", "decompose"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn silent_antenna_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_antenna(dir.path(), "ant.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ant.json")).unwrap()).unwrap();
    zero_numbers(doc.get_mut("e_oc").unwrap());
    std::fs::write(dir.path().join("silent.json"), serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(dir.path(), &["--antenna", "silent.json", "decompose"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["selftest"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn optimize_prints_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_antenna(dir.path(), "ant.json");
    let out = run(dir.path(), &["--antenna", "ant.json", "--tx", "2", "--rx", "2", "optimize"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("iteration,dc_power_w"));
    assert!(text.contains("tx[1] coder"));
    assert!(text.contains("beamformer ["));
}
