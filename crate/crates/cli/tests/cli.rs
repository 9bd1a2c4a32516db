use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn tower(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../towers").join(name)
}

fn aswt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aswt")).args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn constants_of_the_cubic_tower() {
    let t = tower("cubic.json");
    let out = aswt(&["constants", "--tower", t.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["D"], 3);
    assert_eq!(v["m_tilde"], 1);
    assert_eq!(v["delta"], "3/1");
    assert_eq!(v["delta1"], 3);
    assert_eq!(v["m0"], 1);
}

#[test]
fn lfunction_at_level_one() {
    let t = tower("cubic.json");
    let out = aswt(&["lfunction", "-m", "1", "--tower", t.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let lvl = &v["levels"][0];
    assert_eq!(lvl["l"]["coeffs"], serde_json::json!(["1", "0", "2"]));
    assert_eq!(lvl["slopes"], serde_json::json!(["1/2", "1/2"]));
    let csv = aswt(&["lfunction", "-m", "1", "--format", "csv", "--tower", t.to_str().unwrap()]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap(), "m,num,den\n1,1,2\n1,1,2\n");
}

#[test]
fn toml_tower_and_stability_verdict() {
    let t = tower("two_row.toml");
    let out = aswt(&["verify-stability", "--m-max", "3", "--tower", t.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["passed"], true);
    let t = tower("cubic.json");
    let out = aswt(&["verify-stability", "--m-max", "3", "--tower", t.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["verdict"]["levels"].as_array().unwrap().len(), 3);
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = std::env::temp_dir().join(format!("aswt-cli-{}", std::process::id()));
    let t = tower("cubic.json");
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out = Command::new(env!("CARGO_BIN_EXE_aswt"))
            .env("ASWT_THREADS", threads)
            .args(["dwork", "--tower", t.to_str().unwrap(), "--out", dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read(dir.join("dwork.json")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn empty_level_range_gives_a_skeleton() {
    let t = tower("cubic.json");
    let out = aswt(&["polygon", "--m-max", "0", "--tower", t.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["levels"], serde_json::json!([]));
}

#[test]
fn errors_are_structured() {
    let dir = std::env::temp_dir();
    let bad = dir.join(format!("aswt-bad-{}.json", std::process::id()));
    std::fs::write(&bad, r#"{"p": 2, "a": 1, "rows": [{"i": 0, "coeffs": [0, 0, 0, 0]}]}"#).unwrap();
    let out = aswt(&["constants", "--tower", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json_of(&out)["error"]["kind"].is_string());
    std::fs::remove_file(&bad).ok();

    let t = tower("cubic.json");
    let out = aswt(&["dwork", "--B", "5", "--tower", t.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "truncation_too_small");
}
