//! End-to-end checks of the binary: exit codes, the JSON error channel, and
//! the on-disk result layout.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
name = "tiny"
seeds = [1, 2]

[file]
size_bytes = 49152
chunk_bytes = 16384
block_bytes = 4096

[[class]]
name = "leech"
count = 2
disposition = 31
"#;

fn swarmsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON object")
}

#[test]
fn presets_list_prints_every_name() {
    let out = swarmsim(&["presets", "list"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = stdout.lines().collect();
    assert!(names.contains(&"desk-homog-default"));
    assert!(names.contains(&"heter-25-75"));
    assert_eq!(names.len(), 24);
}

#[test]
fn validate_accepts_presets_and_files() {
    assert!(swarmsim(&["validate", "desk-homog-tcp"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "tiny.toml", TINY);
    let out = swarmsim(&["validate", &cfg]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("ok: tiny"));
}

#[test]
fn unknown_config_key_exits_2_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "typo.toml", &format!("{TINY}\ntypo_key = 3\n"));
    let out = swarmsim(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "config");
}

#[test]
fn run_writes_the_per_seed_result_tree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "tiny.toml", TINY);
    let out_dir = dir.path().join("results");
    let out = swarmsim(&["run", &cfg, "--seed", "2", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run_dir = out_dir.join("tiny").join("2");
    assert!(run_dir.join("report.csv").is_file());
    assert!(run_dir.join("completion.csv").is_file());
    assert!(run_dir.join("queue_0.csv").is_file());
}

#[test]
fn partitioned_swarm_exits_3_with_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "stuck.toml",
        &TINY.replace("disposition = 31", "disposition = 0").replace("\"tiny\"", "\"stuck\""),
    );
    let out = swarmsim(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "run");
    assert!(err["message"].as_str().unwrap().contains("deadlock"));
}

#[test]
fn suite_writes_envelopes_and_the_regression() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cfg(dir.path(), "a.toml", &TINY.replace("\"tiny\"", "\"mixed\""));
    let b = write_cfg(
        dir.path(),
        "b.toml",
        &TINY.replace("disposition = 31", "disposition = 5").replace("\"tiny\"", "\"tcp\""),
    );
    let out_dir = dir.path().join("results");
    let out = swarmsim(&["suite", &a, &b, "--seeds", "1,2", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["mixed", "tcp"] {
        assert!(out_dir.join(name).join("envelope_completion.csv").is_file());
        for seed in ["1", "2"] {
            assert!(out_dir.join(name).join(seed).join("report.csv").is_file());
        }
    }
    assert!(out_dir.join("regression.csv").is_file());
}
