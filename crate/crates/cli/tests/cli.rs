//! The `ogn` binary end to end: cost table, train, evaluate, report.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::tempdir;

fn ogn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ogn")).args(args).output().expect("spawn ogn")
}

fn ok(args: &[&str]) -> String {
    let out = ogn(args);
    assert!(out.status.success(), "ogn {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn cost_json_matches_vanilla_rows() {
    for (alg, learn, eval) in [("dqn", 11648, 5824), ("sac", 357888, 143616), ("td3", 773200, 257500)] {
        let v: serde_json::Value = serde_json::from_str(&ok(&["cost", "--preset", "paper", "--algorithm", alg, "--json"])).unwrap();
        assert_eq!(v["learning"]["flops"], learn, "{alg}");
        assert_eq!(v["evaluation"]["flops"], eval, "{alg}");
    }
}

#[test]
fn train_eval_report_pipeline() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let smoke = config("smoke.toml");
    ok(&["train", "--config", smoke.to_str().unwrap(), "--out", out]);

    let ckpt = dir.path().join("dqn/seed_0/chunk_001.ckpt");
    assert!(ckpt.is_file(), "missing {}", ckpt.display());
    let line = ok(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--trials-per-target", "1"]);
    assert!(line.contains("24 trials"), "{line}");
    assert!(dir.path().join("dqn/seed_0/eval_chunk_001/trials.jsonl").is_file());

    let oracle_dir = dir.path().join("oracle");
    let line = ok(&[
        "eval",
        "--policy",
        "oracle",
        "--trials-per-target",
        "1",
        "--out",
        oracle_dir.to_str().unwrap(),
    ]);
    assert!(line.contains("success rate 1.000"), "{line}");

    let report = dir.path().join("report");
    let table = ok(&["report", out, "--out", report.to_str().unwrap(), "--resamples", "200"]);
    assert!(table.contains("oracle") && table.contains("dqn"), "{table}");
    for f in ["report.json", "summary.csv", "profile.csv", "poi.csv"] {
        assert!(report.join(f).is_file(), "missing {f}");
    }
}

#[test]
fn bad_invocations_fail() {
    assert!(!ogn(&["eval"]).status.success());
    let dir = tempdir().unwrap();
    assert!(!ogn(&["report", dir.path().to_str().unwrap()]).status.success());
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "algorithm = \"ppo\"\n").unwrap();
    assert!(!ogn(&["cost", "--config", bad.to_str().unwrap()]).status.success());
}
