//! End-to-end runs of the `qbank` binary.

mod common;

use std::process::{Command, Output};

use common::fixture;
use serde_json::Value;

fn qbank(data_dir: &std::path::Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_qbank")).arg("--data-dir").arg(data_dir).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn ingest_then_query() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bank");
    let csv = fixture("supplement_b_en_pa.csv");
    qbank(&data, &["ingest", csv.to_str().unwrap(), "--provider", "test:32"]);
    let seed = common::B1_SEED;
    let out = qbank(&data, &["query", "--text", seed, "--k", "3", "--provider", "test:32"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["matches"].as_array().unwrap().len(), 3);
    assert_eq!(v["matches"][0]["text"], seed);
    assert_eq!(v["matches"][0]["rank"], 1);
}

#[test]
fn vocab_embed_calibrate_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let csv = fixture("supplement_b_all.csv");
    let csv = csv.to_str().unwrap();
    let vocab = d.join("vocab.txt");
    qbank(d, &["build-vocab", "--dataset", csv, "--out", vocab.to_str().unwrap()]);
    assert!(std::fs::read_to_string(&vocab).unwrap().lines().count() > 10);

    let store = d.join("e.emb1");
    qbank(d, &["embed", "--provider", "test:16", "--dataset", csv, "--out", store.to_str().unwrap()]);
    let questions = common::load("supplement_b_all.csv").questions().len();
    assert_eq!(qbank::providers::load_embeddings(&store).unwrap().len(), questions);

    let profile = d.join("profile.json");
    let out = qbank(d, &["calibrate", "--objective", "max-f1", "--dataset", csv, "--provider", "bow", "--out", profile.to_str().unwrap()]);
    let cal: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cal["selected"], "MAX_F1");
    assert_eq!(cal["max_f1"]["objective"], "MAX_F1");
    assert!(profile.exists());

    let report = d.join("report.csv");
    let spec = format!("store:{}", store.display());
    qbank(d, &["evaluate", "--dataset", csv, "--provider", &spec, "--profile", profile.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(d.join("report_curves.csv").exists());
}

#[test]
fn errors_exit_nonzero_with_a_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qbank"))
        .args(["--data-dir", dir.path().to_str().unwrap(), "query", "--text", "x", "--k", "-2", "--provider", "test:8"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("BAD_K"));
}
