use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use motif_explain::cli::{partial_path, write_staged, RunConfig};
use motif_explain::error::Error;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motif-explain"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = bin(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn small_pipeline(out: &Path, extra: &[&str]) -> Output {
    let out = out.to_str().unwrap();
    let mut args = vec![
        "pipeline", "--count", "24", "--gnn-epochs", "20", "--explainer-epochs", "2", "--sweep", "1,1.5,2", "--out", out,
    ];
    args.extend_from_slice(extra);
    ok(&args)
}

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    small_pipeline(dir.path(), &["--baseline", "true"]);
    for f in [
        "data", "model.ckpt", "explainer.ckpt", "explanations.jsonl", "report.csv", "timing.csv", "manifest.txt",
        "explainer_edge.ckpt", "explanations_edge.jsonl", "report_edge.csv", "report_random.csv",
    ] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".partial"))
        .collect();
    assert!(leftovers.is_empty());
    let lines = fs::read_to_string(dir.path().join("explanations.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 24);
}

#[test]
fn manifest_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_pipeline(a.path(), &[]);
    let manifest = a.path().join("manifest.txt");
    let cfg = RunConfig::from_file(&manifest).unwrap();
    assert_eq!(cfg.count, 24);
    ok(&["pipeline", "--config", manifest.to_str().unwrap(), "--out", b.path().to_str().unwrap()]);
    for f in ["report.csv", "explanations.jsonl"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&["--jobs", "1", "pipeline", "--count", "24", "--gnn-epochs", "20", "--explainer-epochs", "2", "--out", a.path().to_str().unwrap()]);
    ok(&["--jobs", "4", "pipeline", "--count", "24", "--gnn-epochs", "20", "--explainer-epochs", "2", "--out", b.path().to_str().unwrap()]);
    for f in ["model.ckpt", "explainer.ckpt", "report.csv", "explanations.jsonl"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    assert!(!bin(&["--jobs", "0", "pipeline", "--out", a.path().to_str().unwrap()]).status.success());
}

#[test]
fn failures_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let missing = dir.path().join("nowhere");
    let r = bin(&["pipeline", "--dataset", "tu", "--data-path", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("stage `data`"));
    assert!(!out.join("model.ckpt").exists());

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "count = 24\nno equals sign here\n").unwrap();
    let r = bin(&["pipeline", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(!r.status.success() && err.contains("bad.cfg:2"), "{err}");

    let r = bin(&["pipeline", "--count", "many", "--out", out.to_str().unwrap()]);
    assert!(!r.status.success());
}

#[test]
fn unfinished_artifacts_keep_partial_suffix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    let err = write_staged(&path, |tmp| {
        fs::write(tmp, b"half").unwrap();
        Err(Error::Evaluation("interrupted".into()))
    });
    assert!(err.is_err());
    assert!(!path.exists());
    assert_eq!(fs::read(partial_path(&path)).unwrap(), b"half");
    write_staged(&path, |tmp| fs::write(tmp, b"whole").map_err(|e| Error::Evaluation(e.to_string()))).unwrap();
    assert_eq!(fs::read(&path).unwrap(), b"whole");
    assert!(!partial_path(&path).exists());
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    ok(&["gen-data", "--kind", "ba-2motif", "--count", "24", "--seed", "2", "--out", &p("data")]);
    ok(&["train-gnn", "--data", &p("data"), "--epochs", "20", "--out", &p("model.ckpt")]);
    ok(&["extract-motifs", "--data", &p("data"), "--out", &p("motifs")]);
    assert!(dir.path().join("motifs/dictionary.tsv").exists());
    ok(&["train-explainer", "--model", &p("model.ckpt"), "--data", &p("data"), "--epochs", "2", "--out", &p("explainer.ckpt")]);
    ok(&["explain", "--model", &p("model.ckpt"), "--explainer", &p("explainer.ckpt"), "--data", &p("data"), "--top-k", "2", "--out", &p("expl")]);
    ok(&["evaluate", "--model", &p("model.ckpt"), "--explanations", &p("expl"), "--data", &p("data"), "--out", &p("report.csv")]);
    ok(&["export-dot", "--explanations", &p("expl"), "--data", &p("data"), "--instances", "0,1", "--out", &p("dot")]);
    assert_eq!(fs::read_dir(dir.path().join("dot")).unwrap().count(), 2);
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.starts_with("instance,"));
    let r = bin(&["explain", "--model", &p("model.ckpt"), "--explainer", &p("explainer.ckpt"), "--data", &p("data"), "--top-k", "2", "--sigma", "1", "--out", &p("x")]);
    assert!(!r.status.success());
    let v = ok(&["--version"]);
    assert!(String::from_utf8_lossy(&v.stdout).contains("model format"));
}
