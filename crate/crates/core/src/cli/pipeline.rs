//! End-to-end run: data, GNN, explainer, explanations, metrics.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use super::artifacts::{explanations_to_jsonl, write_staged, write_text, EXPLANATIONS_FILE};
use super::config::RunConfig;
use crate::datasets::{save_tu_dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::evaluation::{random_unit_explanations, threshold_sweep, timing_report, MetricsReport, Timing};
use crate::explainer::{
    save_explainer, train_explainer, Explainer, ExplainerKind, Explanation, Selection, EXPLAINER_FORMAT_VERSION,
};
use crate::gnn::{save_checkpoint, train_gnn, validation_indices, ModelCheckpoint, MODEL_FORMAT_VERSION};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const REPORT_FILE: &str = "report.csv";
pub const TIMING_FILE: &str = "timing.csv";

/// What a finished pipeline produced.
#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub out: PathBuf,
    pub validation_accuracy: f64,
    pub report: MetricsReport,
    pub timing: Timing,
    pub baseline: Option<MetricsReport>,
    pub random: Option<MetricsReport>,
}

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    info!("stage {name}");
    f().map_err(|e| e.in_stage(name))
}

fn save_dataset(ds: &LabeledDataset, dir: &Path) -> Result<()> {
    write_staged(dir, |tmp| {
        if tmp.exists() {
            fs::remove_dir_all(tmp).map_err(|e| Error::io(tmp, e))?;
        }
        save_tu_dataset(ds, tmp)
    })
}

struct Explained {
    explainer: Explainer,
    explanations: Vec<Explanation>,
    seconds: Vec<f64>,
    training_seconds: f64,
}

fn train_and_explain(
    cfg: &RunConfig,
    ds: &LabeledDataset,
    ck: &ModelCheckpoint,
    kind: ExplainerKind,
    train: &[usize],
) -> Result<Explained> {
    let tr = train_explainer(ds, &ck.model, kind, train, &cfg.explainer_config())?;
    let all: Vec<usize> = (0..ds.instance_count()).collect();
    let out = tr.explainer.explain_instances(&ck.model, ds, &all, cfg.selection(kind))?;
    let (explanations, seconds) = out.into_iter().unzip();
    Ok(Explained {
        explainer: tr.explainer,
        explanations,
        seconds,
        training_seconds: tr.seconds,
    })
}

fn manifest(cfg: &RunConfig, artifacts: &[&str]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# motif-explain {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# model format {MODEL_FORMAT_VERSION}, explainer format {EXPLAINER_FORMAT_VERSION}");
    out.push_str(&cfg.to_text());
    let _ = writeln!(out, "# artifacts: {}", artifacts.join(" "));
    out
}

/// Runs every stage, writing artifacts under `cfg.out`. A failing stage
/// returns an [`Error::Stage`] and leaves its unfinished artifact with a
/// `.partial` suffix.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineSummary> {
    let out = cfg.out.clone();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e).in_stage("setup"))?;
    let mut artifacts = vec!["data", "model.ckpt", "explainer.ckpt", EXPLANATIONS_FILE, REPORT_FILE, TIMING_FILE];

    let ds = stage("data", || {
        let ds = cfg.load_dataset()?;
        save_dataset(&ds, &out.join("data"))?;
        Ok(ds)
    })?;
    info!("{}: {} instances, {} classes", ds.name, ds.instance_count(), ds.class_count());

    let tc = cfg.train_config();
    let ck = stage("gnn", || {
        let ck = train_gnn(&ds, &tc)?;
        let path = out.join("model.ckpt");
        write_staged(&path, |tmp| save_checkpoint(&ck, tmp))?;
        Ok(ck)
    })?;
    info!("validation accuracy {:.4}", ck.meta.validation_accuracy);
    let (train, _) = validation_indices(&ds, &tc).map_err(|e| e.in_stage("explainer"))?;

    let main = stage("explainer", || {
        let x = train_and_explain(cfg, &ds, &ck, cfg.explainer, &train)?;
        write_staged(&out.join("explainer.ckpt"), |tmp| save_explainer(&x.explainer, tmp))?;
        Ok(x)
    })?;

    stage("explain", || write_text(&out.join(EXPLANATIONS_FILE), &explanations_to_jsonl(&main.explanations)))?;

    let (report, timing) = stage("evaluate", || {
        let mut report = MetricsReport::build(&ds, &ck.model, &main.explanations)?;
        if cfg.explainer == ExplainerKind::Motif && !cfg.sweep.is_empty() {
            report.sweep = threshold_sweep(&ds, &ck.model, &main.explanations, &cfg.sweep)?;
        }
        let timing = timing_report(&main.seconds, main.training_seconds);
        write_text(&out.join(REPORT_FILE), &report.to_csv())?;
        write_text(&out.join(TIMING_FILE), &timing.to_csv())?;
        Ok((report, timing))
    })?;

    let (baseline, random) = if cfg.baseline {
        artifacts.extend(["explainer_edge.ckpt", "explanations_edge.jsonl", "report_edge.csv", "report_random.csv"]);
        let (b, r) = stage("baseline", || {
            let edge = if cfg.explainer == ExplainerKind::Edge {
                None
            } else {
                let x = train_and_explain(cfg, &ds, &ck, ExplainerKind::Edge, &train)?;
                write_staged(&out.join("explainer_edge.ckpt"), |tmp| save_explainer(&x.explainer, tmp))?;
                write_text(&out.join("explanations_edge.jsonl"), &explanations_to_jsonl(&x.explanations))?;
                let report = MetricsReport::build(&ds, &ck.model, &x.explanations)?;
                write_text(&out.join("report_edge.csv"), &report.to_csv())?;
                Some(report)
            };
            let random = random_unit_explanations(&main.explanations, report.sparsity, cfg.random_seed);
            let random_report = MetricsReport::build(&ds, &ck.model, &random)?;
            write_text(&out.join("report_random.csv"), &random_report.to_csv())?;
            Ok((edge, random_report))
        })?;
        (b, Some(r))
    } else {
        (None, None)
    };

    stage("manifest", || write_text(&out.join(MANIFEST_FILE), &manifest(cfg, &artifacts)))?;
    Ok(PipelineSummary {
        out,
        validation_accuracy: ck.meta.validation_accuracy,
        report,
        timing,
        baseline,
        random,
    })
}

/// Selection rule from optional CLI choices, defaulting by explainer kind.
pub fn choose_selection(
    explainer: &Explainer,
    sigma: Option<f64>,
    top_k: Option<usize>,
    sparsity: Option<f64>,
) -> Result<Selection> {
    match (sigma, top_k, sparsity) {
        (None, None, None) => Ok(explainer.default_selection()),
        (Some(s), None, None) if s > 0.0 => Ok(Selection::Threshold(s)),
        (Some(s), None, None) => Err(Error::input(format!("sigma must be positive, got {s}"))),
        (None, Some(k), None) => Ok(Selection::TopK(k)),
        (None, None, Some(s)) if (0.0..=1.0).contains(&s) => Ok(Selection::Sparsity(s)),
        (None, None, Some(s)) => Err(Error::input(format!("sparsity must lie in [0, 1], got {s}"))),
        _ => Err(Error::input("choose at most one of --sigma, --top-k and --sparsity")),
    }
}
