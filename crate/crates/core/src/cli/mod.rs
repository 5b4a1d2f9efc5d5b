//! Command-line front end.

mod artifacts;
mod config;
mod pipeline;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::datasets::{
    generate_ba_2motif_with, generate_ba_shapes_with, load_tu_dataset, save_tu_dataset, Ba2MotifConfig,
    BaShapesConfig, LabeledDataset, NodeFeatures, TaskKind,
};
use crate::error::{Error, Result};
use crate::evaluation::{threshold_sweep, timing_report, MetricsReport};
use crate::explainer::{
    load_explainer, save_explainer, train_explainer, ExplainerConfig, ExplainerKind, LossTarget,
};
use crate::gnn::{load_checkpoint, save_checkpoint, train_gnn, validation_indices, TrainConfig, CONV_LAYERS};
use crate::motifs::{build_motif_dictionary, motif_key, unit_motifs, Motif, DEFAULT_MIN_SUPPORT};

pub use artifacts::{
    dot_file_name, explanations_to_jsonl, export_dot, partial_path, read_explanations, render_dot, write_staged,
    write_text, EXPLANATIONS_FILE,
};
pub use config::{parse_list, DatasetKind, RunConfig};
pub use pipeline::{choose_selection, run_pipeline, PipelineSummary, MANIFEST_FILE, REPORT_FILE, TIMING_FILE};

/// Crate version with the on-disk format versions it reads and writes.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (model format 1, explainer format 1)");

#[derive(Debug, Parser)]
#[command(name = "motif-explain", version = VERSION, about = "Motif-based explanations for GCN classifiers")]
pub struct Cli {
    /// Worker threads for per-instance work; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as a TU directory.
    GenData(GenDataArgs),
    /// Train the GCN classifier.
    TrainGnn(TrainGnnArgs),
    /// Extract motifs and their frequency dictionary.
    ExtractMotifs(ExtractMotifsArgs),
    /// Train the attention explainer against a frozen model.
    TrainExplainer(TrainExplainerArgs),
    /// Explain every instance of a dataset.
    Explain(ExplainArgs),
    /// Score explanations: fidelity, sparsity, ground-truth agreement.
    Evaluate(EvaluateArgs),
    /// Render explanations as DOT files.
    ExportDot(ExportDotArgs),
    /// Run every stage from a config file and flags.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// ba-2motif or ba-shapes.
    #[arg(long, visible_alias = "dataset")]
    pub kind: DatasetKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Graph count (ba-2motif only).
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// degree or constant.
    #[arg(long, default_value = "degree")]
    pub features: NodeFeatures,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainGnnArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Expected task; inferred from the data when omitted.
    #[arg(long)]
    pub task: Option<TaskKind>,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractMotifsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT)]
    pub min_support: f64,
    /// Radius of node computational graphs.
    #[arg(long, default_value_t = CONV_LAYERS)]
    pub hops: usize,
    /// Output directory for `dictionary.tsv` and `motifs.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainExplainerArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// motif or edge.
    #[arg(long, default_value = "motif")]
    pub kind: ExplainerKind,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub init_scale: f64,
    /// label or prediction.
    #[arg(long, default_value = "label")]
    pub target: LossTarget,
    #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT)]
    pub min_support: f64,
    #[arg(long, default_value_t = CONV_LAYERS)]
    pub hops: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub explainer: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Threshold multiplier: units with weight above sigma / t are selected.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Select the k highest-weight units.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Select units greedily up to this sparsity.
    #[arg(long)]
    pub sparsity: Option<f64>,
    /// Output directory for `explanations.jsonl` and `timing.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// An explanations directory or `.jsonl` file.
    #[arg(long)]
    pub explanations: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated sigmas for a threshold sweep.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportDotArgs {
    /// An explanations directory or `.jsonl` file.
    #[arg(long)]
    pub explanations: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Only these instances (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub instances: Option<Vec<usize>>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Every flag mirrors a config key of the same name (dashes for
/// underscores) and overrides the file.
#[derive(Debug, Args, Default)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub data_path: Option<String>,
    #[arg(long)]
    pub data_seed: Option<String>,
    #[arg(long)]
    pub count: Option<String>,
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub gnn_epochs: Option<String>,
    #[arg(long)]
    pub gnn_lr: Option<String>,
    #[arg(long)]
    pub gnn_seed: Option<String>,
    #[arg(long)]
    pub train_fraction: Option<String>,
    #[arg(long)]
    pub explainer: Option<String>,
    #[arg(long)]
    pub explainer_epochs: Option<String>,
    #[arg(long)]
    pub explainer_lr: Option<String>,
    #[arg(long)]
    pub explainer_seed: Option<String>,
    #[arg(long)]
    pub init_scale: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub min_support: Option<String>,
    #[arg(long)]
    pub hops: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub top_k: Option<String>,
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub baseline: Option<String>,
    #[arg(long)]
    pub random_seed: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

impl PipelineArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let fields = [
            ("dataset", &self.dataset),
            ("data_path", &self.data_path),
            ("data_seed", &self.data_seed),
            ("count", &self.count),
            ("features", &self.features),
            ("gnn_epochs", &self.gnn_epochs),
            ("gnn_lr", &self.gnn_lr),
            ("gnn_seed", &self.gnn_seed),
            ("train_fraction", &self.train_fraction),
            ("explainer", &self.explainer),
            ("explainer_epochs", &self.explainer_epochs),
            ("explainer_lr", &self.explainer_lr),
            ("explainer_seed", &self.explainer_seed),
            ("init_scale", &self.init_scale),
            ("target", &self.target),
            ("min_support", &self.min_support),
            ("hops", &self.hops),
            ("sigma", &self.sigma),
            ("top_k", &self.top_k),
            ("sweep", &self.sweep),
            ("baseline", &self.baseline),
            ("random_seed", &self.random_seed),
            ("out", &self.out),
        ];
        fields.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }

    /// The config file (if any) with flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in self.overrides() {
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }
}

/// Runs `cli`, on a dedicated pool when `--jobs` is given.
pub fn run(cli: Cli) -> Result<()> {
    match cli.jobs {
        Some(0) => Err(Error::input("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::input(format!("cannot start {n} worker threads: {e}")))?;
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenData(a) => gen_data(a),
        Command::TrainGnn(a) => train_gnn_cmd(a),
        Command::ExtractMotifs(a) => extract_motifs_cmd(a),
        Command::TrainExplainer(a) => train_explainer_cmd(a),
        Command::Explain(a) => explain_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::ExportDot(a) => export_dot_cmd(a),
        Command::Pipeline(a) => {
            let cfg = a.resolve()?;
            let s = run_pipeline(&cfg)?;
            println!("validation accuracy {:.4}", s.validation_accuracy);
            print_summary("", &s.report);
            if let Some(b) = &s.baseline {
                print_summary("edge baseline ", b);
            }
            if let Some(r) = &s.random {
                print_summary("random baseline ", r);
            }
            println!("mean inference {:.6}s per instance", s.timing.mean_inference_seconds);
            println!("artifacts in {}", s.out.display());
            Ok(())
        }
    }
}

fn print_summary(prefix: &str, r: &MetricsReport) {
    println!("{prefix}fidelity {:.4} sparsity {:.4}", r.fidelity, r.sparsity);
    if let Some(b) = r.balanced_accuracy {
        println!("{prefix}balanced accuracy {b:.4} auc {}", r.auc.map_or("-".into(), |a| format!("{a:.4}")));
    }
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let ds = match a.kind {
        DatasetKind::Ba2Motif => generate_ba_2motif_with(
            &Ba2MotifConfig {
                count: a.count,
                features: a.features,
                ..Ba2MotifConfig::default()
            },
            a.seed,
        )?,
        DatasetKind::BaShapes => generate_ba_shapes_with(
            &BaShapesConfig {
                features: a.features,
                ..BaShapesConfig::default()
            },
            a.seed,
        )?,
        DatasetKind::Tu => return Err(Error::input("gen-data makes ba-2motif or ba-shapes")),
    };
    save_tu_dataset(&ds, &a.out)?;
    println!("wrote {} ({} instances) to {}", ds.name, ds.instance_count(), a.out.display());
    Ok(())
}

fn load_data(path: &PathBuf, task: Option<TaskKind>) -> Result<LabeledDataset> {
    let ds = load_tu_dataset(path)?;
    match task {
        Some(t) if t != ds.task => Err(Error::input(format!(
            "{} holds a {} task, not {}",
            path.display(),
            ds.task.as_str(),
            t.as_str()
        ))),
        _ => Ok(ds),
    }
}

fn train_gnn_cmd(a: TrainGnnArgs) -> Result<()> {
    let ds = load_data(&a.data, a.task)?;
    let ck = train_gnn(
        &ds,
        &TrainConfig {
            epochs: a.epochs,
            learning_rate: a.lr,
            seed: a.seed,
            train_fraction: a.train_fraction,
        },
    )?;
    write_staged(&a.out, |tmp| save_checkpoint(&ck, tmp))?;
    println!("validation accuracy {:.4}", ck.meta.validation_accuracy);
    Ok(())
}

#[derive(Serialize)]
struct MotifRecord<'a> {
    instance: usize,
    motifs: Vec<KeyedMotif<'a>>,
}

#[derive(Serialize)]
struct KeyedMotif<'a> {
    #[serde(flatten)]
    motif: &'a Motif,
    key: String,
    frequent: bool,
}

fn extract_motifs_cmd(a: ExtractMotifsArgs) -> Result<()> {
    let ds = load_tu_dataset(&a.data)?;
    let dictionary = build_motif_dictionary(&ds, a.min_support, a.hops)?;
    let units = unit_motifs(&ds, a.hops)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut lines = String::new();
    for (i, motifs) in units.iter().enumerate() {
        let labels = ds.graph_of(i).categorical_labels();
        let record = MotifRecord {
            instance: i,
            motifs: motifs
                .iter()
                .map(|m| {
                    let key = motif_key(m, &labels);
                    KeyedMotif {
                        motif: m,
                        frequent: dictionary.is_frequent(&key),
                        key: key.0,
                    }
                })
                .collect(),
        };
        lines.push_str(&serde_json::to_string(&record).expect("motifs serialize"));
        lines.push('\n');
    }
    write_text(&a.out.join("dictionary.tsv"), &dictionary.to_tsv())?;
    write_text(&a.out.join("motifs.jsonl"), &lines)?;
    println!("{} motif keys over {} units", dictionary.support.len(), dictionary.unit_count);
    Ok(())
}

fn train_explainer_cmd(a: TrainExplainerArgs) -> Result<()> {
    let ck = load_checkpoint(&a.model)?;
    let ds = load_data(&a.data, Some(ck.model.task))?;
    let split = TrainConfig {
        seed: ck.meta.seed,
        train_fraction: ck.meta.train_fraction,
        ..TrainConfig::default()
    };
    let (train, _) = validation_indices(&ds, &split)?;
    let tr = train_explainer(
        &ds,
        &ck.model,
        a.kind,
        &train,
        &ExplainerConfig {
            epochs: a.epochs,
            learning_rate: a.lr,
            seed: a.seed,
            init_scale: a.init_scale,
            target: a.target,
            min_support: a.min_support,
            hops: a.hops,
        },
    )?;
    write_staged(&a.out, |tmp| save_explainer(&tr.explainer, tmp))?;
    println!(
        "{} explainer trained on {} instances in {:.2}s, final loss {:.4}",
        a.kind.as_str(),
        train.len() - tr.skipped,
        tr.seconds,
        tr.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn explain_cmd(a: ExplainArgs) -> Result<()> {
    let ck = load_checkpoint(&a.model)?;
    let explainer = load_explainer(&a.explainer)?;
    let ds = load_data(&a.data, Some(ck.model.task))?;
    let selection = choose_selection(&explainer, a.sigma, a.top_k, a.sparsity)?;
    let all: Vec<usize> = (0..ds.instance_count()).collect();
    let out = explainer.explain_instances(&ck.model, &ds, &all, selection)?;
    let (explanations, seconds): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_text(&a.out.join(EXPLANATIONS_FILE), &explanations_to_jsonl(&explanations))?;
    let timing = timing_report(&seconds, 0.0);
    write_text(&a.out.join(TIMING_FILE), &timing.to_csv())?;
    info!("mean inference {:.6}s", timing.mean_inference_seconds);
    println!("explained {} of {} instances", explanations.len(), all.len());
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let ck = load_checkpoint(&a.model)?;
    let ds = load_data(&a.data, Some(ck.model.task))?;
    let explanations = read_explanations(&a.explanations)?;
    let mut report = MetricsReport::build(&ds, &ck.model, &explanations)?;
    if let Some(s) = &a.sweep {
        report.sweep = threshold_sweep(&ds, &ck.model, &explanations, &parse_list("sweep", s)?)?;
    }
    write_text(&a.out, &report.to_csv())?;
    print_summary("", &report);
    Ok(())
}

fn export_dot_cmd(a: ExportDotArgs) -> Result<()> {
    let ds = load_tu_dataset(&a.data)?;
    let explanations = read_explanations(&a.explanations)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut written = 0;
    for e in &explanations {
        if a.instances.as_ref().is_some_and(|keep| !keep.contains(&e.target.instance())) {
            continue;
        }
        export_dot(e, &ds, a.out.join(dot_file_name(e)))?;
        written += 1;
    }
    println!("wrote {written} DOT file(s) to {}", a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explainer::EXPLAINER_FORMAT_VERSION;
    use crate::gnn::MODEL_FORMAT_VERSION;
    use clap::CommandFactory;

    #[test]
    fn version_names_current_formats() {
        assert!(VERSION.contains(&format!("model format {MODEL_FORMAT_VERSION}")));
        assert!(VERSION.contains(&format!("explainer format {EXPLAINER_FORMAT_VERSION}")));
    }

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "sigma = 1.5\ngnn_seed = 4\n").unwrap();
        let args = PipelineArgs {
            config: Some(path),
            sigma: Some("2.0".into()),
            ..PipelineArgs::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.sigma, 2.0);
        assert_eq!(cfg.gnn_seed, 4);
    }
}
