//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::datasets::{
    generate_ba_2motif_with, generate_ba_shapes_with, load_tu_dataset, Ba2MotifConfig, BaShapesConfig, LabeledDataset,
    NodeFeatures,
};
use crate::error::{Error, Result};
use crate::explainer::{ExplainerConfig, ExplainerKind, LossTarget, Selection, DEFAULT_TOP_K};
use crate::gnn::{TrainConfig, CONV_LAYERS};
use crate::motifs::DEFAULT_MIN_SUPPORT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Ba2Motif,
    BaShapes,
    /// A TU directory given by `data_path`.
    Tu,
}

impl DatasetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetKind::Ba2Motif => "ba-2motif",
            DatasetKind::BaShapes => "ba-shapes",
            DatasetKind::Tu => "tu",
        }
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ba-2motif" => Ok(DatasetKind::Ba2Motif),
            "ba-shapes" => Ok(DatasetKind::BaShapes),
            "tu" => Ok(DatasetKind::Tu),
            other => Err(Error::input(format!("unknown dataset `{other}` (ba-2motif, ba-shapes, tu)"))),
        }
    }
}

impl FromStr for ExplainerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "motif" => Ok(ExplainerKind::Motif),
            "edge" => Ok(ExplainerKind::Edge),
            other => Err(Error::input(format!("unknown explainer `{other}` (motif, edge)"))),
        }
    }
}

/// Everything a pipeline run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetKind,
    pub data_path: Option<PathBuf>,
    pub data_seed: u64,
    /// Graph count for BA-2Motif.
    pub count: usize,
    pub features: NodeFeatures,
    /// `None` picks the dataset default: 170 for TU data, 300 otherwise.
    pub gnn_epochs: Option<usize>,
    pub gnn_lr: f64,
    pub gnn_seed: u64,
    pub train_fraction: f64,
    pub explainer: ExplainerKind,
    pub explainer_epochs: usize,
    pub explainer_lr: f64,
    pub explainer_seed: u64,
    pub init_scale: f64,
    pub target: LossTarget,
    pub min_support: f64,
    pub hops: usize,
    pub sigma: f64,
    pub top_k: usize,
    pub sweep: Vec<f64>,
    /// Also train the edge baseline and a sparsity-matched random baseline.
    pub baseline: bool,
    pub random_seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ec = ExplainerConfig::default();
        RunConfig {
            dataset: DatasetKind::Ba2Motif,
            data_path: None,
            data_seed: 0,
            count: Ba2MotifConfig::default().count,
            features: NodeFeatures::Degree,
            gnn_epochs: None,
            gnn_lr: TrainConfig::default().learning_rate,
            gnn_seed: 0,
            train_fraction: TrainConfig::default().train_fraction,
            explainer: ExplainerKind::Motif,
            explainer_epochs: ec.epochs,
            explainer_lr: ec.learning_rate,
            explainer_seed: ec.seed,
            init_scale: ec.init_scale,
            target: ec.target,
            min_support: DEFAULT_MIN_SUPPORT,
            hops: CONV_LAYERS,
            sigma: 1.0,
            top_k: DEFAULT_TOP_K,
            sweep: Vec::new(),
            baseline: false,
            random_seed: 0,
            out: PathBuf::from("run"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::input(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::input(format!("bad value `{value}` for `{key}`"))),
    }
}

/// Comma-separated reals; empty means none.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse(key, v))
        .collect()
}

fn format_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "dataset" => self.dataset = value.parse()?,
            "data_path" => self.data_path = (!value.is_empty()).then(|| PathBuf::from(value)),
            "data_seed" => self.data_seed = parse(key, value)?,
            "count" => self.count = parse(key, value)?,
            "features" => self.features = value.parse()?,
            "gnn_epochs" => self.gnn_epochs = if value.is_empty() { None } else { Some(parse(key, value)?) },
            "gnn_lr" => self.gnn_lr = parse(key, value)?,
            "gnn_seed" => self.gnn_seed = parse(key, value)?,
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "explainer" => self.explainer = value.parse()?,
            "explainer_epochs" => self.explainer_epochs = parse(key, value)?,
            "explainer_lr" => self.explainer_lr = parse(key, value)?,
            "explainer_seed" => self.explainer_seed = parse(key, value)?,
            "init_scale" => self.init_scale = parse(key, value)?,
            "target" => self.target = value.parse()?,
            "min_support" => self.min_support = parse(key, value)?,
            "hops" => self.hops = parse(key, value)?,
            "sigma" => self.sigma = parse(key, value)?,
            "top_k" => self.top_k = parse(key, value)?,
            "sweep" => self.sweep = parse_list(key, value)?,
            "baseline" => self.baseline = parse_bool(key, value)?,
            "random_seed" => self.random_seed = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(Error::input(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. `#` starts a comment.
    pub fn apply_text(&mut self, path: &Path, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Load {
                file: path.to_path_buf(),
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key.trim(), value).map_err(|e| Error::Load {
                file: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(path, &text)?;
        Ok(cfg)
    }

    /// Every key in canonical order, with resolved defaults.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let _ = writeln!(out, "dataset = {}", self.dataset.as_str());
        let _ = writeln!(out, "data_path = {}", path(&self.data_path));
        let _ = writeln!(out, "data_seed = {}", self.data_seed);
        let _ = writeln!(out, "count = {}", self.count);
        let _ = writeln!(out, "features = {}", self.features.as_str());
        let _ = writeln!(out, "gnn_epochs = {}", self.resolved_gnn_epochs());
        let _ = writeln!(out, "gnn_lr = {:?}", self.gnn_lr);
        let _ = writeln!(out, "gnn_seed = {}", self.gnn_seed);
        let _ = writeln!(out, "train_fraction = {:?}", self.train_fraction);
        let _ = writeln!(out, "explainer = {}", self.explainer.as_str());
        let _ = writeln!(out, "explainer_epochs = {}", self.explainer_epochs);
        let _ = writeln!(out, "explainer_lr = {:?}", self.explainer_lr);
        let _ = writeln!(out, "explainer_seed = {}", self.explainer_seed);
        let _ = writeln!(out, "init_scale = {:?}", self.init_scale);
        let _ = writeln!(out, "target = {}", self.target.as_str());
        let _ = writeln!(out, "min_support = {:?}", self.min_support);
        let _ = writeln!(out, "hops = {}", self.hops);
        let _ = writeln!(out, "sigma = {:?}", self.sigma);
        let _ = writeln!(out, "top_k = {}", self.top_k);
        let _ = writeln!(out, "sweep = {}", format_list(&self.sweep));
        let _ = writeln!(out, "baseline = {}", self.baseline);
        let _ = writeln!(out, "random_seed = {}", self.random_seed);
        let _ = writeln!(out, "out = {}", self.out.display());
        out
    }

    pub fn resolved_gnn_epochs(&self) -> usize {
        self.gnn_epochs.unwrap_or(match self.dataset {
            DatasetKind::Tu => 170,
            DatasetKind::Ba2Motif | DatasetKind::BaShapes => 300,
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.resolved_gnn_epochs(),
            learning_rate: self.gnn_lr,
            seed: self.gnn_seed,
            train_fraction: self.train_fraction,
        }
    }

    pub fn explainer_config(&self) -> ExplainerConfig {
        ExplainerConfig {
            epochs: self.explainer_epochs,
            learning_rate: self.explainer_lr,
            seed: self.explainer_seed,
            init_scale: self.init_scale,
            target: self.target,
            min_support: self.min_support,
            hops: self.hops,
        }
    }

    pub fn selection(&self, kind: ExplainerKind) -> Selection {
        match kind {
            ExplainerKind::Motif => Selection::Threshold(self.sigma),
            ExplainerKind::Edge => Selection::TopK(self.top_k),
        }
    }

    pub fn load_dataset(&self) -> Result<LabeledDataset> {
        match self.dataset {
            DatasetKind::Ba2Motif => generate_ba_2motif_with(
                &Ba2MotifConfig {
                    count: self.count,
                    features: self.features,
                    ..Ba2MotifConfig::default()
                },
                self.data_seed,
            ),
            DatasetKind::BaShapes => generate_ba_shapes_with(
                &BaShapesConfig {
                    features: self.features,
                    ..BaShapesConfig::default()
                },
                self.data_seed,
            ),
            DatasetKind::Tu => {
                let path = self
                    .data_path
                    .as_ref()
                    .ok_or_else(|| Error::input("dataset `tu` needs `data_path`"))?;
                load_tu_dataset(path)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("sweep", "1.0, 1.5,2").unwrap();
        cfg.set("dataset", "ba-shapes").unwrap();
        cfg.set("baseline", "yes").unwrap();
        let text = cfg.to_text();
        let mut back = RunConfig::default();
        back.apply_text(Path::new("x"), &text).unwrap();
        assert_eq!(back.sweep, vec![1.0, 1.5, 2.0]);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(Path::new("x"), "# header\n\nsigma = 1.5 # tail\n").unwrap();
        assert_eq!(cfg.sigma, 1.5);
    }

    #[test]
    fn bad_lines_report_their_position() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text(Path::new("run.cfg"), "sigma = 1\nnonsense\n").unwrap_err();
        assert!(matches!(err, Error::Load { line: 2, .. }), "{err}");
        let err = cfg.apply_text(Path::new("run.cfg"), "colour = red\n").unwrap_err();
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn epochs_default_by_dataset() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.resolved_gnn_epochs(), 300);
        cfg.dataset = DatasetKind::Tu;
        assert_eq!(cfg.resolved_gnn_epochs(), 170);
        cfg.gnn_epochs = Some(5);
        assert_eq!(cfg.resolved_gnn_epochs(), 5);
    }
}
