//! Motif embeddings through the frozen feature extractor, bilinear attention
//! over them, and the edge-level attention baseline.

mod attention;
mod checkpoint;
mod embedding;
mod explanation;
mod instance;
mod train;

use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{LabeledDataset, TaskKind};
use crate::error::{Error, Result};
use crate::gnn::GcnModel;
use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::motifs::MotifDictionary;

pub use attention::{
    attention_forward, attention_gradient_check, attention_loss, attention_loss_and_gradient, AttentionOutput,
    AttentionParams,
};
pub use checkpoint::{load_explainer, save_explainer, EXPLAINER_FORMAT_VERSION};
pub use embedding::{motif_embedding_graph, motif_embedding_node};
pub use explanation::{
    rank_units, select_by_threshold, select_top_k, select_within_budget, Explanation, Prediction, ScoredMotif,
    Selection, Target,
};
pub(crate) use explanation::edge_budget;
pub use train::{train_explainer, ExplainerConfig, ExplainerTraining, LossTarget};

use instance::{instance_ref, prepare, prepare_all, raw_units, raw_units_for, InstanceRef, Prepared};

/// Default `K` of the edge baseline.
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExplainerKind {
    /// Units are motifs (merged cycles and single edges).
    Motif,
    /// Units are edges embedded as the mean of their endpoints.
    Edge,
}

impl ExplainerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExplainerKind::Motif => "motif",
            ExplainerKind::Edge => "edge",
        }
    }
}

/// A trained attention explainer.
#[derive(Debug, Clone, PartialEq)]
pub struct Explainer {
    pub kind: ExplainerKind,
    pub task: TaskKind,
    /// Radius of node computational graphs.
    pub hops: usize,
    pub params: AttentionParams,
    /// Frequency dictionary of the motif explainer.
    pub dictionary: Option<MotifDictionary>,
}

impl Explainer {
    pub fn default_selection(&self) -> Selection {
        match self.kind {
            ExplainerKind::Motif => Selection::Threshold(1.0),
            ExplainerKind::Edge => Selection::TopK(DEFAULT_TOP_K),
        }
    }

    fn check(&self, model: &GcnModel) -> Result<()> {
        if model.task != self.task {
            return Err(Error::input(format!(
                "explainer is for {} tasks, model for {}",
                self.task.as_str(),
                model.task.as_str()
            )));
        }
        if model.embedding_dim() != self.params.dim() {
            return Err(Error::input(format!(
                "explainer width {} does not match model embedding width {}",
                self.params.dim(),
                model.embedding_dim()
            )));
        }
        Ok(())
    }

    fn finish(&self, model: &GcnModel, p: &Prepared, selection: Selection) -> Result<Explanation> {
        let target = match p.at.node {
            Some(node) => Target::Node { graph: p.at.graph, node },
            None => Target::Graph { graph: p.at.graph },
        };
        if p.units.is_empty() {
            return Err(Error::Explanation {
                target: target.to_string(),
                message: "no motifs in the computational graph".into(),
            });
        }
        let out = attention_forward(&p.query, &p.embeddings, &self.params)?;
        let new = model.classify(&out.combined);
        let explanation = Explanation {
            target,
            explainer: self.kind,
            selection,
            motifs: p
                .units
                .iter()
                .zip(&out.alphas)
                .map(|(m, &alpha)| ScoredMotif {
                    motif: m.clone(),
                    alpha,
                    selected: false,
                })
                .collect(),
            explanation_edges: Vec::new(),
            computational_edges: p.computational_edges.clone(),
            original: Prediction::from(&p.original),
            new: Prediction::from(&new),
        };
        Ok(explanation.reselect(selection))
    }

    fn explain_at(&self, model: &GcnModel, g: &Graph, at: InstanceRef, selection: Selection) -> Result<Explanation> {
        self.check(model)?;
        let raw = raw_units(g, at.node, self.hops)?;
        let p = prepare(model, self.kind, self.dictionary.as_ref(), g, at, raw, None)?;
        self.finish(model, &p, selection)
    }

    /// Explains every listed instance in parallel. Instances without units
    /// are skipped with a warning. Output order follows `instances`; each
    /// entry carries the seconds spent on it.
    pub fn explain_instances(
        &self,
        model: &GcnModel,
        ds: &LabeledDataset,
        instances: &[usize],
        selection: Selection,
    ) -> Result<Vec<(Explanation, f64)>> {
        self.check(model)?;
        if model.task != ds.task {
            return Err(Error::input("dataset task does not match the model"));
        }
        if let Some(&bad) = instances.iter().find(|&&i| i >= ds.instance_count()) {
            return Err(Error::input(format!("instance {bad} out of range")));
        }
        let start = Instant::now();
        let raws = raw_units_for(ds, instances, self.hops)?;
        let prepared = prepare_all(model, self.kind, self.dictionary.as_ref(), ds, instances, raws)?;
        let shared = start.elapsed().as_secs_f64() / instances.len().max(1) as f64;
        let results: Vec<Result<(Explanation, f64)>> = prepared
            .par_iter()
            .map(|p| {
                let t = Instant::now();
                let e = self.finish(model, p, selection)?;
                Ok((e, shared + t.elapsed().as_secs_f64()))
            })
            .collect();
        let mut out = Vec::with_capacity(results.len());
        for r in results {
            match r {
                Ok(x) => out.push(x),
                Err(Error::Explanation { target, message }) => warn!("skipping {target}: {message}"),
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// [`Explainer::explain_instances`] over the whole dataset, without timings.
    pub fn explain_dataset(&self, model: &GcnModel, ds: &LabeledDataset, selection: Selection) -> Result<Vec<Explanation>> {
        let all: Vec<usize> = (0..ds.instance_count()).collect();
        Ok(self.explain_instances(model, ds, &all, selection)?.into_iter().map(|(e, _)| e).collect())
    }

    /// Query embedding and unit embeddings (rows) of instance `i`.
    pub fn unit_embeddings(&self, model: &GcnModel, ds: &LabeledDataset, i: usize) -> Result<(Vec<f64>, Matrix)> {
        let at = instance_ref(ds, i);
        let g = &ds.graphs[at.graph];
        let p = prepare(model, self.kind, self.dictionary.as_ref(), g, at, raw_units(g, at.node, self.hops)?, None)?;
        Ok((p.query, p.embeddings))
    }
}

/// Motif explanation of a graph-classification instance.
pub fn explain_graph(g: &Graph, model: &GcnModel, explainer: &Explainer, sigma: f64) -> Result<Explanation> {
    check_sigma(sigma)?;
    if explainer.task != TaskKind::Graph {
        return Err(Error::input("explain_graph needs a graph-task explainer"));
    }
    explainer.explain_at(model, g, InstanceRef { graph: 0, node: None }, Selection::Threshold(sigma))
}

/// Motif explanation of node `v`, using the explainer's `hops`-hop
/// computational graph.
pub fn explain_node(g: &Graph, v: usize, model: &GcnModel, explainer: &Explainer, sigma: f64) -> Result<Explanation> {
    check_sigma(sigma)?;
    if explainer.task != TaskKind::Node {
        return Err(Error::input("explain_node needs a node-task explainer"));
    }
    explainer.explain_at(model, g, InstanceRef { graph: 0, node: Some(v) }, Selection::Threshold(sigma))
}

/// Edge-attention baseline: the `k` highest-weight edges of the instance.
pub fn explain_graph_edges_baseline(
    g: &Graph,
    node: Option<usize>,
    model: &GcnModel,
    explainer: &Explainer,
    k: usize,
) -> Result<Explanation> {
    if explainer.kind != ExplainerKind::Edge {
        return Err(Error::input("the edge baseline needs an edge explainer"));
    }
    explainer.explain_at(model, g, InstanceRef { graph: 0, node }, Selection::TopK(k))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::input(format!("sigma must be positive, got {sigma}")))
    }
}
