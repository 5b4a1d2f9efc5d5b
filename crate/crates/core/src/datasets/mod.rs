//! Labeled graph datasets: synthetic generators with explanation ground
//! truth, the TU plain-text format, and stratified splitting.

mod split;
mod synthetic;
mod tu;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

pub use split::{split_dataset, stratified_split};
pub use synthetic::{
    ba_edges, generate_ba, generate_ba_2motif, generate_ba_2motif_with, generate_ba_shapes, generate_ba_shapes_with,
    house_edges, Ba2MotifConfig, BaShapesConfig, NodeFeatures, DEFAULT_FEATURE_WIDTH,
};
pub use tu::{load_tu_dataset, save_tu_dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    /// One label per graph, mean readout.
    Graph,
    /// One label per node of a single graph, no readout.
    Node,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Graph => "graph",
            TaskKind::Node => "node",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" => Ok(TaskKind::Graph),
            "node" => Ok(TaskKind::Node),
            other => Err(Error::input(format!("unknown task kind `{other}`"))),
        }
    }
}

/// A set of graphs with labels for one task.
///
/// For graph classification every graph carries `graph_label`; for node
/// classification there is exactly one graph whose `node_labels` cover all
/// nodes. `ground_truth`, when present, is indexed by instance: per graph for
/// graph tasks and per node for node tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub task: TaskKind,
    pub graphs: Vec<Graph>,
    pub ground_truth: Option<Vec<Vec<Edge>>>,
    /// Display names for categorical node labels (atom symbols for molecules).
    pub label_names: Option<BTreeMap<usize, String>>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, task: TaskKind, graphs: Vec<Graph>) -> Result<Self> {
        let ds = LabeledDataset {
            name: name.into(),
            task,
            graphs,
            ground_truth: None,
            label_names: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_ground_truth(mut self, gt: Vec<Vec<Edge>>) -> Result<Self> {
        self.ground_truth = Some(gt);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        match self.task {
            TaskKind::Graph => {
                if let Some(i) = self.graphs.iter().position(|g| g.graph_label.is_none()) {
                    return Err(Error::input(format!("graph {i} has no graph label")));
                }
            }
            TaskKind::Node => {
                if self.graphs.len() != 1 {
                    return Err(Error::input(format!(
                        "node classification needs exactly one graph, got {}",
                        self.graphs.len()
                    )));
                }
                let g = &self.graphs[0];
                match &g.node_labels {
                    Some(l) if l.len() == g.node_count() => {}
                    _ => return Err(Error::input("node classification graph lacks labels on every node")),
                }
            }
        }
        if let Some(gt) = &self.ground_truth {
            if gt.len() != self.instance_count() {
                return Err(Error::input(format!(
                    "ground truth covers {} instances, dataset has {}",
                    gt.len(),
                    self.instance_count()
                )));
            }
            for (i, edges) in gt.iter().enumerate() {
                let g = self.graph_of(i);
                if let Some(e) = edges.iter().find(|e| !g.contains_edge(e)) {
                    return Err(Error::input(format!("ground-truth edge {e} of instance {i} is not a graph edge")));
                }
            }
        }
        Ok(())
    }

    /// Number of explainable instances: graphs, or nodes of the single graph.
    pub fn instance_count(&self) -> usize {
        match self.task {
            TaskKind::Graph => self.graphs.len(),
            TaskKind::Node => self.graphs.first().map_or(0, Graph::node_count),
        }
    }

    /// Graph owning instance `i`.
    pub fn graph_of(&self, i: usize) -> &Graph {
        match self.task {
            TaskKind::Graph => &self.graphs[i],
            TaskKind::Node => &self.graphs[0],
        }
    }

    /// Class label of instance `i`.
    pub fn label_of(&self, i: usize) -> usize {
        match self.task {
            TaskKind::Graph => self.graphs[i].graph_label.expect("validated"),
            TaskKind::Node => self.graphs[0].node_labels.as_ref().expect("validated")[i],
        }
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.instance_count()).map(|i| self.label_of(i)).collect()
    }

    pub fn class_count(&self) -> usize {
        self.labels().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn feature_width(&self) -> usize {
        self.graphs.first().map_or(0, Graph::feature_width)
    }

    /// Graph-task subset by graph index (ground truth follows).
    pub fn subset(&self, indices: &[usize]) -> Result<LabeledDataset> {
        if self.task != TaskKind::Graph {
            return Err(Error::input("subsets are defined for graph classification datasets"));
        }
        Ok(LabeledDataset {
            name: self.name.clone(),
            task: self.task,
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            ground_truth: self
                .ground_truth
                .as_ref()
                .map(|gt| indices.iter().map(|&i| gt[i].clone()).collect()),
            label_names: self.label_names.clone(),
        })
    }
}
