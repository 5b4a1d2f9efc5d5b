use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ExplainerKind;
use crate::gnn::Classification;
use crate::graph::Edge;
use crate::matrix::argmax;
use crate::motifs::Motif;

/// The explained instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Node { graph: usize, node: usize },
    Graph { graph: usize },
}

impl Target {
    pub fn graph(&self) -> usize {
        match *self {
            Target::Node { graph, .. } | Target::Graph { graph } => graph,
        }
    }

    pub fn node(&self) -> Option<usize> {
        match *self {
            Target::Node { node, .. } => Some(node),
            Target::Graph { .. } => None,
        }
    }

    /// Dataset instance index: the graph for graph tasks, the node otherwise.
    pub fn instance(&self) -> usize {
        self.node().unwrap_or(self.graph())
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::Node { graph, node } => write!(f, "graph {graph} node {node}"),
            Target::Graph { graph } => write!(f, "graph {graph}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: usize,
    pub probabilities: Vec<f64>,
}

impl From<&Classification> for Prediction {
    fn from(c: &Classification) -> Self {
        Prediction {
            class: c.predicted,
            probabilities: c.probabilities.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredMotif {
    #[serde(flatten)]
    pub motif: Motif,
    pub alpha: f64,
    pub selected: bool,
}

/// How units are chosen from their attention weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Units with `alpha > sigma / t`, or the argmax unit if none qualifies.
    Threshold(f64),
    /// The `k` largest weights (ties to the lower index).
    TopK(usize),
    /// Highest-weight units, in order, while the explanation keeps at most
    /// `(1 - sparsity)` of the computational edges; at least one unit.
    Sparsity(f64),
}

/// Strict `alpha > sigma / t` with argmax fallback.
pub fn select_by_threshold(alphas: &[f64], sigma: f64) -> Vec<bool> {
    let t = alphas.len() as f64;
    let mut out: Vec<bool> = alphas.iter().map(|&a| a > sigma / t).collect();
    if !alphas.is_empty() && !out.iter().any(|&s| s) {
        out[argmax(alphas)] = true;
    }
    out
}

/// Unit indices ordered by decreasing weight, ties to the lower index.
pub fn rank_units(alphas: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&a, &b| alphas[b].total_cmp(&alphas[a]).then(a.cmp(&b)));
    order
}

pub fn select_top_k(alphas: &[f64], k: usize) -> Vec<bool> {
    let mut out = vec![false; alphas.len()];
    for i in rank_units(alphas).into_iter().take(k) {
        out[i] = true;
    }
    out
}

/// Greedy budgeted selection over `order`: a unit is taken when the union
/// of taken edges stays within `budget` edges. The first unit is always
/// taken.
pub fn select_within_budget(units: &[Motif], order: &[usize], budget: usize) -> Vec<bool> {
    let mut out = vec![false; units.len()];
    let mut covered: BTreeSet<Edge> = BTreeSet::new();
    for (rank, &i) in order.iter().enumerate() {
        let added = units[i].edges.iter().filter(|e| !covered.contains(e)).count();
        if rank == 0 || covered.len() + added <= budget {
            out[i] = true;
            covered.extend(units[i].edges.iter().copied());
        }
    }
    out
}

pub(crate) fn edge_budget(computational_edges: usize, sparsity: f64) -> usize {
    ((1.0 - sparsity) * computational_edges as f64 + 1e-9).floor().max(0.0) as usize
}

/// Attention-weighted units of one instance and the chosen subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub target: Target,
    pub explainer: ExplainerKind,
    pub selection: Selection,
    pub motifs: Vec<ScoredMotif>,
    /// Union of the selected units' edges, sorted.
    pub explanation_edges: Vec<Edge>,
    /// Every edge of the computational graph, sorted.
    pub computational_edges: Vec<Edge>,
    /// The model's prediction on the full input.
    pub original: Prediction,
    /// The classifier head applied to the attention-weighted embedding.
    pub new: Prediction,
}

impl Explanation {
    pub fn alphas(&self) -> Vec<f64> {
        self.motifs.iter().map(|m| m.alpha).collect()
    }

    pub fn selected(&self) -> impl Iterator<Item = &ScoredMotif> {
        self.motifs.iter().filter(|m| m.selected)
    }

    pub fn sparsity(&self) -> Option<f64> {
        if self.computational_edges.is_empty() {
            return None;
        }
        Some(1.0 - self.explanation_edges.len() as f64 / self.computational_edges.len() as f64)
    }

    /// Same weights under a different selection rule.
    pub fn reselect(&self, selection: Selection) -> Explanation {
        let alphas = self.alphas();
        let mask = match selection {
            Selection::Threshold(sigma) => select_by_threshold(&alphas, sigma),
            Selection::TopK(k) => select_top_k(&alphas, k),
            Selection::Sparsity(s) => {
                let units: Vec<Motif> = self.motifs.iter().map(|m| m.motif.clone()).collect();
                select_within_budget(&units, &rank_units(&alphas), edge_budget(self.computational_edges.len(), s))
            }
        };
        let mut out = self.clone();
        out.selection = selection;
        out.set_mask(&mask);
        out
    }

    pub(crate) fn set_mask(&mut self, mask: &[bool]) {
        let mut edges = BTreeSet::new();
        for (m, &s) in self.motifs.iter_mut().zip(mask) {
            m.selected = s;
            if s {
                edges.extend(m.motif.edges.iter().copied());
            }
        }
        self.explanation_edges = edges.into_iter().collect();
    }

    /// Score of every computational edge: the largest weight among the units
    /// owning it (0 if none does).
    pub fn edge_scores(&self) -> BTreeMap<Edge, f64> {
        let mut out: BTreeMap<Edge, f64> = self.computational_edges.iter().map(|&e| (e, 0.0)).collect();
        for m in &self.motifs {
            for e in &m.motif.edges {
                let s = out.entry(*e).or_insert(0.0);
                *s = s.max(m.alpha);
            }
        }
        out
    }
}
