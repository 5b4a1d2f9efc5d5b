use std::collections::BTreeSet;

use crate::datasets::TaskKind;
use crate::error::{Error, Result};
use crate::gnn::GcnModel;
use crate::graph::{Edge, Graph};
use crate::matrix::Matrix;
use crate::motifs::Motif;

fn check_task(model: &GcnModel, task: TaskKind) -> Result<()> {
    if model.task != task {
        return Err(Error::input(format!(
            "{} explanation requested from a {} model",
            task.as_str(),
            model.task.as_str()
        )));
    }
    Ok(())
}

/// Feature-extractor output for the motif alone: the motif's nodes with
/// their features and only the motif's edges, mean-pooled over those nodes.
pub fn motif_embedding_graph(model: &GcnModel, g: &Graph, m: &Motif) -> Result<Vec<f64>> {
    check_task(model, TaskKind::Graph)?;
    let nodes: BTreeSet<usize> = m.nodes.iter().copied().collect();
    let sub = g.edge_subgraph(&nodes, &m.edges)?;
    model.graph_embedding(&sub.graph)
}

/// Target node's final embedding when the only message sources are the
/// motif: nodes `m ∪ {target}`, edges of `m` plus the graph edges joining
/// `target` to the motif.
pub fn motif_embedding_node(model: &GcnModel, g: &Graph, m: &Motif, target: usize) -> Result<Vec<f64>> {
    check_task(model, TaskKind::Node)?;
    if target >= g.node_count() {
        return Err(Error::input(format!("node {target} out of range")));
    }
    let (nodes, edges) = node_view(g, m, target);
    let sub = g.edge_subgraph(&nodes, &edges)?;
    let emb = model.node_embeddings(&sub.graph)?;
    Ok(emb.row(sub.local_of(target).unwrap()).to_vec())
}

fn node_view(g: &Graph, m: &Motif, target: usize) -> (BTreeSet<usize>, Vec<Edge>) {
    let mut nodes: BTreeSet<usize> = m.nodes.iter().copied().collect();
    let mut edges: BTreeSet<Edge> = m.edges.iter().copied().collect();
    for &n in &m.nodes {
        if n != target && g.has_edge(n, target) {
            edges.insert(Edge::new(n, target));
        }
    }
    nodes.insert(target);
    (nodes, edges.into_iter().collect())
}

/// Embeddings of every motif (rows) for one node target. Motifs with no
/// path to the target share the isolated-target embedding, computed once.
pub(crate) fn node_motif_embeddings(model: &GcnModel, g: &Graph, motifs: &[Motif], target: usize) -> Result<Matrix> {
    let mut out = Matrix::zeros(motifs.len(), model.embedding_dim());
    let mut isolated: Option<Vec<f64>> = None;
    for (j, m) in motifs.iter().enumerate() {
        let touches = m.nodes.contains(&target) || g.neighbors(target).iter().any(|n| m.nodes.binary_search(n).is_ok());
        let row = if touches {
            motif_embedding_node(model, g, m, target)?
        } else {
            if isolated.is_none() {
                let alone = Graph::new(1, Vec::new(), g.features().select_rows(&[target]))?;
                isolated = Some(model.node_embeddings(&alone)?.row(0).to_vec());
            }
            isolated.clone().unwrap()
        };
        out.row_mut(j).copy_from_slice(&row);
    }
    Ok(out)
}

pub(crate) fn graph_motif_embeddings(model: &GcnModel, g: &Graph, motifs: &[Motif]) -> Result<Matrix> {
    let mut out = Matrix::zeros(motifs.len(), model.embedding_dim());
    for (j, m) in motifs.iter().enumerate() {
        out.row_mut(j).copy_from_slice(&motif_embedding_graph(model, g, m)?);
    }
    Ok(out)
}

/// Edge embeddings for the attention baseline: mean of the two endpoint rows
/// of the full-graph node embeddings.
pub(crate) fn edge_embeddings(node_embeddings: &Matrix, edges: &[Edge]) -> Matrix {
    let mut out = Matrix::zeros(edges.len(), node_embeddings.cols());
    for (j, e) in edges.iter().enumerate() {
        let (a, b) = (node_embeddings.row(e.u), node_embeddings.row(e.v));
        for (o, (x, y)) in out.row_mut(j).iter_mut().zip(a.iter().zip(b)) {
            *o = 0.5 * (x + y);
        }
    }
    out
}
