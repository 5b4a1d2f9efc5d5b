use rayon::prelude::*;

use super::embedding::{edge_embeddings, graph_motif_embeddings, node_motif_embeddings};
use super::ExplainerKind;
use crate::datasets::{LabeledDataset, TaskKind};
use crate::error::Result;
use crate::gnn::{Classification, GcnModel};
use crate::graph::{l_hop_subgraph, Edge, Graph};
use crate::matrix::Matrix;
use crate::motifs::{extract_motifs, Motif, MotifDictionary};

/// Where an explanation's units come from: the whole graph, or the
/// computational graph of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct InstanceRef {
    pub graph: usize,
    pub node: Option<usize>,
}

/// Computational graph and raw (unfiltered) motifs in parent coordinates.
#[derive(Debug, Clone)]
pub(crate) struct RawUnits {
    pub computational_edges: Vec<Edge>,
    pub motifs: Vec<Motif>,
}

/// Everything the attention layer needs for one instance. Embeddings are
/// computed once because the model is frozen.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub at: InstanceRef,
    pub query: Vec<f64>,
    pub original: Classification,
    pub units: Vec<Motif>,
    pub embeddings: Matrix,
    pub computational_edges: Vec<Edge>,
}

/// Per-graph values shared by all node targets of that graph.
pub(crate) struct NodeContext {
    pub embeddings: Matrix,
    pub labels: Vec<usize>,
}

impl NodeContext {
    pub fn new(model: &GcnModel, g: &Graph) -> Result<Self> {
        Ok(NodeContext {
            embeddings: model.node_embeddings(g)?,
            labels: g.categorical_labels(),
        })
    }
}

pub(crate) fn raw_units(g: &Graph, node: Option<usize>, hops: usize) -> Result<RawUnits> {
    match node {
        None => Ok(RawUnits {
            computational_edges: g.edges().to_vec(),
            motifs: extract_motifs(g),
        }),
        Some(v) => {
            let sub = l_hop_subgraph(g, v, hops)?;
            Ok(RawUnits {
                computational_edges: sub.parent_edges(),
                motifs: extract_motifs(&sub.graph)
                    .into_iter()
                    .map(|m| m.map_nodes(|l| sub.parent[l]))
                    .collect(),
            })
        }
    }
}

pub(crate) fn prepare(
    model: &GcnModel,
    kind: ExplainerKind,
    dictionary: Option<&MotifDictionary>,
    g: &Graph,
    at: InstanceRef,
    raw: RawUnits,
    ctx: Option<&NodeContext>,
) -> Result<Prepared> {
    let owned;
    let ctx = match (at.node, ctx) {
        (Some(_), None) => {
            owned = NodeContext::new(model, g)?;
            Some(&owned)
        }
        (_, c) => c,
    };
    let own_embeddings;
    let (query, node_embeddings) = match at.node {
        None => {
            if g.node_count() == 0 {
                return Err(crate::Error::input("cannot explain an empty graph"));
            }
            own_embeddings = model.node_embeddings(g)?;
            (own_embeddings.column_means(), &own_embeddings)
        }
        Some(v) => {
            let c = ctx.unwrap();
            (c.embeddings.row(v).to_vec(), &c.embeddings)
        }
    };
    let original = model.classify(&query);
    let (units, embeddings) = match kind {
        ExplainerKind::Edge => {
            let units: Vec<Motif> = raw.computational_edges.iter().map(|&e| Motif::single_edge(e)).collect();
            let emb = edge_embeddings(node_embeddings, &raw.computational_edges);
            (units, emb)
        }
        ExplainerKind::Motif => {
            let units = match dictionary {
                Some(d) => {
                    let labels = match ctx {
                        Some(c) => c.labels.clone(),
                        None => g.categorical_labels(),
                    };
                    d.filter(raw.motifs, &labels)
                }
                None => raw.motifs,
            };
            let emb = match at.node {
                None => graph_motif_embeddings(model, g, &units)?,
                Some(v) => node_motif_embeddings(model, g, &units, v)?,
            };
            (units, emb)
        }
    };
    Ok(Prepared {
        at,
        query,
        original,
        units,
        embeddings,
        computational_edges: raw.computational_edges,
    })
}

pub(crate) fn instance_ref(ds: &LabeledDataset, i: usize) -> InstanceRef {
    match ds.task {
        TaskKind::Graph => InstanceRef { graph: i, node: None },
        TaskKind::Node => InstanceRef { graph: 0, node: Some(i) },
    }
}

/// Raw units of each listed instance, in order.
pub(crate) fn raw_units_for(ds: &LabeledDataset, instances: &[usize], hops: usize) -> Result<Vec<RawUnits>> {
    instances
        .par_iter()
        .map(|&i| {
            let at = instance_ref(ds, i);
            raw_units(&ds.graphs[at.graph], at.node, hops)
        })
        .collect()
}

/// Prepares each listed instance from its raw units, in order.
pub(crate) fn prepare_all(
    model: &GcnModel,
    kind: ExplainerKind,
    dictionary: Option<&MotifDictionary>,
    ds: &LabeledDataset,
    instances: &[usize],
    raws: Vec<RawUnits>,
) -> Result<Vec<Prepared>> {
    let ctx = match ds.task {
        TaskKind::Node => Some(NodeContext::new(model, &ds.graphs[0])?),
        TaskKind::Graph => None,
    };
    instances
        .par_iter()
        .zip(raws.into_par_iter())
        .map(|(&i, raw)| {
            let at = instance_ref(ds, i);
            prepare(model, kind, dictionary, &ds.graphs[at.graph], at, raw, ctx.as_ref())
        })
        .collect()
}
