//! Undirected simple graphs with dense node features, L-hop computational
//! graphs and feature-masked subgraphs.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    /// Normalizes endpoint order. Self loops are rejected by [`Graph::new`].
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn contains(&self, node: usize) -> bool {
        self.u == node || self.v == node
    }

    pub fn map(&self, f: impl Fn(usize) -> usize) -> Edge {
        Edge::new(f(self.u), f(self.v))
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    features: Matrix,
    neighbors: Vec<Vec<usize>>,
    pub node_labels: Option<Vec<usize>>,
    pub graph_label: Option<usize>,
}

impl Graph {
    /// Builds a graph, sorting and validating the edge list.
    pub fn new(node_count: usize, edges: Vec<Edge>, features: Matrix) -> Result<Self> {
        if features.rows() != node_count {
            return Err(Error::input(format!(
                "feature matrix has {} rows for {} nodes",
                features.rows(),
                node_count
            )));
        }
        if !features.is_finite() {
            return Err(Error::input("non-finite node feature"));
        }
        let mut edges: Vec<Edge> = edges.into_iter().map(|e| Edge::new(e.u, e.v)).collect();
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(Error::input(format!("duplicate edge {}", w[0])));
            }
        }
        let mut neighbors = vec![Vec::new(); node_count];
        for e in &edges {
            if e.u == e.v {
                return Err(Error::input(format!("self loop on node {}", e.u)));
            }
            if e.v >= node_count {
                return Err(Error::input(format!(
                    "edge {} references node outside 0..{}",
                    e, node_count
                )));
            }
            neighbors[e.u].push(e.v);
            neighbors[e.v].push(e.u);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        Ok(Graph {
            node_count,
            edges,
            features,
            neighbors,
            node_labels: None,
            graph_label: None,
        })
    }

    /// Graph with constant feature rows of the given width.
    pub fn with_constant_features(node_count: usize, edges: Vec<Edge>, width: usize, value: f64) -> Result<Self> {
        Graph::new(node_count, edges, Matrix::filled(node_count, width, value))
    }

    pub fn from_pairs(node_count: usize, pairs: &[(usize, usize)], features: Matrix) -> Result<Self> {
        Graph::new(node_count, pairs.iter().map(|&(a, b)| Edge::new(a, b)).collect(), features)
    }

    pub fn with_graph_label(mut self, label: usize) -> Self {
        self.graph_label = Some(label);
        self
    }

    pub fn with_node_labels(mut self, labels: Vec<usize>) -> Self {
        self.node_labels = Some(labels);
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted edge list.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_width(&self) -> usize {
        self.features.cols()
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.node_count && self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    /// Categorical node label per node: the argmax of each feature row, so
    /// one-hot encodings decode to their category and constant rows map to 0.
    pub fn categorical_labels(&self) -> Vec<usize> {
        (0..self.node_count)
            .map(|i| crate::matrix::argmax(self.features.row(i)))
            .collect()
    }

    /// Hop distances from `source`; unreachable nodes are `None`.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap();
            for &y in &self.neighbors[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.node_count];
        let mut count = 0;
        for s in 0..self.node_count {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(x) = stack.pop() {
                for &y in &self.neighbors[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        count
    }

    /// Induced subgraph on `nodes` (parent indices, any order). Local ids
    /// follow ascending parent id.
    pub fn induced_subgraph(&self, nodes: &BTreeSet<usize>) -> Result<Subgraph> {
        if let Some(&bad) = nodes.iter().find(|&&n| n >= self.node_count) {
            return Err(Error::input(format!("node {bad} out of range")));
        }
        let parent: Vec<usize> = nodes.iter().copied().collect();
        let local: HashMap<usize, usize> = parent.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut edges = Vec::new();
        for (i, &p) in parent.iter().enumerate() {
            for &q in &self.neighbors[p] {
                if let Some(&j) = local.get(&q) {
                    if i < j {
                        edges.push(Edge::new(i, j));
                    }
                }
            }
        }
        let mut graph = Graph::new(parent.len(), edges, self.features.select_rows(&parent))?;
        if let Some(labels) = &self.node_labels {
            graph.node_labels = Some(parent.iter().map(|&p| labels[p]).collect());
        }
        graph.graph_label = self.graph_label;
        Ok(Subgraph { parent, graph })
    }

    /// Standalone graph over `nodes` holding only `edges` (parent
    /// coordinates), with features copied from the parent. Local ids follow
    /// ascending parent id.
    pub fn edge_subgraph(&self, nodes: &BTreeSet<usize>, edges: &[Edge]) -> Result<Subgraph> {
        let parent: Vec<usize> = nodes.iter().copied().collect();
        if let Some(&bad) = parent.iter().find(|&&n| n >= self.node_count) {
            return Err(Error::input(format!("node {bad} out of range")));
        }
        let local: HashMap<usize, usize> = parent.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut local_edges = Vec::with_capacity(edges.len());
        for e in edges {
            if !self.contains_edge(e) {
                return Err(Error::input(format!("edge {e} is not in the parent graph")));
            }
            match (local.get(&e.u), local.get(&e.v)) {
                (Some(&a), Some(&b)) => local_edges.push(Edge::new(a, b)),
                _ => return Err(Error::input(format!("edge {e} has an endpoint outside the node set"))),
            }
        }
        let graph = Graph::new(parent.len(), local_edges, self.features.select_rows(&parent))?;
        Ok(Subgraph { parent, graph })
    }
}

/// A graph in local coordinates together with its map back to the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    /// `parent[local] = parent node id`
    pub parent: Vec<usize>,
    pub graph: Graph,
}

impl Subgraph {
    pub fn local_of(&self, parent_node: usize) -> Option<usize> {
        self.parent.binary_search(&parent_node).ok()
    }

    pub fn edge_to_parent(&self, e: &Edge) -> Edge {
        Edge::new(self.parent[e.u], self.parent[e.v])
    }

    pub fn parent_edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.graph.edges().iter().map(|e| self.edge_to_parent(e)).collect();
        out.sort_unstable();
        out
    }
}

/// Induced subgraph on every node within `hops` of `center`.
pub fn l_hop_subgraph(g: &Graph, center: usize, hops: usize) -> Result<Subgraph> {
    if center >= g.node_count() {
        return Err(Error::input(format!(
            "node {center} out of range for graph with {} nodes",
            g.node_count()
        )));
    }
    let nodes: BTreeSet<usize> = g
        .bfs_distances(center)
        .into_iter()
        .enumerate()
        .filter_map(|(i, d)| d.filter(|&d| d <= hops).map(|_| i))
        .collect();
    g.induced_subgraph(&nodes)
}

/// Same node set as `g`, edges restricted to `keep_edges`, and feature rows
/// zeroed for every node outside `keep_nodes`.
pub fn masked_subgraph(g: &Graph, keep_nodes: &BTreeSet<usize>, keep_edges: &[Edge]) -> Result<Graph> {
    let mut edges = Vec::with_capacity(keep_edges.len());
    for e in keep_edges {
        let e = Edge::new(e.u, e.v);
        if !g.contains_edge(&e) {
            return Err(Error::input(format!("edge {e} is not in the parent graph")));
        }
        edges.push(e);
    }
    edges.sort_unstable();
    edges.dedup();
    let mut features = Matrix::zeros(g.node_count(), g.feature_width());
    for &n in keep_nodes {
        if n >= g.node_count() {
            return Err(Error::input(format!("node {n} out of range")));
        }
        features.row_mut(n).copy_from_slice(g.features().row(n));
    }
    let mut out = Graph::new(g.node_count(), edges, features)?;
    out.node_labels = g.node_labels.clone();
    out.graph_label = g.graph_label;
    Ok(out)
}
