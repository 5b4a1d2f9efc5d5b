use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LabeledDataset, TaskKind};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::matrix::Matrix;

pub const DEFAULT_FEATURE_WIDTH: usize = 10;

/// Structure-only node features for the synthetic datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeFeatures {
    /// All-ones rows.
    Constant,
    /// One-hot degree; degrees at or above `width - 1` share the last slot.
    Degree,
}

impl NodeFeatures {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeFeatures::Constant => "constant",
            NodeFeatures::Degree => "degree",
        }
    }

    pub fn matrix(&self, node_count: usize, edges: &[Edge], width: usize) -> Matrix {
        match self {
            NodeFeatures::Constant => Matrix::filled(node_count, width, 1.0),
            NodeFeatures::Degree => {
                let mut degree = vec![0usize; node_count];
                for e in edges {
                    degree[e.u] += 1;
                    degree[e.v] += 1;
                }
                let mut m = Matrix::zeros(node_count, width);
                for (n, &d) in degree.iter().enumerate() {
                    m[(n, d.min(width - 1))] = 1.0;
                }
                m
            }
        }
    }
}

impl std::str::FromStr for NodeFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(NodeFeatures::Constant),
            "degree" => Ok(NodeFeatures::Degree),
            other => Err(Error::input(format!("unknown node features `{other}`"))),
        }
    }
}

/// Edges of a Barabási–Albert graph on `n` nodes where each new node attaches
/// to `m` distinct existing nodes chosen proportionally to degree.
///
/// The first `m` nodes start unconnected; node `m` links to all of them.
pub fn ba_edges<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Vec<Edge>> {
    if m == 0 || n <= m {
        return Err(Error::input(format!("Barabási–Albert needs n > m >= 1, got n={n}, m={m}")));
    }
    let mut edges = Vec::with_capacity((n - m) * m);
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * (n - m) * m);
    let mut targets: Vec<usize> = (0..m).collect();
    for source in m..n {
        for &t in &targets {
            edges.push(Edge::new(source, t));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat(source).take(m));
        let mut chosen = Vec::with_capacity(m);
        while chosen.len() < m {
            let pick = repeated[rng.gen_range(0..repeated.len())];
            if !chosen.contains(&pick) {
                chosen.push(pick);
            }
        }
        targets = chosen;
    }
    Ok(edges)
}

/// BA graph with constant all-ones features.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = ba_edges(n, m, &mut rng)?;
    Graph::with_constant_features(n, edges, DEFAULT_FEATURE_WIDTH, 1.0)
}

/// House motif on nodes `first..first+5`: apex `first`, middle pair
/// `first+1, first+2`, bottom pair `first+3, first+4`.
///
/// The square is `b-c-d-e-b` and the roof is `a-b, a-c`.
pub fn house_edges(first: usize) -> Vec<Edge> {
    let [a, b, c, d, e] = [first, first + 1, first + 2, first + 3, first + 4];
    vec![
        Edge::new(a, b),
        Edge::new(a, c),
        Edge::new(b, c),
        Edge::new(c, d),
        Edge::new(d, e),
        Edge::new(e, b),
    ]
}

/// Label of a house node by offset within its motif: top 1, middle 2, bottom 3.
fn house_role(offset: usize) -> usize {
    match offset {
        0 => 1,
        1 | 2 => 2,
        _ => 3,
    }
}

const HOUSE_ATTACH_OFFSET: usize = 3;

fn cycle_edges(first: usize, len: usize) -> Vec<Edge> {
    (0..len).map(|i| Edge::new(first + i, first + (i + 1) % len)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaShapesConfig {
    pub base_nodes: usize,
    pub base_degree: usize,
    pub houses: usize,
    /// Random extra edges between base nodes, as a fraction of the
    /// unperturbed edge count.
    pub perturbation_fraction: f64,
    pub features: NodeFeatures,
    pub feature_width: usize,
}

impl Default for BaShapesConfig {
    fn default() -> Self {
        BaShapesConfig {
            base_nodes: 300,
            base_degree: 5,
            houses: 80,
            perturbation_fraction: 0.01,
            features: NodeFeatures::Degree,
            feature_width: DEFAULT_FEATURE_WIDTH,
        }
    }
}

pub fn generate_ba_shapes(seed: u64) -> LabeledDataset {
    generate_ba_shapes_with(&BaShapesConfig::default(), seed).expect("default configuration is valid")
}

pub fn generate_ba_shapes_with(cfg: &BaShapesConfig, seed: u64) -> Result<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = ba_edges(cfg.base_nodes, cfg.base_degree, &mut rng)?;
    let n = cfg.base_nodes + 5 * cfg.houses;
    let mut labels = vec![0usize; n];
    let mut gt_per_node = vec![Vec::new(); n];
    for h in 0..cfg.houses {
        let first = cfg.base_nodes + 5 * h;
        let house = house_edges(first);
        for off in 0..5 {
            labels[first + off] = house_role(off);
            gt_per_node[first + off] = house.clone();
        }
        edges.extend_from_slice(&house);
        let anchor = rng.gen_range(0..cfg.base_nodes);
        edges.push(Edge::new(first + HOUSE_ATTACH_OFFSET, anchor));
    }
    let extra = (cfg.perturbation_fraction * edges.len() as f64).floor() as usize;
    let mut present: HashSet<Edge> = edges.iter().copied().collect();
    let base_pairs = cfg.base_nodes * cfg.base_nodes.saturating_sub(1) / 2;
    let free = base_pairs - present.iter().filter(|e| e.v < cfg.base_nodes).count();
    if extra > free {
        return Err(Error::input(format!(
            "{extra} perturbation edges requested but only {free} base pairs are free"
        )));
    }
    let mut added = 0;
    while added < extra {
        let a = rng.gen_range(0..cfg.base_nodes);
        let b = rng.gen_range(0..cfg.base_nodes);
        if a == b {
            continue;
        }
        let e = Edge::new(a, b);
        if present.insert(e) {
            edges.push(e);
            added += 1;
        }
    }
    if cfg.feature_width == 0 {
        return Err(Error::input("feature width must be positive"));
    }
    let features = cfg.features.matrix(n, &edges, cfg.feature_width);
    let graph = Graph::new(n, edges, features)?.with_node_labels(labels);
    let mut gt = gt_per_node;
    gt.iter_mut().for_each(|v| v.sort_unstable());
    LabeledDataset::new("BA-Shapes", TaskKind::Node, vec![graph])?.with_ground_truth(gt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ba2MotifConfig {
    pub count: usize,
    pub base_nodes: usize,
    pub base_degree: usize,
    pub features: NodeFeatures,
    pub feature_width: usize,
}

impl Default for Ba2MotifConfig {
    fn default() -> Self {
        Ba2MotifConfig {
            count: 1000,
            base_nodes: 20,
            base_degree: 1,
            features: NodeFeatures::Degree,
            feature_width: DEFAULT_FEATURE_WIDTH,
        }
    }
}

pub fn generate_ba_2motif(count: usize, seed: u64) -> Result<LabeledDataset> {
    generate_ba_2motif_with(
        &Ba2MotifConfig {
            count,
            ..Ba2MotifConfig::default()
        },
        seed,
    )
}

/// First half of the graphs carry a house (label 0), the second half a
/// five-node cycle (label 1). Graph `i` draws from its own stream seeded with
/// `seed ^ i`.
pub fn generate_ba_2motif_with(cfg: &Ba2MotifConfig, seed: u64) -> Result<LabeledDataset> {
    if cfg.feature_width == 0 {
        return Err(Error::input("feature width must be positive"));
    }
    if cfg.count < 2 || cfg.count % 2 != 0 {
        return Err(Error::input(format!("BA-2Motif graph count must be even and >= 2, got {}", cfg.count)));
    }
    let mut graphs = Vec::with_capacity(cfg.count);
    let mut gt = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        let mut edges = ba_edges(cfg.base_nodes, cfg.base_degree, &mut rng)?;
        let first = cfg.base_nodes;
        let is_house = i < cfg.count / 2;
        let (motif, attach) = if is_house {
            (house_edges(first), first + HOUSE_ATTACH_OFFSET)
        } else {
            (cycle_edges(first, 5), first)
        };
        edges.extend_from_slice(&motif);
        edges.push(Edge::new(attach, rng.gen_range(0..cfg.base_nodes)));
        let features = cfg.features.matrix(cfg.base_nodes + 5, &edges, cfg.feature_width);
        let g = Graph::new(cfg.base_nodes + 5, edges, features)?
            .with_graph_label(if is_house { 0 } else { 1 });
        let mut motif = motif;
        motif.sort_unstable();
        graphs.push(g);
        gt.push(motif);
    }
    LabeledDataset::new("BA-2Motif", TaskKind::Graph, graphs)?.with_ground_truth(gt)
}
