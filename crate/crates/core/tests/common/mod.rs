#![allow(dead_code)]

use motif_explain::datasets::TaskKind;
use motif_explain::gnn::{Dense, GcnModel};
use motif_explain::graph::{Edge, Graph};
use motif_explain::matrix::Matrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WIDTH: usize = 3;

/// Simple graphs on 1..=max_n nodes with features in [-1, 1].
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(proptest::bool::weighted(0.35), pairs),
                proptest::collection::vec(-1.0..1.0f64, n * WIDTH),
            )
        })
        .prop_map(|(n, mask, feats)| {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if mask[k] {
                        edges.push(Edge::new(a, b));
                    }
                    k += 1;
                }
            }
            Graph::new(n, edges, Matrix::from_vec(n, WIDTH, feats)).unwrap()
        })
}

/// A graph together with a permutation of its nodes.
pub fn arb_graph_and_perm(max_n: usize) -> impl Strategy<Value = (Graph, Vec<usize>)> {
    arb_graph(max_n).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

/// Node `v` of `g` becomes node `perm[v]`.
pub fn permute(g: &Graph, perm: &[usize]) -> Graph {
    let n = g.node_count();
    let edges = g.edges().iter().map(|e| Edge::new(perm[e.u], perm[e.v])).collect();
    let mut rows = vec![vec![0.0; g.feature_width()]; n];
    for v in 0..n {
        rows[perm[v]] = g.features().row(v).to_vec();
    }
    let mut out = Graph::new(n, edges, Matrix::from_vec(n, g.feature_width(), rows.concat())).unwrap();
    if let Some(labels) = &g.node_labels {
        let mut l = vec![0; n];
        for v in 0..n {
            l[perm[v]] = labels[v];
        }
        out = out.with_node_labels(l);
    }
    out.graph_label = g.graph_label;
    out
}

/// All-pairs hop distances by Floyd–Warshall.
pub fn distances(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let mut d = vec![vec![None; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = Some(0);
    }
    for e in g.edges() {
        d[e.u][e.v] = Some(1);
        d[e.v][e.u] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].map_or(true, |c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Connected-component count of `n` nodes joined by `edges`.
pub fn component_count(n: usize, edges: &[Edge]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut count = n;
    for e in edges {
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}

/// Edges whose removal disconnects their endpoints.
pub fn bridge_oracle(g: &Graph) -> Vec<Edge> {
    let base = component_count(g.node_count(), g.edges());
    g.edges()
        .iter()
        .filter(|e| {
            let rest: Vec<Edge> = g.edges().iter().copied().filter(|x| x != *e).collect();
            component_count(g.node_count(), &rest) > base
        })
        .copied()
        .collect()
}

pub fn graph_from(n: usize, pairs: &[(usize, usize)]) -> Graph {
    Graph::from_pairs(n, pairs, Matrix::filled(n, WIDTH, 1.0)).unwrap()
}

pub struct Trained {
    pub ds: motif_explain::datasets::LabeledDataset,
    pub model: motif_explain::gnn::GcnModel,
    pub explainer: motif_explain::explainer::Explainer,
}

/// A small BA-2Motif model with a briefly trained motif explainer.
pub fn trained() -> &'static Trained {
    static CELL: std::sync::OnceLock<Trained> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        use motif_explain::explainer::{train_explainer, ExplainerConfig, ExplainerKind};
        use motif_explain::gnn::{train_gnn, TrainConfig};
        let ds = motif_explain::datasets::generate_ba_2motif(40, 11).unwrap();
        let ck = train_gnn(
            &ds,
            &TrainConfig {
                epochs: 60,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let all: Vec<usize> = (0..ds.instance_count()).collect();
        let cfg = ExplainerConfig {
            epochs: 3,
            ..ExplainerConfig::default()
        };
        let explainer = train_explainer(&ds, &ck.model, ExplainerKind::Motif, &all, &cfg).unwrap().explainer;
        Trained {
            ds,
            model: ck.model,
            explainer,
        }
    })
}

pub type Dense2 = Vec<Vec<f64>>;

pub fn dense_adjacency(g: &Graph) -> Dense2 {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (v, row) in a.iter_mut().enumerate() {
        row[v] = 1.0;
    }
    for e in g.edges() {
        a[e.u][e.v] = 1.0;
        a[e.v][e.u] = 1.0;
    }
    let d: Vec<f64> = a.iter().map(|r| r.iter().sum::<f64>()).collect();
    (0..n).map(|i| (0..n).map(|j| a[i][j] / (d[i] * d[j]).sqrt()).collect()).collect()
}

pub fn matmul(a: &Dense2, b: &Dense2) -> Dense2 {
    a.iter()
        .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect())
        .collect()
}

pub fn rows_of(m: &motif_explain::matrix::Matrix) -> Dense2 {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn affine(x: &Dense2, layer: &Dense) -> Dense2 {
    matmul(x, &rows_of(&layer.weight))
        .into_iter()
        .map(|r| r.iter().zip(&layer.bias).map(|(v, b)| v + b).collect())
        .collect()
}

pub fn relu(x: &Dense2) -> Dense2 {
    x.iter().map(|r| r.iter().map(|v| v.max(0.0)).collect()).collect()
}

/// Node embeddings computed naively from the layer parameters, plus every
/// ReLU pre-activation on the way (convolutions and the head's hidden layer).
pub fn oracle(model: &GcnModel, g: &Graph) -> (Dense2, Vec<f64>) {
    let a = dense_adjacency(g);
    let mut h = rows_of(g.features());
    let mut pre = Vec::new();
    for layer in &model.conv {
        let z = affine(&matmul(&a, &h), layer);
        pre.extend(z.iter().flatten());
        h = relu(&z);
    }
    let head_in = match model.task {
        TaskKind::Graph => vec![(0..h[0].len()).map(|k| h.iter().map(|r| r[k]).sum::<f64>() / h.len() as f64).collect()],
        TaskKind::Node => h.clone(),
    };
    pre.extend(affine(&head_in, &model.mlp[0]).iter().flatten());
    (h, pre)
}

/// Finite differences only measure the derivative away from ReLU kinks.
pub fn away_from_kinks(model: &GcnModel, g: &Graph) -> bool {
    oracle(model, g).1.iter().all(|p| p.abs() > 1e-3)
}

/// Small model with nonzero biases, so no pre-activation sits exactly on
/// the ReLU kink when a whole layer is inactive.
pub fn small_model(task: TaskKind, seed: u64) -> GcnModel {
    let mut model = GcnModel::with_dims(task, WIDTH, &[6, 5, 4], 5, 3, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in model.conv.iter_mut().chain(model.mlp.iter_mut()) {
        layer.bias.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
    }
    model
}

