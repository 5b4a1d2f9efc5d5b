mod common;

use common::{arb_graph, arb_graph_and_perm, away_from_kinks, dense_adjacency, oracle, permute, small_model, WIDTH};
use motif_explain::datasets::{generate_ba_2motif, generate_ba_shapes_with, BaShapesConfig, TaskKind};
use motif_explain::gnn::{
    gradient_check, load_checkpoint, normalize_adjacency, save_checkpoint, train_gnn, GcnModel, Supervision,
    TrainConfig,
};
use motif_explain::matrix::softmax;
use proptest::prelude::*;

#[test]
fn adjacency_matches_dense_formula() {
    let ds = generate_ba_2motif(2, 0).unwrap();
    let g = &ds.graphs[0];
    let a = normalize_adjacency(g);
    let oracle = dense_adjacency(g);
    for i in 0..g.node_count() {
        for j in 0..g.node_count() {
            assert!((a[(i, j)] - oracle[i][j]).abs() < 1e-15);
        }
    }
}

#[test]
fn checkpoint_round_trip_after_training() {
    let ds = generate_ba_2motif(20, 0).unwrap();
    let ck = train_gnn(
        &ds,
        &TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.ckpt");
    save_checkpoint(&ck, &p).unwrap();
    let back = load_checkpoint(&p).unwrap();
    assert_eq!(back, ck);
    for g in &ds.graphs {
        assert_eq!(back.model.predict(g, None).unwrap(), ck.model.predict(g, None).unwrap());
    }
}

#[test]
fn node_training_learns_small_shapes() {
    let ds = generate_ba_shapes_with(
        &BaShapesConfig {
            base_nodes: 60,
            houses: 12,
            ..BaShapesConfig::default()
        },
        0,
    )
    .unwrap();
    let ck = train_gnn(
        &ds,
        &TrainConfig {
            epochs: 200,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    assert!(ck.meta.validation_accuracy > 0.8, "{}", ck.meta.validation_accuracy);
}

#[test]
fn wrong_feature_width_is_an_error() {
    let g = common::graph_from(2, &[(0, 1)]);
    let model = GcnModel::new(TaskKind::Graph, WIDTH + 1, 2, 0);
    assert!(model.predict(&g, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forward_matches_oracle(g in arb_graph(10), seed in any::<u64>()) {
        let model = small_model(TaskKind::Graph, seed);
        let (emb, pooled) = model.gcn_forward(&g).unwrap();
        let (oracle, _) = oracle(&model, &g);
        for (i, row) in oracle.iter().enumerate() {
            for (k, &x) in row.iter().enumerate() {
                prop_assert!((emb[(i, k)] - x).abs() < 1e-12);
            }
        }
        let pooled = pooled.unwrap();
        for k in 0..pooled.len() {
            let m = oracle.iter().map(|r| r[k]).sum::<f64>() / oracle.len() as f64;
            prop_assert!((pooled[k] - m).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_is_permutation_equivariant((g, perm) in arb_graph_and_perm(10), seed in any::<u64>()) {
        let model = small_model(TaskKind::Graph, seed);
        let (a, pa) = model.gcn_forward(&g).unwrap();
        let (b, pb) = model.gcn_forward(&permute(&g, &perm)).unwrap();
        for v in 0..g.node_count() {
            for (x, y) in a.row(v).iter().zip(b.row(perm[v])) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
        for (x, y) in pa.unwrap().iter().zip(pb.unwrap()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_normalizes(logits in proptest::collection::vec(-50.0..50.0f64, 1..12)) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn graph_gradients_match_differences(g in arb_graph(10), seed in any::<u64>(), label in 0usize..3) {
        let model = small_model(TaskKind::Graph, seed);
        prop_assume!(away_from_kinks(&model, &g));
        let err = gradient_check(&model, &g, Supervision::Graph(label), 1e-5).unwrap();
        prop_assert!(err < 1e-4, "relative error {}", err);
    }

    #[test]
    fn node_gradients_match_differences(g in arb_graph(10), seed in any::<u64>()) {
        let model = small_model(TaskKind::Node, seed);
        prop_assume!(away_from_kinks(&model, &g));
        let targets: Vec<(usize, usize)> = (0..g.node_count()).map(|v| (v, v % 3)).collect();
        let err = gradient_check(&model, &g, Supervision::Nodes(&targets), 1e-5).unwrap();
        prop_assert!(err < 1e-4, "relative error {}", err);
    }
}
