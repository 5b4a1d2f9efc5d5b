mod common;

use std::collections::BTreeSet;

use common::{arb_graph, distances, graph_from};
use motif_explain::datasets::generate_ba_shapes;
use motif_explain::graph::{l_hop_subgraph, masked_subgraph, Edge};
use proptest::prelude::*;

fn ball(g: &motif_explain::graph::Graph, v: usize, l: usize) -> BTreeSet<usize> {
    distances(g)[v]
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_some_and(|d| d <= l))
        .map(|(i, _)| i)
        .collect()
}

#[test]
fn path_one_hop() {
    let g = graph_from(4, &[(0, 1), (1, 2), (2, 3)]);
    let s = l_hop_subgraph(&g, 1, 1).unwrap();
    assert_eq!(s.parent, vec![0, 1, 2]);
    assert_eq!(s.parent_edges(), vec![Edge::new(0, 1), Edge::new(1, 2)]);
}

#[test]
fn zero_hops_is_the_node() {
    let g = graph_from(4, &[(0, 1), (1, 2), (2, 3)]);
    let s = l_hop_subgraph(&g, 2, 0).unwrap();
    assert_eq!(s.parent, vec![2]);
    assert_eq!(s.graph.edge_count(), 0);
    assert_eq!(s.graph.features().row(0), g.features().row(2));
}

#[test]
fn bad_center_is_an_error() {
    let g = graph_from(2, &[(0, 1)]);
    assert!(l_hop_subgraph(&g, 2, 1).is_err());
}

#[test]
fn house_middle_node_ball_holds_house() {
    let ds = generate_ba_shapes(0);
    let g = &ds.graphs[0];
    let labels = g.node_labels.as_ref().unwrap();
    let middle = labels.iter().position(|&l| l == 2).unwrap();
    let house: BTreeSet<usize> = ds.ground_truth.as_ref().unwrap()[middle]
        .iter()
        .flat_map(|e| [e.u, e.v])
        .collect();
    assert_eq!(house.len(), 5);
    let s = l_hop_subgraph(g, middle, 3).unwrap();
    let nodes: BTreeSet<usize> = s.parent.iter().copied().collect();
    assert!(house.is_subset(&nodes));
    assert_eq!(nodes, ball(g, middle, 3));
}

#[test]
fn triangle_mask() {
    let g = graph_from(3, &[(0, 1), (1, 2), (0, 2)]);
    let m = masked_subgraph(&g, &BTreeSet::from([0, 1]), &[Edge::new(0, 1)]).unwrap();
    assert_eq!(m.edges(), &[Edge::new(0, 1)]);
    assert!(m.features().row(2).iter().all(|&x| x == 0.0));
    assert_eq!(m.features().row(0), g.features().row(0));
}

#[test]
fn mask_rejects_foreign_edge() {
    let g = graph_from(3, &[(0, 1)]);
    assert!(masked_subgraph(&g, &BTreeSet::new(), &[Edge::new(1, 2)]).is_err());
}

proptest! {
    #[test]
    fn l_hop_matches_distance_oracle(g in arb_graph(10), seed in 0usize..100) {
        let v = seed % g.node_count();
        let n = g.node_count();
        let mut previous = BTreeSet::new();
        for l in 0..=n {
            let s = l_hop_subgraph(&g, v, l).unwrap();
            let nodes: BTreeSet<usize> = s.parent.iter().copied().collect();
            prop_assert_eq!(&nodes, &ball(&g, v, l));
            prop_assert!(previous.is_subset(&nodes));
            let induced: Vec<Edge> = g
                .edges()
                .iter()
                .filter(|e| nodes.contains(&e.u) && nodes.contains(&e.v))
                .copied()
                .collect();
            prop_assert_eq!(s.parent_edges(), induced);
            for (local, &p) in s.parent.iter().enumerate() {
                prop_assert_eq!(s.graph.features().row(local), g.features().row(p));
            }
            previous = nodes;
        }
        let component: BTreeSet<usize> = (0..n).filter(|&u| distances(&g)[v][u].is_some()).collect();
        prop_assert_eq!(previous, component);
    }

    #[test]
    fn mask_keeps_shape(g in arb_graph(10), keep_bits in proptest::collection::vec(any::<bool>(), 10), edge_bits in proptest::collection::vec(any::<bool>(), 45)) {
        let keep: BTreeSet<usize> = (0..g.node_count()).filter(|&v| keep_bits[v]).collect();
        let edges: Vec<Edge> = g.edges().iter().enumerate().filter(|(i, _)| edge_bits[*i]).map(|(_, e)| *e).collect();
        let m = masked_subgraph(&g, &keep, &edges).unwrap();
        prop_assert_eq!(m.node_count(), g.node_count());
        prop_assert_eq!(m.feature_width(), g.feature_width());
        prop_assert_eq!(m.edges(), &edges[..]);
        for v in 0..g.node_count() {
            if keep.contains(&v) {
                prop_assert_eq!(m.features().row(v), g.features().row(v));
            } else {
                prop_assert!(m.features().row(v).iter().all(|&x| x == 0.0));
            }
        }
        let all: BTreeSet<usize> = (0..g.node_count()).collect();
        prop_assert_eq!(masked_subgraph(&g, &all, g.edges()).unwrap(), g);
    }
}
