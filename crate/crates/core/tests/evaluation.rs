mod common;

use common::trained;
use motif_explain::evaluation::{
    edge_agreement, explanation_accuracy, fidelity, instance_fidelity, random_unit_explanations, roc_auc,
    sparsity, threshold_sweep, MetricsReport,
};
use motif_explain::explainer::Selection;
use motif_explain::graph::Edge;
use proptest::prelude::*;

fn auc_oracle(scored: &[(f64, bool)]) -> Option<f64> {
    let pos: Vec<f64> = scored.iter().filter(|s| s.1).map(|s| s.0).collect();
    let neg: Vec<f64> = scored.iter().filter(|s| !s.1).map(|s| s.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
        }
    }
    Some(wins / (pos.len() * neg.len()) as f64)
}

#[test]
fn whole_graph_explanation_has_zero_fidelity() {
    let t = trained();
    let explanations = t.explainer.explain_dataset(&t.model, &t.ds, Selection::Threshold(1.0)).unwrap();
    for e in &explanations {
        let mut whole = e.clone();
        whole.explanation_edges = t.ds.graph_of(e.target.instance()).edges().to_vec();
        assert_eq!(instance_fidelity(&t.ds, &whole, &t.model).unwrap(), 0.0);
    }
}

#[test]
fn report_rows_aggregate_to_means() {
    let t = trained();
    let explanations = t.explainer.explain_dataset(&t.model, &t.ds, Selection::Threshold(1.0)).unwrap();
    let r = MetricsReport::build(&t.ds, &t.model, &explanations).unwrap();
    let n = r.rows.len() as f64;
    let f: f64 = r.rows.iter().map(|x| x.fidelity).sum::<f64>() / n;
    assert!((r.fidelity - f).abs() < 1e-12);
    assert!((r.fidelity - fidelity(&t.ds, &explanations, &t.model).unwrap()).abs() < 1e-12);
    let s: f64 = r.rows.iter().filter_map(|x| x.sparsity).sum::<f64>() / n;
    assert!((r.sparsity - s).abs() < 1e-12);
    assert!((r.sparsity - sparsity(&explanations)).abs() < 1e-12);
    let acc = explanation_accuracy(&t.ds, &explanations).unwrap();
    assert_eq!(r.balanced_accuracy, Some(acc.balanced_accuracy));
    assert!((0.0..=1.0).contains(&acc.accuracy) && (0.0..=1.0).contains(&r.sparsity));
    let csv = r.to_csv();
    assert!(csv.starts_with("instance,original_class"));
    assert_eq!(csv.lines().filter(|l| l.starts_with(char::is_numeric)).count(), r.rows.len());
}

#[test]
fn sweep_sparsity_never_falls() {
    let t = trained();
    let explanations = t.explainer.explain_dataset(&t.model, &t.ds, Selection::Threshold(1.0)).unwrap();
    let rows = threshold_sweep(&t.ds, &t.model, &explanations, &[1.0, 1.2, 1.5, 1.7, 2.0]).unwrap();
    assert!(rows.windows(2).all(|w| w[1].sparsity >= w[0].sparsity));
    assert!(threshold_sweep(&t.ds, &t.model, &explanations, &[2.0, 1.0]).is_err());
}

#[test]
fn random_baseline_respects_budget() {
    let t = trained();
    let explanations = t.explainer.explain_dataset(&t.model, &t.ds, Selection::Threshold(1.0)).unwrap();
    let a = random_unit_explanations(&explanations, 0.5, 3);
    assert_eq!(a, random_unit_explanations(&explanations, 0.5, 3));
    for (r, e) in a.iter().zip(&explanations) {
        assert_eq!(r.alphas(), e.alphas());
        if r.selected().count() > 1 {
            assert!(r.sparsity().unwrap() >= 0.5 - 1e-12);
        }
    }
}

#[test]
fn accuracy_needs_ground_truth() {
    let t = trained();
    let mut ds = t.ds.clone();
    ds.ground_truth = None;
    let explanations = t.explainer.explain_dataset(&t.model, &t.ds, Selection::Threshold(1.0)).unwrap();
    assert!(explanation_accuracy(&ds, &explanations).is_err());
    assert_eq!(MetricsReport::build(&ds, &t.model, &explanations).unwrap().balanced_accuracy, None);
}

proptest! {
    #[test]
    fn auc_matches_pair_counting(scored in proptest::collection::vec((0u8..5, any::<bool>()), 0..30)) {
        let scored: Vec<(f64, bool)> = scored.into_iter().map(|(s, l)| (s as f64 / 4.0, l)).collect();
        match (roc_auc(&scored), auc_oracle(&scored)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn dropping_a_motif_never_lowers_sparsity(instance in 0usize..40, k in 1usize..10) {
        let t = trained();
        let e = t.explainer.explain_dataset(&t.model, &t.ds, Selection::Threshold(1.0)).unwrap().remove(instance);
        let more = e.reselect(Selection::TopK(k + 1));
        let fewer = e.reselect(Selection::TopK(k));
        let s = (fewer.sparsity().unwrap(), more.sparsity().unwrap());
        prop_assert!(s.0 >= s.1);
        prop_assert!((0.0..=1.0).contains(&s.0) && (0.0..=1.0).contains(&s.1));
    }

    #[test]
    fn agreement_ignores_node_names(instance in 0usize..40, k in 1usize..8, perm in Just((0..25).collect::<Vec<usize>>()).prop_shuffle()) {
        let t = trained();
        let e = t.explainer.explain_dataset(&t.model, &t.ds, Selection::TopK(k)).unwrap().remove(instance);
        let truth = &t.ds.ground_truth.as_ref().unwrap()[instance];
        let map = |x: &Edge| Edge::new(perm[x.u], perm[x.v]);
        let mut moved = e.clone();
        moved.explanation_edges = e.explanation_edges.iter().map(map).collect();
        moved.computational_edges = e.computational_edges.iter().map(map).collect();
        for m in &mut moved.motifs {
            m.motif = m.motif.map_nodes(|v| perm[v]);
        }
        let moved_truth: Vec<Edge> = truth.iter().map(map).collect();
        prop_assert_eq!(edge_agreement(&e, truth), edge_agreement(&moved, &moved_truth));
    }
}
