//! Fidelity, sparsity, explanation accuracy against ground truth, the
//! threshold sweep, sparsity-matched baselines and timing summaries.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::datasets::{LabeledDataset, TaskKind};
use crate::error::{Error, Result};
use crate::explainer::{edge_budget, select_within_budget, Explanation, Selection};
use crate::gnn::GcnModel;
use crate::graph::{masked_subgraph, Edge};
use crate::motifs::Motif;

/// Drop in the originally predicted class probability when the model only
/// sees the explanation edges and their endpoints' features (plus the
/// target's own features for node tasks).
pub fn instance_fidelity(ds: &LabeledDataset, e: &Explanation, model: &GcnModel) -> Result<f64> {
    let i = e.target.instance();
    if i >= ds.instance_count() {
        return Err(Error::Evaluation(format!("{} is not in dataset {}", e.target, ds.name)));
    }
    let g = ds.graph_of(i);
    let node = match ds.task {
        TaskKind::Graph => None,
        TaskKind::Node => Some(i),
    };
    let full = model.predict(g, node)?;
    let mut keep: BTreeSet<usize> = e.explanation_edges.iter().flat_map(|e| [e.u, e.v]).collect();
    keep.extend(node);
    let masked = masked_subgraph(g, &keep, &e.explanation_edges)?;
    let part = model.predict(&masked, node)?;
    Ok(full.probabilities[full.predicted] - part.probabilities[full.predicted])
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

/// Mean [`instance_fidelity`]. Lower is better.
pub fn fidelity(ds: &LabeledDataset, explanations: &[Explanation], model: &GcnModel) -> Result<f64> {
    if explanations.is_empty() {
        return Err(Error::Evaluation("no explanations".into()));
    }
    let values: Vec<f64> = explanations
        .par_iter()
        .map(|e| instance_fidelity(ds, e, model))
        .collect::<Result<_>>()?;
    Ok(mean(values.into_iter()).unwrap())
}

/// Mean of `1 - |explanation edges| / |computational edges|`; instances
/// with an edgeless computational graph are skipped.
pub fn sparsity(explanations: &[Explanation]) -> f64 {
    let skipped = explanations.iter().filter(|e| e.sparsity().is_none()).count();
    if skipped > 0 {
        warn!("{skipped} explanation(s) have no computational edges and are left out of sparsity");
    }
    mean(explanations.iter().filter_map(Explanation::sparsity)).unwrap_or(0.0)
}

/// Edge-level agreement of one explanation with its ground-truth edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeAgreement {
    /// `(TPR + TNR) / 2`, or TPR when the computational graph has no
    /// negative edge.
    pub balanced_accuracy: f64,
    pub accuracy: f64,
    /// ROC-AUC of the edge scores; `None` without both classes.
    pub auc: Option<f64>,
}

/// Compares the selected edges with `truth` (restricted to the
/// computational graph). `None` when no ground-truth edge is present.
pub fn edge_agreement(e: &Explanation, truth: &[Edge]) -> Option<EdgeAgreement> {
    let comp: BTreeSet<Edge> = e.computational_edges.iter().copied().collect();
    let positives: BTreeSet<Edge> = truth.iter().filter(|t| comp.contains(t)).copied().collect();
    if positives.is_empty() {
        return None;
    }
    let selected: BTreeSet<Edge> = e.explanation_edges.iter().copied().collect();
    let tp = positives.intersection(&selected).count() as f64;
    let negatives = comp.len() - positives.len();
    let tn = comp.iter().filter(|x| !positives.contains(x) && !selected.contains(x)).count() as f64;
    let tpr = tp / positives.len() as f64;
    let balanced_accuracy = if negatives == 0 {
        tpr
    } else {
        0.5 * (tpr + tn / negatives as f64)
    };
    let scores = e.edge_scores();
    let labelled: Vec<(f64, bool)> = comp.iter().map(|x| (scores[x], positives.contains(x))).collect();
    Some(EdgeAgreement {
        balanced_accuracy,
        accuracy: (tp + tn) / comp.len() as f64,
        auc: roc_auc(&labelled),
    })
}

/// Probability that a random positive outscores a random negative, ties
/// counted one half.
pub fn roc_auc(scored: &[(f64, bool)]) -> Option<f64> {
    let mut order: Vec<&(f64, bool)> = scored.iter().collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pos = scored.iter().filter(|s| s.1).count() as f64;
    let neg = scored.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return None;
    }
    // Mann-Whitney U with average ranks over tie groups.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && order[j].0 == order[i].0 {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        rank_sum += avg * order[i..j].iter().filter(|s| s.1).count() as f64;
        i = j;
    }
    Some((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub balanced_accuracy: f64,
    pub accuracy: f64,
    pub auc: Option<f64>,
    /// Instances with at least one ground-truth edge.
    pub instances: usize,
}

/// Means of [`edge_agreement`] over explanations whose instance has
/// ground-truth edges.
pub fn explanation_accuracy(ds: &LabeledDataset, explanations: &[Explanation]) -> Result<AccuracyReport> {
    let truth = ds
        .ground_truth
        .as_ref()
        .ok_or_else(|| Error::Evaluation(format!("dataset {} has no ground truth", ds.name)))?;
    let rows: Vec<EdgeAgreement> = explanations
        .iter()
        .filter_map(|e| truth.get(e.target.instance()).and_then(|t| edge_agreement(e, t)))
        .collect();
    if rows.is_empty() {
        return Err(Error::Evaluation("no explained instance has ground-truth edges".into()));
    }
    Ok(AccuracyReport {
        balanced_accuracy: mean(rows.iter().map(|r| r.balanced_accuracy)).unwrap(),
        accuracy: mean(rows.iter().map(|r| r.accuracy)).unwrap(),
        auc: mean(rows.iter().filter_map(|r| r.auc)),
        instances: rows.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub sparsity: f64,
    pub fidelity: f64,
}

/// Re-selects the given explanations at each `sigma` and measures them.
/// Fails if the sigmas are not positive and increasing, or if sparsity
/// decreases along the sweep.
pub fn threshold_sweep(
    ds: &LabeledDataset,
    model: &GcnModel,
    explanations: &[Explanation],
    sigmas: &[f64],
) -> Result<Vec<SweepRow>> {
    if sigmas.iter().any(|&s| !(s > 0.0)) || sigmas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Evaluation(format!("sigmas must be positive and increasing: {sigmas:?}")));
    }
    let mut rows = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let at: Vec<Explanation> = explanations.iter().map(|e| e.reselect(Selection::Threshold(sigma))).collect();
        rows.push(SweepRow {
            sigma,
            sparsity: sparsity(&at),
            fidelity: fidelity(ds, &at, model)?,
        });
    }
    if let Some(w) = rows.windows(2).find(|w| w[1].sparsity < w[0].sparsity) {
        return Err(Error::Evaluation(format!(
            "sparsity decreased from {} at sigma {} to {} at sigma {}",
            w[0].sparsity, w[0].sigma, w[1].sparsity, w[1].sigma
        )));
    }
    Ok(rows)
}

/// Sparsity-matched random baseline: the same units as each explanation,
/// visited in a seeded random order and taken greedily while the edge
/// budget of `target_sparsity` allows.
pub fn random_unit_explanations(explanations: &[Explanation], target_sparsity: f64, seed: u64) -> Vec<Explanation> {
    explanations
        .iter()
        .map(|e| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ e.target.instance() as u64);
            let mut order: Vec<usize> = (0..e.motifs.len()).collect();
            order.shuffle(&mut rng);
            let units: Vec<Motif> = e.motifs.iter().map(|m| m.motif.clone()).collect();
            let mask = select_within_budget(&units, &order, edge_budget(e.computational_edges.len(), target_sparsity));
            let mut out = e.clone();
            out.selection = Selection::Sparsity(target_sparsity);
            out.set_mask(&mask);
            out
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub instances: usize,
    pub mean_inference_seconds: f64,
    pub std_inference_seconds: f64,
    pub training_seconds: f64,
}

pub fn timing_report(inference_seconds: &[f64], training_seconds: f64) -> Timing {
    let n = inference_seconds.len();
    if n == 0 {
        return Timing {
            instances: 0,
            mean_inference_seconds: 0.0,
            std_inference_seconds: 0.0,
            training_seconds,
        };
    }
    let m = inference_seconds.iter().sum::<f64>() / n as f64;
    let var = inference_seconds.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / n as f64;
    Timing {
        instances: n,
        mean_inference_seconds: m,
        std_inference_seconds: var.sqrt(),
        training_seconds,
    }
}

impl Timing {
    pub fn to_csv(&self) -> String {
        format!(
            "metric,value\ninstances,{}\nmean_inference_seconds,{:.6}\nstd_inference_seconds,{:.6}\ntraining_seconds,{:.6}\n",
            self.instances, self.mean_inference_seconds, self.std_inference_seconds, self.training_seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRow {
    pub instance: usize,
    pub original_class: usize,
    pub new_class: usize,
    pub fidelity: f64,
    pub sparsity: Option<f64>,
    pub agreement: Option<EdgeAgreement>,
}

/// Per-instance rows and their means. Timing is kept out so that the
/// report is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub rows: Vec<InstanceRow>,
    pub fidelity: f64,
    pub sparsity: f64,
    pub balanced_accuracy: Option<f64>,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub sweep: Vec<SweepRow>,
}

impl MetricsReport {
    pub fn build(ds: &LabeledDataset, model: &GcnModel, explanations: &[Explanation]) -> Result<Self> {
        let fidelities: Vec<f64> = explanations
            .par_iter()
            .map(|e| instance_fidelity(ds, e, model))
            .collect::<Result<_>>()?;
        let truth: HashMap<usize, &Vec<Edge>> = ds
            .ground_truth
            .iter()
            .flat_map(|gt| gt.iter().enumerate())
            .collect();
        let rows: Vec<InstanceRow> = explanations
            .iter()
            .zip(fidelities)
            .map(|(e, fidelity)| InstanceRow {
                instance: e.target.instance(),
                original_class: e.original.class,
                new_class: e.new.class,
                fidelity,
                sparsity: e.sparsity(),
                agreement: truth.get(&e.target.instance()).and_then(|t| edge_agreement(e, t)),
            })
            .collect();
        if rows.is_empty() {
            return Err(Error::Evaluation("no explanations".into()));
        }
        let has_truth = ds.ground_truth.is_some();
        let agreements: Vec<EdgeAgreement> = rows.iter().filter_map(|r| r.agreement).collect();
        Ok(MetricsReport {
            fidelity: mean(rows.iter().map(|r| r.fidelity)).unwrap(),
            sparsity: mean(rows.iter().filter_map(|r| r.sparsity)).unwrap_or(0.0),
            balanced_accuracy: has_truth.then(|| mean(agreements.iter().map(|a| a.balanced_accuracy))).flatten(),
            accuracy: has_truth.then(|| mean(agreements.iter().map(|a| a.accuracy))).flatten(),
            auc: has_truth.then(|| mean(agreements.iter().filter_map(|a| a.auc))).flatten(),
            rows,
            sweep: Vec::new(),
        })
    }

    /// Per-instance CSV rows, then `# summary` and `metric,value` lines,
    /// then the sweep table when present. Empty cells mean "not defined".
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut out = String::from("instance,original_class,new_class,fidelity,sparsity,balanced_accuracy,accuracy,auc\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{},{},{},{}",
                r.instance,
                r.original_class,
                r.new_class,
                r.fidelity,
                opt(r.sparsity),
                opt(r.agreement.map(|a| a.balanced_accuracy)),
                opt(r.agreement.map(|a| a.accuracy)),
                opt(r.agreement.and_then(|a| a.auc)),
            );
        }
        let _ = writeln!(out, "\n# summary\nmetric,value");
        let _ = writeln!(out, "instances,{}", self.rows.len());
        let _ = writeln!(out, "fidelity,{:.6}", self.fidelity);
        let _ = writeln!(out, "sparsity,{:.6}", self.sparsity);
        let _ = writeln!(out, "balanced_accuracy,{}", opt(self.balanced_accuracy));
        let _ = writeln!(out, "accuracy,{}", opt(self.accuracy));
        let _ = writeln!(out, "auc,{}", opt(self.auc));
        if !self.sweep.is_empty() {
            let _ = writeln!(out, "\n# sweep\nsigma,sparsity,fidelity");
            for s in &self.sweep {
                let _ = writeln!(out, "{},{:.6},{:.6}", s.sigma, s.sparsity, s.fidelity);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_of_perfect_and_inverted_rankings() {
        let good = [(0.9, true), (0.8, true), (0.1, false)];
        assert_eq!(roc_auc(&good), Some(1.0));
        let bad = [(0.1, true), (0.8, false), (0.9, false)];
        assert_eq!(roc_auc(&bad), Some(0.0));
    }

    #[test]
    fn auc_counts_ties_as_half() {
        assert_eq!(roc_auc(&[(0.5, true), (0.5, false)]), Some(0.5));
        assert_eq!(roc_auc(&[(0.5, true)]), None);
    }

    #[test]
    fn timing_of_nothing_is_zero() {
        let t = timing_report(&[], 0.0);
        assert_eq!(t.mean_inference_seconds, 0.0);
        assert_eq!(t.instances, 0);
    }

    #[test]
    fn timing_statistics() {
        let t = timing_report(&[1.0, 3.0], 5.0);
        assert_eq!(t.mean_inference_seconds, 2.0);
        assert_eq!(t.std_inference_seconds, 1.0);
    }
}
