use std::time::Instant;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::attention::{attention_loss_and_gradient, AttentionParams};
use super::instance::{prepare_all, raw_units_for, Prepared};
use super::{Explainer, ExplainerKind};
use crate::datasets::{LabeledDataset, TaskKind};
use crate::error::{Error, Result};
use crate::gnn::{Adam, GcnModel, CONV_LAYERS};
use crate::motifs::{dictionary_from_units, DEFAULT_MIN_SUPPORT};

/// What the explainer's prediction `ξ(h')` is trained to match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossTarget {
    /// The dataset label of the instance.
    Label,
    /// The frozen model's prediction on the full instance.
    Prediction,
}

impl LossTarget {
    pub fn as_str(&self) -> &'static str {
        match self {
            LossTarget::Label => "label",
            LossTarget::Prediction => "prediction",
        }
    }
}

impl std::str::FromStr for LossTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label" => Ok(LossTarget::Label),
            "prediction" => Ok(LossTarget::Prediction),
            other => Err(Error::input(format!("unknown loss target `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainerConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Multiplier on the Glorot-uniform initial `W`; 0 starts from uniform
    /// attention.
    pub init_scale: f64,
    pub target: LossTarget,
    pub min_support: f64,
    pub hops: usize,
}

impl Default for ExplainerConfig {
    fn default() -> Self {
        ExplainerConfig {
            epochs: 30,
            learning_rate: 0.01,
            seed: 0,
            init_scale: 1.0,
            target: LossTarget::Label,
            min_support: DEFAULT_MIN_SUPPORT,
            hops: CONV_LAYERS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExplainerTraining {
    pub explainer: Explainer,
    /// Mean loss over the trained instances, per epoch.
    pub epoch_losses: Vec<f64>,
    /// Instances without any unit, left out of training.
    pub skipped: usize,
    /// Wall-clock seconds for extraction, embedding and attention training.
    pub seconds: f64,
}

/// Fits the attention matrix on `instances` of `ds` with the model frozen.
///
/// For the motif explainer the frequency dictionary is built from the same
/// instances. One `W` is shared by all instances and updated by Adam after
/// each instance; the visiting order is reshuffled every epoch from `seed`.
pub fn train_explainer(
    ds: &LabeledDataset,
    model: &GcnModel,
    kind: ExplainerKind,
    instances: &[usize],
    cfg: &ExplainerConfig,
) -> Result<ExplainerTraining> {
    if model.task != ds.task {
        return Err(Error::input(format!(
            "model is for {} tasks, dataset is {}",
            model.task.as_str(),
            ds.task.as_str()
        )));
    }
    if instances.is_empty() {
        return Err(Error::input("no instances to train the explainer on"));
    }
    let start = Instant::now();
    let raws = raw_units_for(ds, instances, cfg.hops)?;
    let dictionary = match kind {
        ExplainerKind::Motif => {
            let motifs: Vec<_> = raws.iter().map(|r| r.motifs.clone()).collect();
            let view = match ds.task {
                TaskKind::Graph => ds.subset(instances)?,
                TaskKind::Node => ds.clone(),
            };
            Some(dictionary_from_units(&view, &motifs, cfg.min_support)?)
        }
        ExplainerKind::Edge => None,
    };
    let prepared = prepare_all(model, kind, dictionary.as_ref(), ds, instances, raws)?;
    let (usable, skipped): (Vec<&Prepared>, Vec<&Prepared>) = prepared.iter().partition(|p| !p.units.is_empty());
    if !skipped.is_empty() {
        warn!("{} instance(s) have no explanation units and are skipped", skipped.len());
    }
    if usable.is_empty() {
        return Err(Error::Training {
            epoch: 0,
            message: "no instance has explanation units".into(),
        });
    }

    let dim = model.embedding_dim();
    let mut params = AttentionParams::random(dim, cfg.seed);
    params.weight.as_mut_slice().iter_mut().for_each(|w| *w *= cfg.init_scale);
    let mut adam = Adam::new(cfg.learning_rate, &[dim * dim]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut order: Vec<usize> = (0..usable.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &k in &order {
            let p = usable[k];
            let target = match cfg.target {
                LossTarget::Label => ds.label_of(p.at.node.unwrap_or(p.at.graph)),
                LossTarget::Prediction => p.original.predicted,
            };
            let (loss, grad) = attention_loss_and_gradient(model, &p.query, &p.embeddings, &params, target)?;
            if !loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    message: format!("explainer loss is {loss}"),
                });
            }
            total += loss;
            adam.step(vec![params.weight.as_mut_slice()], vec![grad.as_slice()]);
        }
        epoch_losses.push(total / usable.len() as f64);
    }

    Ok(ExplainerTraining {
        explainer: Explainer {
            kind,
            task: ds.task,
            hops: cfg.hops,
            params,
            dictionary,
        },
        epoch_losses,
        skipped: skipped.len(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::generate_ba_2motif;
    use crate::gnn::{train_gnn, TrainConfig};

    fn setup() -> (LabeledDataset, GcnModel) {
        let ds = generate_ba_2motif(30, 2).unwrap();
        let ck = train_gnn(
            &ds,
            &TrainConfig {
                epochs: 30,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        (ds, ck.model)
    }

    #[test]
    fn training_is_reproducible_and_keeps_dictionary() {
        let (ds, model) = setup();
        let all: Vec<usize> = (0..ds.instance_count()).collect();
        let cfg = ExplainerConfig {
            epochs: 3,
            ..ExplainerConfig::default()
        };
        let a = train_explainer(&ds, &model, ExplainerKind::Motif, &all, &cfg).unwrap();
        let b = train_explainer(&ds, &model, ExplainerKind::Motif, &all, &cfg).unwrap();
        assert_eq!(a.explainer, b.explainer);
        assert_eq!(a.epoch_losses, b.epoch_losses);
        assert_eq!(a.epoch_losses.len(), 3);
        assert!(a.explainer.dictionary.is_some());
        let edge = train_explainer(&ds, &model, ExplainerKind::Edge, &all, &cfg).unwrap();
        assert!(edge.explainer.dictionary.is_none());
    }

    #[test]
    fn zero_scale_starts_from_zero_weights() {
        let (ds, model) = setup();
        let cfg = ExplainerConfig {
            epochs: 0,
            init_scale: 0.0,
            ..ExplainerConfig::default()
        };
        let t = train_explainer(&ds, &model, ExplainerKind::Motif, &[0, 1], &cfg).unwrap();
        assert!(t.explainer.params.weight.as_slice().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn rejects_empty_or_mismatched_input() {
        let (ds, model) = setup();
        let cfg = ExplainerConfig::default();
        assert!(train_explainer(&ds, &model, ExplainerKind::Motif, &[], &cfg).is_err());
        let node_model = GcnModel::new(TaskKind::Node, ds.feature_width(), 2, 0);
        assert!(train_explainer(&ds, &node_model, ExplainerKind::Motif, &[0], &cfg).is_err());
    }

    #[test]
    fn target_parses() {
        assert_eq!("prediction".parse::<LossTarget>().unwrap(), LossTarget::Prediction);
        assert!("other".parse::<LossTarget>().is_err());
    }
}
