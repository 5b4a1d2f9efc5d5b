use super::checkpoint::{ModelCheckpoint, TrainingMeta};
use super::model::{GcnModel, Propagator, Supervision};
use super::optim::Adam;
use crate::datasets::{stratified_split, LabeledDataset, TaskKind};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            learning_rate: 0.01,
            seed: 0,
            train_fraction: 0.8,
        }
    }
}

/// Instance indices held out for validation under `cfg`'s split.
pub fn validation_indices(ds: &LabeledDataset, cfg: &TrainConfig) -> Result<(Vec<usize>, Vec<usize>)> {
    stratified_split(&ds.labels(), cfg.train_fraction, cfg.seed)
}

/// Full-batch Adam on mean cross-entropy. Returns the checkpoint and the
/// training loss recorded before each update.
pub fn train_gnn_with_history(ds: &LabeledDataset, cfg: &TrainConfig) -> Result<(ModelCheckpoint, Vec<f64>)> {
    if ds.instance_count() == 0 {
        return Err(Error::input("empty dataset"));
    }
    let (train, validation) = validation_indices(ds, cfg)?;
    let mut model = GcnModel::new(ds.task, ds.feature_width(), ds.class_count().max(2), cfg.seed);
    let shapes: Vec<usize> = model.params().iter().map(|p| p.len()).collect();
    let mut adam = Adam::new(cfg.learning_rate, &shapes);
    let props: Vec<Propagator> = ds.graphs.iter().map(Propagator::new).collect();
    let node_targets: Vec<(usize, usize)> = match ds.task {
        TaskKind::Node => train.iter().map(|&v| (v, ds.label_of(v))).collect(),
        TaskKind::Graph => Vec::new(),
    };

    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut grads = model.zeros_like();
        let loss = match ds.task {
            TaskKind::Graph => {
                let scale = 1.0 / train.len() as f64;
                let mut total = 0.0;
                for &i in &train {
                    total += model.accumulate_gradient(
                        &ds.graphs[i],
                        &props[i],
                        Supervision::Graph(ds.label_of(i)),
                        scale,
                        &mut grads,
                    )?;
                }
                total * scale
            }
            TaskKind::Node => {
                model.accumulate_gradient(&ds.graphs[0], &props[0], Supervision::Nodes(&node_targets), 1.0, &mut grads)?
            }
        };
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch,
                message: format!("loss is {loss}"),
            });
        }
        history.push(loss);
        adam.step(model.params_mut(), grads.params());
    }

    let eval_on = if validation.is_empty() { &train } else { &validation };
    let validation_accuracy = accuracy(&model, ds, eval_on)?;
    let meta = TrainingMeta {
        epochs: cfg.epochs as u32,
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
        train_fraction: cfg.train_fraction,
        validation_accuracy,
    };
    Ok((ModelCheckpoint { model, meta }, history))
}

pub fn train_gnn(ds: &LabeledDataset, cfg: &TrainConfig) -> Result<ModelCheckpoint> {
    Ok(train_gnn_with_history(ds, cfg)?.0)
}

/// Fraction of `instances` whose predicted class equals the label.
pub fn accuracy(model: &GcnModel, ds: &LabeledDataset, instances: &[usize]) -> Result<f64> {
    if instances.is_empty() {
        return Ok(0.0);
    }
    let correct = match ds.task {
        TaskKind::Graph => {
            let mut c = 0;
            for &i in instances {
                if model.predict(&ds.graphs[i], None)?.predicted == ds.label_of(i) {
                    c += 1;
                }
            }
            c
        }
        TaskKind::Node => {
            let emb = model.node_embeddings(&ds.graphs[0])?;
            instances
                .iter()
                .filter(|&&v| model.classify(emb.row(v)).predicted == ds.label_of(v))
                .count()
        }
    };
    Ok(correct as f64 / instances.len() as f64)
}

/// Maximum relative error between analytic gradients and central finite
/// differences over every parameter.
///
/// The relative error of one parameter is `|a - n| / max(|a|, |n|, floor)`
/// with `floor = 1e-4`, which keeps gradients that vanish analytically
/// (dead ReLU units, zero inputs) from dividing round-off by zero.
pub fn gradient_check(model: &GcnModel, g: &Graph, supervision: Supervision<'_>, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(Error::input(format!("epsilon {epsilon} outside (0, 1e-2]")));
    }
    let (_, analytic) = model.loss_and_gradient(g, supervision)?;
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    let analytic_params: Vec<Vec<f64>> = analytic.params().iter().map(|p| p.to_vec()).collect();
    for (t, tensor) in analytic_params.iter().enumerate() {
        for (k, &a) in tensor.iter().enumerate() {
            let original = probe.params_mut()[t][k];
            probe.params_mut()[t][k] = original + epsilon;
            let plus = probe.loss(g, supervision)?;
            probe.params_mut()[t][k] = original - epsilon;
            let minus = probe.loss(g, supervision)?;
            probe.params_mut()[t][k] = original;
            let numeric = (plus - minus) / (2.0 * epsilon);
            worst = worst.max(relative_error(a, numeric));
        }
    }
    Ok(worst)
}

pub(crate) fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}
