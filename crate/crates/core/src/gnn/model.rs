use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datasets::TaskKind;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{argmax, softmax, Matrix};

pub const HIDDEN_DIM: usize = 64;
pub const CONV_LAYERS: usize = 3;

/// Symmetric renormalized adjacency `D̃^{-1/2} (A + I) D̃^{-1/2}` as a dense
/// matrix.
pub fn normalize_adjacency(g: &Graph) -> Matrix {
    let prop = Propagator::new(g);
    let n = g.node_count();
    let mut out = Matrix::zeros(n, n);
    for (i, row) in prop.rows.iter().enumerate() {
        for &(j, w) in row {
            out[(i, j)] = w;
        }
    }
    out
}

/// Sparse form of the normalized adjacency, applied as `Â · X`.
#[derive(Debug, Clone)]
pub struct Propagator {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Propagator {
    pub fn new(g: &Graph) -> Self {
        let inv_sqrt: Vec<f64> = (0..g.node_count())
            .map(|i| 1.0 / ((g.degree(i) + 1) as f64).sqrt())
            .collect();
        let rows = (0..g.node_count())
            .map(|i| {
                let mut row = Vec::with_capacity(g.degree(i) + 1);
                let mut self_done = false;
                for &j in g.neighbors(i) {
                    if !self_done && j > i {
                        row.push((i, inv_sqrt[i] * inv_sqrt[i]));
                        self_done = true;
                    }
                    row.push((j, inv_sqrt[i] * inv_sqrt[j]));
                }
                if !self_done {
                    row.push((i, inv_sqrt[i] * inv_sqrt[i]));
                }
                row
            })
            .collect();
        Propagator { rows }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.rows(), self.rows.len());
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for (i, row) in self.rows.iter().enumerate() {
            let dst = out.row_mut(i);
            for &(j, w) in row {
                for (d, s) in dst.iter_mut().zip(x.row(j)) {
                    *d += w * s;
                }
            }
        }
        out
    }
}

/// Affine layer `x · W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Dense {
    fn glorot<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)).collect();
        Dense {
            weight: Matrix::from_vec(fan_in, fan_out, data),
            bias: vec![0.0; fan_out],
        }
    }

    fn zeros_like(&self) -> Self {
        Dense {
            weight: Matrix::zeros(self.weight.rows(), self.weight.cols()),
            bias: vec![0.0; self.bias.len()],
        }
    }

    fn forward(&self, x: &Matrix) -> Matrix {
        let mut z = x.matmul(&self.weight);
        z.add_row_vector(&self.bias);
        z
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }
}

/// Three graph-convolution layers (the feature extractor) followed by a
/// two-layer MLP head (the classifier). Graph tasks mean-pool node
/// embeddings before the head.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub task: TaskKind,
    pub conv: Vec<Dense>,
    pub mlp: Vec<Dense>,
}

/// Output of [`GcnModel::classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub predicted: usize,
}

/// Intermediate values of the convolution stack kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct ConvTrace {
    /// `Â · H_{l-1}` per layer.
    propagated: Vec<Matrix>,
    /// `Â · H_{l-1} · W_l + b_l` per layer.
    pre: Vec<Matrix>,
    pub(crate) output: Matrix,
}

#[derive(Debug, Clone)]
pub(crate) struct HeadTrace {
    hidden_pre: Matrix,
    hidden: Matrix,
    pub(crate) logits: Matrix,
}

/// What the loss is measured against.
#[derive(Debug, Clone, Copy)]
pub enum Supervision<'a> {
    /// Graph label of a graph classification instance.
    Graph(usize),
    /// `(node, label)` pairs of a node classification graph; loss is their mean.
    Nodes(&'a [(usize, usize)]),
}

impl GcnModel {
    /// Default architecture: `input → 64 → 64 → 64` convolutions and a
    /// `64 → 64 → classes` head, Glorot-uniform weights and zero biases.
    pub fn new(task: TaskKind, input_dim: usize, class_count: usize, seed: u64) -> Self {
        Self::with_dims(task, input_dim, &[HIDDEN_DIM; CONV_LAYERS], HIDDEN_DIM, class_count, seed)
    }

    pub fn with_dims(
        task: TaskKind,
        input_dim: usize,
        conv_dims: &[usize],
        mlp_hidden: usize,
        class_count: usize,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut conv = Vec::with_capacity(conv_dims.len());
        let mut fan_in = input_dim;
        for &d in conv_dims {
            conv.push(Dense::glorot(fan_in, d, &mut rng));
            fan_in = d;
        }
        let mlp = vec![
            Dense::glorot(fan_in, mlp_hidden, &mut rng),
            Dense::glorot(mlp_hidden, class_count, &mut rng),
        ];
        GcnModel { task, conv, mlp }
    }

    /// Validates that layer dimensions chain.
    pub fn validate(&self) -> Result<()> {
        if self.conv.is_empty() || self.mlp.is_empty() {
            return Err(Error::input("model needs at least one convolution and one head layer"));
        }
        let layers: Vec<&Dense> = self.conv.iter().chain(&self.mlp).collect();
        for w in layers.windows(2) {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::input("layer dimensions do not chain"));
            }
        }
        for l in &layers {
            if l.bias.len() != l.out_dim() {
                return Err(Error::input("bias length does not match layer width"));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.conv[0].in_dim()
    }

    pub fn embedding_dim(&self) -> usize {
        self.conv.last().expect("validated").out_dim()
    }

    pub fn class_count(&self) -> usize {
        self.mlp.last().expect("validated").out_dim()
    }

    pub fn zeros_like(&self) -> Self {
        GcnModel {
            task: self.task,
            conv: self.conv.iter().map(Dense::zeros_like).collect(),
            mlp: self.mlp.iter().map(Dense::zeros_like).collect(),
        }
    }

    /// Parameter tensors in a fixed order: each layer's weight then bias,
    /// convolutions first.
    pub fn params(&self) -> Vec<&[f64]> {
        self.conv
            .iter()
            .chain(&self.mlp)
            .flat_map(|l| [l.weight.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.conv
            .iter_mut()
            .chain(self.mlp.iter_mut())
            .flat_map(|l| [l.weight.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &GcnModel, scale: f64) {
        for (dst, src) in self.params_mut().into_iter().zip(other.params()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    fn check_input(&self, g: &Graph) -> Result<()> {
        if g.feature_width() != self.input_dim() {
            return Err(Error::input(format!(
                "graph has feature width {}, model expects {}",
                g.feature_width(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn conv_trace(&self, g: &Graph, prop: &Propagator) -> Result<ConvTrace> {
        self.check_input(g)?;
        let mut h = g.features().clone();
        let mut propagated = Vec::with_capacity(self.conv.len());
        let mut pre = Vec::with_capacity(self.conv.len());
        for layer in &self.conv {
            let p = prop.apply(&h);
            let z = layer.forward(&p);
            h = z.relu();
            propagated.push(p);
            pre.push(z);
        }
        Ok(ConvTrace {
            propagated,
            pre,
            output: h,
        })
    }

    /// Final-layer node embeddings, one row per node.
    pub fn node_embeddings(&self, g: &Graph) -> Result<Matrix> {
        Ok(self.conv_trace(g, &Propagator::new(g))?.output)
    }

    /// Node embeddings plus the mean-pooled graph embedding for graph tasks.
    pub fn gcn_forward(&self, g: &Graph) -> Result<(Matrix, Option<Vec<f64>>)> {
        let nodes = self.node_embeddings(g)?;
        let pooled = match self.task {
            TaskKind::Graph => Some(nodes.column_means()),
            TaskKind::Node => None,
        };
        Ok((nodes, pooled))
    }

    /// The feature extractor's output for a graph task: mean of final node
    /// embeddings.
    pub fn graph_embedding(&self, g: &Graph) -> Result<Vec<f64>> {
        if g.node_count() == 0 {
            return Err(Error::input("cannot pool an empty graph"));
        }
        Ok(self.node_embeddings(g)?.column_means())
    }

    pub(crate) fn head_trace(&self, input: &Matrix) -> HeadTrace {
        let hidden_pre = self.mlp[0].forward(input);
        let hidden = hidden_pre.relu();
        let mut logits = hidden.clone();
        for layer in &self.mlp[1..] {
            logits = layer.forward(&logits);
        }
        HeadTrace {
            hidden_pre,
            hidden,
            logits,
        }
    }

    /// Classifier head on one embedding.
    pub fn classify(&self, embedding: &[f64]) -> Classification {
        let input = Matrix::from_vec(1, embedding.len(), embedding.to_vec());
        let logits = self.head_trace(&input).logits.row(0).to_vec();
        let probabilities = softmax(&logits);
        let predicted = argmax(&probabilities);
        Classification {
            logits,
            probabilities,
            predicted,
        }
    }

    /// Full model prediction for a graph instance (graph task) or one node.
    pub fn predict(&self, g: &Graph, node: Option<usize>) -> Result<Classification> {
        match (self.task, node) {
            (TaskKind::Graph, _) => Ok(self.classify(&self.graph_embedding(g)?)),
            (TaskKind::Node, Some(v)) => {
                if v >= g.node_count() {
                    return Err(Error::input(format!("node {v} out of range")));
                }
                Ok(self.classify(self.node_embeddings(g)?.row(v)))
            }
            (TaskKind::Node, None) => Err(Error::input("node task prediction needs a target node")),
        }
    }

    /// Backpropagates `d_logits` through the head. Accumulates parameter
    /// gradients into `grads` and returns the gradient w.r.t. the head input.
    pub(crate) fn head_backward(&self, input: &Matrix, trace: &HeadTrace, d_logits: &Matrix, grads: &mut GcnModel) -> Matrix {
        assert_eq!(self.mlp.len(), 2, "head backward assumes two layers");
        let out = &self.mlp[1];
        accumulate(&mut grads.mlp[1], &trace.hidden, d_logits);
        let mut d_hidden = d_logits.matmul_t(&out.weight);
        relu_mask(&mut d_hidden, &trace.hidden_pre);
        accumulate(&mut grads.mlp[0], input, &d_hidden);
        d_hidden.matmul_t(&self.mlp[0].weight)
    }

    /// Gradient of the head's input for a fixed `d_logits`, without
    /// touching parameter gradients.
    pub(crate) fn head_input_gradient(&self, trace: &HeadTrace, d_logits: &Matrix) -> Matrix {
        let mut d_hidden = d_logits.matmul_t(&self.mlp[1].weight);
        relu_mask(&mut d_hidden, &trace.hidden_pre);
        d_hidden.matmul_t(&self.mlp[0].weight)
    }

    pub(crate) fn conv_backward(&self, prop: &Propagator, trace: &ConvTrace, d_output: Matrix, grads: &mut GcnModel) {
        let mut d_h = d_output;
        for l in (0..self.conv.len()).rev() {
            relu_mask(&mut d_h, &trace.pre[l]);
            accumulate(&mut grads.conv[l], &trace.propagated[l], &d_h);
            if l > 0 {
                // Â is symmetric, so Âᵀ · (dZ · Wᵀ) = Â · (dZ · Wᵀ).
                d_h = prop.apply(&d_h.matmul_t(&self.conv[l].weight));
            }
        }
    }

    /// Cross-entropy loss and its exact gradient for one graph.
    pub fn loss_and_gradient(&self, g: &Graph, supervision: Supervision<'_>) -> Result<(f64, GcnModel)> {
        let prop = Propagator::new(g);
        let mut grads = self.zeros_like();
        let loss = self.accumulate_gradient(g, &prop, supervision, 1.0, &mut grads)?;
        Ok((loss, grads))
    }

    /// Adds `scale * ∂loss/∂θ` into `grads` and returns the unscaled loss.
    pub(crate) fn accumulate_gradient(
        &self,
        g: &Graph,
        prop: &Propagator,
        supervision: Supervision<'_>,
        scale: f64,
        grads: &mut GcnModel,
    ) -> Result<f64> {
        let trace = self.conv_trace(g, prop)?;
        let n = g.node_count();
        match (self.task, supervision) {
            (TaskKind::Graph, Supervision::Graph(label)) => {
                if n == 0 {
                    return Err(Error::input("cannot pool an empty graph"));
                }
                let pooled = trace.output.column_means();
                let input = Matrix::from_vec(1, pooled.len(), pooled);
                let head = self.head_trace(&input);
                let (loss, d_logits) = cross_entropy(&head.logits, &[label], scale)?;
                let d_pooled = self.head_backward(&input, &head, &d_logits, grads);
                let mut d_out = Matrix::zeros(n, self.embedding_dim());
                let inv = 1.0 / n as f64;
                for i in 0..n {
                    for (d, s) in d_out.row_mut(i).iter_mut().zip(d_pooled.row(0)) {
                        *d = s * inv;
                    }
                }
                self.conv_backward(prop, &trace, d_out, grads);
                Ok(loss)
            }
            (TaskKind::Node, Supervision::Nodes(targets)) => {
                if targets.is_empty() {
                    return Err(Error::input("no supervised nodes"));
                }
                let nodes: Vec<usize> = targets.iter().map(|t| t.0).collect();
                if let Some(&bad) = nodes.iter().find(|&&v| v >= n) {
                    return Err(Error::input(format!("node {bad} out of range")));
                }
                let labels: Vec<usize> = targets.iter().map(|t| t.1).collect();
                let input = trace.output.select_rows(&nodes);
                let head = self.head_trace(&input);
                let (loss, d_logits) = cross_entropy(&head.logits, &labels, scale / nodes.len() as f64)?;
                let d_rows = self.head_backward(&input, &head, &d_logits, grads);
                let mut d_out = Matrix::zeros(n, self.embedding_dim());
                for (r, &v) in nodes.iter().enumerate() {
                    for (d, s) in d_out.row_mut(v).iter_mut().zip(d_rows.row(r)) {
                        *d += s;
                    }
                }
                self.conv_backward(prop, &trace, d_out, grads);
                Ok(loss / nodes.len() as f64)
            }
            _ => Err(Error::input("supervision does not match the model's task kind")),
        }
    }

    /// Loss only, for finite differences.
    pub fn loss(&self, g: &Graph, supervision: Supervision<'_>) -> Result<f64> {
        let trace = self.conv_trace(g, &Propagator::new(g))?;
        match (self.task, supervision) {
            (TaskKind::Graph, Supervision::Graph(label)) => {
                let pooled = trace.output.column_means();
                let head = self.head_trace(&Matrix::from_vec(1, pooled.len(), pooled));
                Ok(cross_entropy(&head.logits, &[label], 1.0)?.0)
            }
            (TaskKind::Node, Supervision::Nodes(targets)) => {
                let nodes: Vec<usize> = targets.iter().map(|t| t.0).collect();
                let labels: Vec<usize> = targets.iter().map(|t| t.1).collect();
                let head = self.head_trace(&trace.output.select_rows(&nodes));
                Ok(cross_entropy(&head.logits, &labels, 1.0)?.0 / nodes.len() as f64)
            }
            _ => Err(Error::input("supervision does not match the model's task kind")),
        }
    }
}

fn accumulate(grad: &mut Dense, input: &Matrix, d_out: &Matrix) {
    let gw = input.t_matmul(d_out);
    for (g, v) in grad.weight.as_mut_slice().iter_mut().zip(gw.as_slice()) {
        *g += v;
    }
    for (g, v) in grad.bias.iter_mut().zip(d_out.column_sums()) {
        *g += v;
    }
}

fn relu_mask(d: &mut Matrix, pre: &Matrix) {
    for (g, &z) in d.as_mut_slice().iter_mut().zip(pre.as_slice()) {
        if z <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Summed cross-entropy over rows and `scale * (softmax - onehot)`.
pub(crate) fn cross_entropy(logits: &Matrix, labels: &[usize], scale: f64) -> Result<(f64, Matrix)> {
    let mut loss = 0.0;
    let mut d = Matrix::zeros(logits.rows(), logits.cols());
    for (r, &y) in labels.iter().enumerate() {
        if y >= logits.cols() {
            return Err(Error::input(format!("label {y} outside {} classes", logits.cols())));
        }
        let z = logits.row(r);
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - z[y];
        let p = softmax(z);
        for (k, (dv, pv)) in d.row_mut(r).iter_mut().zip(&p).enumerate() {
            *dv = scale * (pv - if k == y { 1.0 } else { 0.0 });
        }
    }
    Ok((loss, d))
}
