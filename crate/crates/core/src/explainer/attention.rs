use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gnn::{cross_entropy, GcnModel};
use crate::matrix::{dot, softmax, Matrix};

/// The explainer's only trainable parameter: the bilinear score matrix `W`
/// in `s_j = m_jᵀ W h`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub weight: Matrix,
}

impl AttentionParams {
    pub fn zeros(dim: usize) -> Self {
        AttentionParams {
            weight: Matrix::zeros(dim, dim),
        }
    }

    /// Glorot-uniform initialization.
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let limit = (6.0 / (2 * dim) as f64).sqrt();
        let data = (0..dim * dim).map(|_| rng.gen_range(-limit..limit)).collect();
        AttentionParams {
            weight: Matrix::from_vec(dim, dim, data),
        }
    }

    pub fn dim(&self) -> usize {
        self.weight.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    pub scores: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `h' = Σ α_k m_k`
    pub combined: Vec<f64>,
}

/// Scores each unit embedding (rows of `units`) against the query `h`,
/// normalizes with a max-shifted softmax and returns the weighted sum.
pub fn attention_forward(query: &[f64], units: &Matrix, params: &AttentionParams) -> Result<AttentionOutput> {
    if units.rows() == 0 {
        return Err(Error::input("attention needs at least one motif"));
    }
    if units.cols() != params.dim() || query.len() != params.dim() {
        return Err(Error::input(format!(
            "attention width {} does not match query {} / units {}",
            params.dim(),
            query.len(),
            units.cols()
        )));
    }
    let wh = params.weight.mul_vec(query);
    let scores: Vec<f64> = (0..units.rows()).map(|j| dot(units.row(j), &wh)).collect();
    let alphas = softmax(&scores);
    let combined = units.vec_mul(&alphas);
    Ok(AttentionOutput {
        scores,
        alphas,
        combined,
    })
}

/// Cross-entropy of `ξ(h')` against `target` and its gradient w.r.t. `W`,
/// with the model frozen.
pub fn attention_loss_and_gradient(
    model: &GcnModel,
    query: &[f64],
    units: &Matrix,
    params: &AttentionParams,
    target: usize,
) -> Result<(f64, Matrix)> {
    let out = attention_forward(query, units, params)?;
    let input = Matrix::from_vec(1, out.combined.len(), out.combined);
    let head = model.head_trace(&input);
    let (loss, d_logits) = cross_entropy(&head.logits, &[target], 1.0)?;
    let d_combined = model.head_input_gradient(&head, &d_logits);
    // ∂L/∂α_j = m_j · ∂L/∂h'
    let g: Vec<f64> = (0..units.rows()).map(|j| dot(units.row(j), d_combined.row(0))).collect();
    let mean: f64 = out.alphas.iter().zip(&g).map(|(a, x)| a * x).sum();
    let d_scores: Vec<f64> = out.alphas.iter().zip(&g).map(|(a, x)| a * (x - mean)).collect();
    // ∂L/∂W = (Σ_j ds_j m_j) hᵀ
    let left = units.vec_mul(&d_scores);
    let mut grad = Matrix::zeros(params.dim(), params.dim());
    for (a, &l) in left.iter().enumerate() {
        for (b, &q) in query.iter().enumerate() {
            grad[(a, b)] = l * q;
        }
    }
    Ok((loss, grad))
}

pub fn attention_loss(model: &GcnModel, query: &[f64], units: &Matrix, params: &AttentionParams, target: usize) -> Result<f64> {
    let out = attention_forward(query, units, params)?;
    let input = Matrix::from_vec(1, out.combined.len(), out.combined);
    Ok(cross_entropy(&model.head_trace(&input).logits, &[target], 1.0)?.0)
}

/// Maximum relative error between the analytic `∂L/∂W` and central finite
/// differences (same error measure as the GCN gradient check).
pub fn attention_gradient_check(
    model: &GcnModel,
    query: &[f64],
    units: &Matrix,
    params: &AttentionParams,
    target: usize,
    epsilon: f64,
) -> Result<f64> {
    let (_, analytic) = attention_loss_and_gradient(model, query, units, params, target)?;
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for k in 0..analytic.as_slice().len() {
        let original = probe.weight.as_slice()[k];
        probe.weight.as_mut_slice()[k] = original + epsilon;
        let plus = attention_loss(model, query, units, &probe, target)?;
        probe.weight.as_mut_slice()[k] = original - epsilon;
        let minus = attention_loss(model, query, units, &probe, target)?;
        probe.weight.as_mut_slice()[k] = original;
        let numeric = (plus - minus) / (2.0 * epsilon);
        worst = worst.max(crate::gnn::relative_error(analytic.as_slice()[k], numeric));
    }
    Ok(worst)
}
