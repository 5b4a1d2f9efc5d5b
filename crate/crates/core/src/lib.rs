//! Motif-based explanations for graph convolutional classifiers.
//!
//! A frozen GCN is split into its convolutional feature extractor and its
//! MLP head. Each instance's computational graph is broken into motifs
//! (merged cycles and bridge edges), every motif is embedded by the frozen
//! extractor, and a single bilinear attention matrix learns which motif
//! embeddings reproduce the model's prediction. Motifs whose attention
//! weight exceeds `sigma / t` form the explanation.

pub mod cli;
mod codec;
pub mod datasets;
pub mod error;
pub mod evaluation;
pub mod explainer;
pub mod gnn;
pub mod graph;
pub mod matrix;
pub mod motifs;

pub use error::{Error, Result};
