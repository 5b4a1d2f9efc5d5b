//! Dense graph-convolution classifier with hand-derived gradients.

mod checkpoint;
mod model;
mod optim;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, ModelCheckpoint, TrainingMeta, MODEL_FORMAT_VERSION};
pub(crate) use checkpoint::{decode_task, encode_task};
pub use model::{
    normalize_adjacency, Classification, Dense, GcnModel, Propagator, Supervision, CONV_LAYERS, HIDDEN_DIM,
};
pub(crate) use model::cross_entropy;
pub use optim::Adam;
pub use train::{accuracy, gradient_check, train_gnn, train_gnn_with_history, validation_indices, TrainConfig};
pub(crate) use train::relative_error;
