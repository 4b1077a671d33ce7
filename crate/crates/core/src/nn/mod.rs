//! Small feed-forward networks trained with a masked squared error.

mod checkpoint;
mod network;
mod optim;
mod train;

use thiserror::Error;

pub use checkpoint::{read_checkpoint, write_checkpoint, write_loss_csv, Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use network::{backward, forward, ForwardPass, Gradients, Layer, LayerParams, NetworkParams, NetworkSpec, Shape};
pub use optim::{adam_step, masked_mse, AdamConfig};
pub use train::{batch_gradients, predict, train, train_from, AugmentHook, TrainConfig, TrainOutcome};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("invalid network: {0}")]
    InvalidSpec(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("backward called without a matching forward pass")]
    MissingForward,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
