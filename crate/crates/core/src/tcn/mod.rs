//! Sequence-to-sequence 3D temporal convolutional network.
//!
//! Tensors are `[channel][range][doppler][frame]` with frames contiguous.
//! Time is convolved with doubling dilation; range and Doppler are padded to
//! SAME and optionally strided.

mod checkpoint;
mod config;
mod conv;
mod gradcheck;
mod infer;
mod loss;
mod model;
mod scalar;
mod train;

use thiserror::Error;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use config::{receptive_field, LossParams, ModelConfig, TrainConfig};
pub use conv::{conv_backward, conv_forward, ConvGeom};
pub use gradcheck::{grad_check, GradCheckReport};
pub use infer::{predict_meal, predict_probs, DEFAULT_MAX_CHUNK};
pub use loss::{loss_and_grad, loss_cls, loss_tmse, loss_total, PROB_FLOOR};
pub use model::{build_model, forward, ConvLayer, Model, ProbSequence, ResidualLayer};
pub use scalar::Scalar;
pub use train::{evaluate_loss, train, train_observed, write_history, Adam, EpochRecord, Meal, TrainedModel};

#[derive(Debug, Error)]
pub enum TcnError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input is {actual:?} (doppler, range), model expects {expected:?}")]
    InputShape { expected: (usize, usize), actual: (usize, usize) },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("{0}")]
    Empty(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

impl TcnError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        TcnError::Io { path: path.to_path_buf(), source }
    }
}
