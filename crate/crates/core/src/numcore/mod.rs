//! Tensor and differentiable-operator core shared by the GAN and the classifier.

mod adam;
mod float;
mod kernels;
mod loss;
pub mod nn;
mod param;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use float::Float;
pub use loss::{
    binary_cross_entropy, binary_cross_entropy_with_logits, elastic_net_penalty, softmax, softmax_cross_entropy,
    BCE_CLAMP,
};
pub use param::{Parameter, INIT_STD};
pub use tape::{Activation, BatchNormConfig, BatchNormMode, Gradients, RunningStats, Tape, Var};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("invalid shape {0:?}: dimensions must be positive")]
    InvalidShape(Vec<usize>),
    #[error("shape {shape:?} needs {} elements, got {len}", shape.iter().product::<usize>())]
    ElementCount { shape: Vec<usize>, len: usize },
    #[error("{op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("penalty weights must be non-negative, got lambda1={lambda1} lambda2={lambda2}")]
    NegativeLambda { lambda1: f64, lambda2: f64 },
    #[error("batch norm in train mode needs a batch of at least 2, got {0}")]
    BatchTooSmall(usize),
    #[error("backward needs a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
