//! Grayscale multi-scale CNN classifier with pretraining and fine-tuning.

mod io;
mod net;
mod train;

pub use io::CLF_MAGIC;
pub use net::{build_classifier, classifier_forward, ClassifierNet, CONCAT_FEATURES};
pub use train::{predict_batch, predict_dataset, train_classifier, ClfCheckpoint, Prediction, Stage, TrainConfig};

use thiserror::Error;

use crate::checkpoint::CheckpointError;
use crate::numcore::NumError;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("fine-tuning needs a pretrained checkpoint")]
    FinetuneWithoutCheckpoint,
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}
