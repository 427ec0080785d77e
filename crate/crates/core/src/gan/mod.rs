//! Per-class DCGAN: construction, adversarial training and labeled sampling.

mod io;
mod nets;
mod train;

pub use io::{loss_history_csv, GAN_MAGIC};
pub use nets::{audit_architecture, build_gan, DiscriminatorNet, GeneratorNet};
pub use train::{
    batches_per_epoch, discriminator_accuracy, discriminator_step, generator_step, latent_batch, sample_generator,
    synthesize_labeled_set, train_gan, train_gan_with, GanCheckpoint, SYNTHETIC_TAG,
};

use thiserror::Error;

use crate::checkpoint::CheckpointError;
use crate::dataio::{ClassId, DataError};
use crate::numcore::NumError;

/// Side length of the square grayscale images the GAN models.
pub const GAN_IMAGE_SIZE: usize = 28;

#[derive(Clone, Debug, PartialEq)]
pub struct GanConfig {
    pub latent_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub leaky_alpha: f64,
    pub seed: u64,
    pub class_id: ClassId,
}

impl GanConfig {
    pub fn new(class_id: ClassId, seed: u64) -> Self {
        Self {
            latent_dim: 100,
            epochs: 25,
            batch_size: 64,
            learning_rate: 2e-4,
            beta1: 0.5,
            leaky_alpha: 0.2,
            seed,
            class_id,
        }
    }

    pub fn validate(&self) -> Result<(), GanError> {
        let bad = |m: String| Err(GanError::InvalidConfig(m));
        if self.latent_dim == 0 || self.epochs == 0 {
            return bad("latent_dim and epochs must be positive".into());
        }
        if self.batch_size < 2 {
            return bad(format!(
                "batch_size {} < 2 (batch norm needs two samples)",
                self.batch_size
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return bad(format!("beta1 {}", self.beta1));
        }
        if !(self.leaky_alpha > 0.0 && self.leaky_alpha < 1.0) {
            return bad(format!("leaky_alpha {}", self.leaky_alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GanError {
    #[error("invalid GAN config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("image {index} has class {found}, GAN models class {expected}")]
    MixedLabels {
        index: usize,
        expected: ClassId,
        found: ClassId,
    },
    #[error("{images} images are fewer than one batch of {batch_size}")]
    TooFewImages { images: usize, batch_size: usize },
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize },
    #[error("duplicate checkpoint for class {0}")]
    DuplicateClass(ClassId),
    #[error("checkpoint does not match config: {0}")]
    ResumeMismatch(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}
