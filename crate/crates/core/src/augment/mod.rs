//! Classical augmentation transforms and the per-class safety policy.

mod build;
mod geometry;
mod ops;
mod photometric;
mod policy;

pub use build::{
    build_augmented_dataset, parse_emission_log, write_emission_log, AugmentPlan, EmissionRecord, AUGMENTED_TAG,
};
pub use geometry::{apply_homography, homography_for, homography_from_points, warp};
pub use ops::{apply_op, sample_op, AugmentOp, FlipAxis, OpKind};
pub use photometric::{adjust_lighting, flip, salt_pepper};
pub use policy::{allowed_ops, ClassPolicy};

use thiserror::Error;

use crate::dataio::DataError;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("{op} parameter out of range: {detail}")]
    OutOfRange { op: &'static str, detail: String },
    #[error("{0} is not a geometric op")]
    NotGeometric(&'static str),
    #[error("degenerate point correspondences")]
    Degenerate,
    #[error("singular homography")]
    Singular,
    #[error("policy line {line}: {reason}")]
    PolicyParse { line: usize, reason: String },
    #[error("emission log line {line}: {reason}")]
    LogParse { line: usize, reason: String },
    #[error("image shape {0:?} is not [h, w, c]")]
    BadImage(Vec<usize>),
    #[error(transparent)]
    Data(#[from] DataError),
}
