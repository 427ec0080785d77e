//! Image ingestion, canonical preprocessing, stratified splitting and the
//! SNF dataset container.

mod classes;
mod dataset;
mod decode;
mod ingest;
mod preprocess;
mod snf;
mod split;
pub mod toy;

pub use classes::{ClassId, SignClass, NUM_CLASSES, SIGN_CLASSES};
pub use dataset::{Dataset, LabeledImage};
pub use decode::{decode_image, decode_png, decode_ppm, encode_png, encode_ppm, ImageFormat, RgbImage};
pub use ingest::ingest_directory;
pub use preprocess::{denormalize, luma, normalize, preprocess, resize_bilinear, IMAGE_SIZE};
pub use snf::{read_snf, snf_len, write_snf, SNF_HEADER_LEN, SNF_MAGIC, SNF_VERSION};
pub use split::{split_dataset, stratified_test_counts, DatasetSplit};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),
    #[error("size mismatch: expected {expected} bytes, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("record {index}: label {label} is not a class id")]
    LabelOutOfRange { index: usize, label: u8 },
    #[error("unknown class id {0}")]
    UnknownClass(usize),
    #[error("class {class} has {count} images; at least 2 are needed to split")]
    ClassTooSmall { class: ClassId, count: usize },
    #[error("test fraction {0} must lie in (0, 1)")]
    InvalidFraction(f64),
    #[error("non-canonical image: {0}")]
    NonCanonical(String),
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<DataError>,
    },
    #[error("i/o: {0}")]
    Io(String),
}
