//! Traffic-sign data synthesis with per-class DCGANs, class-aware classical
//! augmentation, and a grayscale multi-scale CNN classifier trained in two
//! stages (pretraining, then fine-tuning on an extended dataset).

pub mod augment;
pub mod checkpoint;
pub mod classifier;
pub mod dataio;
pub mod evalreport;
pub mod gan;
pub mod numcore;
pub mod seed;
