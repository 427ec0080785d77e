use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{allowed_ops, apply_op, sample_op, AugmentError, AugmentOp, ClassPolicy};
use crate::dataio::{ClassId, Dataset, LabeledImage};
use crate::seed::derive_seed;

pub const AUGMENTED_TAG: &str = "augmented";

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentPlan {
    /// Augmented copies emitted per source image.
    pub multiplier: usize,
    pub seed: u64,
    pub policy: ClassPolicy,
}

/// One emitted variant: which source it came from and the op that made it.
#[derive(Clone, Debug, PartialEq)]
pub struct EmissionRecord {
    pub source_index: usize,
    pub variant: usize,
    pub class_id: usize,
    pub op: AugmentOp,
}

/// Emits each source image followed by `multiplier` variants. Each variant
/// applies one op drawn uniformly from the class's permitted set, with
/// parameters uniform within the class caps.
pub fn build_augmented_dataset(
    dataset: &Dataset,
    plan: &AugmentPlan,
) -> Result<(Dataset, Vec<EmissionRecord>), AugmentError> {
    let mut images = Vec::with_capacity(dataset.len() * (1 + plan.multiplier));
    let mut log = Vec::with_capacity(dataset.len() * plan.multiplier);
    for (index, src) in dataset.images.iter().enumerate() {
        images.push(src.clone());
        if plan.multiplier == 0 {
            continue;
        }
        let class = src.class_id.index();
        let ops = allowed_ops(class, &plan.policy)?;
        if ops.is_empty() {
            return Err(AugmentError::OutOfRange {
                op: "policy",
                detail: format!("class {class} permits no ops"),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, &[index as u64]));
        for variant in 0..plan.multiplier {
            let (kind, cap) = ops[rng.random_range(0..ops.len())];
            let op = sample_op(kind, cap, &mut rng);
            let pixels = apply_op(&src.pixels, &op)?;
            images.push(LabeledImage::new(pixels, src.class_id, AUGMENTED_TAG)?);
            log.push(EmissionRecord {
                source_index: index,
                variant,
                class_id: class,
                op,
            });
        }
    }
    Ok((Dataset::new(images), log))
}

pub fn write_emission_log(records: &[EmissionRecord]) -> String {
    let mut s = String::from("# source_index variant class_id op params\n");
    for r in records {
        s.push_str(&format!("{} {} {} {}\n", r.source_index, r.variant, r.class_id, r.op));
    }
    s
}

pub fn parse_emission_log(text: &str) -> Result<Vec<EmissionRecord>, AugmentError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let err = |reason: String| AugmentError::LogParse { line: n + 1, reason };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(4, char::is_whitespace);
        let mut int = |what: &str| -> Result<usize, AugmentError> {
            let t = parts.next().ok_or_else(|| err(format!("missing {what}")))?;
            t.parse().map_err(|e| err(format!("{what} {t:?}: {e}")))
        };
        let source_index = int("source_index")?;
        let variant = int("variant")?;
        let class_id = int("class_id")?;
        ClassId::new(class_id).map_err(|e| err(e.to_string()))?;
        let op = parts
            .next()
            .ok_or_else(|| err("missing op".into()))?
            .parse()
            .map_err(err)?;
        out.push(EmissionRecord {
            source_index,
            variant,
            class_id,
            op,
        });
    }
    Ok(out)
}
