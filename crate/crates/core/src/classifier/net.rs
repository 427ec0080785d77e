use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataio::{IMAGE_SIZE, NUM_CLASSES};
use crate::numcore::nn::{bind, Binding};
use crate::numcore::{Activation, Float, NumError, Parameter, Tape, Var};
use crate::seed::derive_seed;

const KERNEL: usize = 5;
const C1: usize = 32;
const C2: usize = 64;
const HIDDEN: usize = 100;
const POOLED: usize = IMAGE_SIZE / 4;

/// Length of the multi-scale feature vector: pooled stage-1 maps followed by
/// stage-2 maps.
pub const CONCAT_FEATURES: usize = POOLED * POOLED * (C1 + C2);

/// Parameters in forward order: conv1 kernel/bias, conv2 kernel/bias,
/// fc1 weights/bias, fc2 weights/bias.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierNet<T> {
    pub params: Vec<Parameter<T>>,
}

pub fn build_classifier<T: Float>(seed: u64) -> ClassifierNet<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0]));
    let params = vec![
        Parameter::gaussian("conv1.k", &[KERNEL, KERNEL, 1, C1], &mut rng),
        Parameter::constant("conv1.b", &[C1], 0.0),
        Parameter::gaussian("conv2.k", &[KERNEL, KERNEL, C1, C2], &mut rng),
        Parameter::constant("conv2.b", &[C2], 0.0),
        Parameter::gaussian("fc1.w", &[CONCAT_FEATURES, HIDDEN], &mut rng),
        Parameter::constant("fc1.b", &[HIDDEN], 0.0),
        Parameter::gaussian("fc2.w", &[HIDDEN, NUM_CLASSES], &mut rng),
        Parameter::constant("fc2.b", &[NUM_CLASSES], 0.0),
    ];
    ClassifierNet { params }
}

/// Logits `[n, 10]` for images `[n, 28, 28, 1]` given the eight parameter
/// leaves in [`ClassifierNet`] order.
pub fn classifier_forward<T: Float>(tape: &mut Tape<T>, x: Var, p: &[Var]) -> Result<Var, NumError> {
    if p.len() != 8 {
        return Err(NumError::InvalidParameter(format!(
            "expected 8 parameters, got {}",
            p.len()
        )));
    }
    let pad = KERNEL / 2;
    let h = tape.conv2d(x, p[0], 1, pad)?;
    let h = tape.bias_add(h, p[1])?;
    let h = tape.activation(h, Activation::Relu)?;
    let stage1 = tape.max_pool2d(h, 2, 2)?;
    let h = tape.conv2d(stage1, p[2], 1, pad)?;
    let h = tape.bias_add(h, p[3])?;
    let h = tape.activation(h, Activation::Relu)?;
    let stage2 = tape.max_pool2d(h, 2, 2)?;
    let skip = tape.max_pool2d(stage1, 2, 2)?;
    let skip = tape.flatten(skip)?;
    let main = tape.flatten(stage2)?;
    let features = tape.concat(&[skip, main])?;
    let h = tape.dense(features, p[4], p[5])?;
    let h = tape.activation(h, Activation::Relu)?;
    tape.dense(h, p[6], p[7])
}

impl<T: Float> ClassifierNet<T> {
    /// Records the parameters as leaves and returns `(logits, leaves)`.
    pub fn forward(&self, tape: &mut Tape<T>, x: Var, binding: Binding) -> Result<(Var, Vec<Var>), NumError> {
        let leaves: Vec<Var> = self.params.iter().map(|p| bind(tape, p, binding)).collect();
        let logits = classifier_forward(tape, x, &leaves)?;
        Ok((logits, leaves))
    }

    /// Indices of weight tensors (kernels and dense matrices), the targets
    /// of the elastic-net penalty.
    pub fn weight_indices() -> [usize; 4] {
        [0, 2, 4, 6]
    }

    pub fn cast<U: Float>(&self) -> ClassifierNet<U> {
        ClassifierNet {
            params: self
                .params
                .iter()
                .map(|p| Parameter::new(p.name.clone(), p.value.cast()))
                .collect(),
        }
    }
}
