use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GanConfig, GAN_IMAGE_SIZE};
use crate::numcore::nn::{Layer, Sequential};
use crate::numcore::{Activation, BatchNormConfig, Parameter, RunningStats};
use crate::seed::derive_seed;

const BASE: usize = GAN_IMAGE_SIZE / 4;
const G_CHANNELS: usize = 128;
const HIDDEN_CHANNELS: usize = 64;
const KERNEL: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorNet {
    pub net: Sequential<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorNet {
    pub net: Sequential<f32>,
}

fn batch_norm(name: &str, channels: usize) -> Layer<f32> {
    Layer::BatchNorm {
        gamma: Parameter::constant(format!("{name}.gamma"), &[channels], 1.0),
        beta: Parameter::constant(format!("{name}.beta"), &[channels], 0.0),
        running: RunningStats::new(channels),
        config: BatchNormConfig::default(),
    }
}

/// Generator: dense projection to 7×7×128, then two stride-2 transposed
/// convolutions (7→14→28) with batch norm and ReLU, tanh output.
/// Discriminator: two stride-2 convolutions (28→14→7) with LeakyReLU, batch
/// norm on the second, and a single sigmoid unit.
pub fn build_gan(config: &GanConfig) -> (GeneratorNet, DiscriminatorNet) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[0]));
    let projected = BASE * BASE * G_CHANNELS;
    let generator = Sequential::new(vec![
        Layer::Dense {
            weights: Parameter::gaussian("project.w", &[config.latent_dim, projected], &mut rng),
            bias: Parameter::constant("project.b", &[projected], 0.0),
        },
        Layer::Reshape(vec![BASE, BASE, G_CHANNELS]),
        batch_norm("bn0", G_CHANNELS),
        Layer::Activation(Activation::Relu),
        Layer::ConvTranspose2d {
            kernel: Parameter::gaussian("deconv1.k", &[KERNEL, KERNEL, HIDDEN_CHANNELS, G_CHANNELS], &mut rng),
            bias: None,
            stride: 2,
            padding: 1,
        },
        batch_norm("bn1", HIDDEN_CHANNELS),
        Layer::Activation(Activation::Relu),
        Layer::ConvTranspose2d {
            kernel: Parameter::gaussian("deconv2.k", &[KERNEL, KERNEL, 1, HIDDEN_CHANNELS], &mut rng),
            bias: Some(Parameter::constant("deconv2.b", &[1], 0.0)),
            stride: 2,
            padding: 1,
        },
        Layer::Activation(Activation::Tanh),
    ]);
    let leaky = Activation::LeakyRelu(config.leaky_alpha);
    let discriminator = Sequential::new(vec![
        Layer::Conv2d {
            kernel: Parameter::gaussian("conv1.k", &[KERNEL, KERNEL, 1, HIDDEN_CHANNELS], &mut rng),
            bias: Some(Parameter::constant("conv1.b", &[HIDDEN_CHANNELS], 0.0)),
            stride: 2,
            padding: 1,
        },
        Layer::Activation(leaky),
        Layer::Conv2d {
            kernel: Parameter::gaussian("conv2.k", &[KERNEL, KERNEL, HIDDEN_CHANNELS, G_CHANNELS], &mut rng),
            bias: None,
            stride: 2,
            padding: 1,
        },
        batch_norm("bn2", G_CHANNELS),
        Layer::Activation(leaky),
        Layer::Flatten,
        Layer::Dense {
            weights: Parameter::gaussian("head.w", &[BASE * BASE * G_CHANNELS, 1], &mut rng),
            bias: Parameter::constant("head.b", &[1], 0.0),
        },
        Layer::Activation(Activation::Sigmoid),
    ]);
    (GeneratorNet { net: generator }, DiscriminatorNet { net: discriminator })
}

fn is_activation(layer: &Layer<f32>) -> Option<Activation> {
    match layer {
        Layer::Activation(a) => Some(*a),
        _ => None,
    }
}

/// Structural check of the five DCGAN guidelines. Returns one message per
/// violation; an empty list means the pair conforms.
pub fn audit_architecture(g: &GeneratorNet, d: &DiscriminatorNet) -> Vec<String> {
    let mut v = Vec::new();
    let (gl, dl) = (&g.net.layers, &d.net.layers);
    for (who, layers) in [("generator", gl), ("discriminator", dl)] {
        if layers.iter().any(|l| matches!(l, Layer::MaxPool2d { .. })) {
            v.push(format!("{who} contains a pooling layer"));
        }
        if !layers.iter().any(|l| matches!(l, Layer::BatchNorm { .. })) {
            v.push(format!("{who} has no batch norm"));
        }
    }
    let strided = |l: &Layer<f32>| matches!(l, Layer::Conv2d { stride, .. } if *stride > 1);
    if !dl.iter().any(strided) {
        v.push("discriminator has no strided convolution".into());
    }
    if !gl
        .iter()
        .any(|l| matches!(l, Layer::ConvTranspose2d { stride, .. } if *stride > 1))
    {
        v.push("generator has no fractional-strided convolution".into());
    }

    let dense_at: Vec<usize> = dl
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, Layer::Dense { .. }))
        .map(|(i, _)| i)
        .collect();
    let last_param = dl.iter().rposition(|l| !l.parameters().is_empty());
    if dense_at.iter().any(|&i| Some(i) != last_param) {
        v.push("discriminator has a hidden fully connected layer".into());
    }
    if let Some(Layer::Dense { weights, .. }) = last_param.map(|i| &dl[i]) {
        if weights.value.dim(1) != 1 {
            v.push("discriminator head is not a single unit".into());
        }
    }
    let g_dense: Vec<usize> = gl
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, Layer::Dense { .. }))
        .map(|(i, _)| i)
        .collect();
    if g_dense.iter().any(|&i| i != 0) {
        v.push("generator has a hidden fully connected layer".into());
    }

    let g_acts: Vec<Activation> = gl.iter().filter_map(is_activation).collect();
    match g_acts.split_last() {
        Some((last, hidden)) => {
            if *last != Activation::Tanh || !matches!(gl.last(), Some(Layer::Activation(Activation::Tanh))) {
                v.push("generator output is not tanh".into());
            }
            if hidden.iter().any(|a| *a != Activation::Relu) {
                v.push("generator hidden activation is not ReLU".into());
            }
        }
        None => v.push("generator has no activations".into()),
    }
    let d_acts: Vec<Activation> = dl.iter().filter_map(is_activation).collect();
    match d_acts.split_last() {
        Some((last, hidden)) => {
            if *last != Activation::Sigmoid || !matches!(dl.last(), Some(Layer::Activation(Activation::Sigmoid))) {
                v.push("discriminator output is not sigmoid".into());
            }
            if hidden.is_empty() || hidden.iter().any(|a| !matches!(a, Activation::LeakyRelu(_))) {
                v.push("discriminator hidden activation is not LeakyReLU".into());
            }
        }
        None => v.push("discriminator has no activations".into()),
    }
    v
}
