use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_gan, DiscriminatorNet, GanConfig, GanError, GeneratorNet, GAN_IMAGE_SIZE};
use crate::dataio::{ClassId, Dataset, LabeledImage};
use crate::numcore::nn::{Binding, Forward, Sequential};
use crate::numcore::{adam_step, AdamState, BatchNormMode, Float, Gradients, Tape, Tensor};
use crate::seed::derive_seed;

pub const SYNTHETIC_TAG: &str = "synthetic";

const SAMPLE_CHUNK: usize = 256;
const UPDATE_STATS: BatchNormMode = BatchNormMode::Train { update_running: true };
const FROZEN_STATS: BatchNormMode = BatchNormMode::Train { update_running: false };

/// Trained (or partially trained) GAN with optimizer state and losses.
#[derive(Clone, Debug, PartialEq)]
pub struct GanCheckpoint {
    pub config: GanConfig,
    pub generator: GeneratorNet,
    pub discriminator: DiscriminatorNet,
    pub g_adam: AdamState<f32>,
    pub d_adam: AdamState<f32>,
    pub epochs_completed: usize,
    pub batches_per_epoch: usize,
    /// Per-batch `(d_loss, g_loss)`.
    pub loss_history: Vec<(f32, f32)>,
}

impl GanCheckpoint {
    /// Freshly initialized networks and optimizers; no training yet.
    pub fn initial(config: &GanConfig, batches_per_epoch: usize) -> Result<Self, GanError> {
        config.validate()?;
        let (generator, discriminator) = build_gan(config);
        let g_adam = AdamState::new(&generator.net.parameters(), config.learning_rate, config.beta1);
        let d_adam = AdamState::new(&discriminator.net.parameters(), config.learning_rate, config.beta1);
        Ok(Self {
            config: config.clone(),
            generator,
            discriminator,
            g_adam,
            d_adam,
            epochs_completed: 0,
            batches_per_epoch,
            loss_history: Vec::new(),
        })
    }
}

/// `n` latent vectors uniform on `[-1, 1]^dim`.
pub fn latent_batch(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Tensor<f32> {
    Tensor::from_fn(&[n, dim], |_| rng.random_range(-1.0f32..=1.0))
}

fn load_summed(net: &mut Sequential<f32>, grads: &Gradients<f32>, passes: &[&Forward]) {
    for (i, p) in net.parameters_mut().into_iter().enumerate() {
        let mut g = grads.wrt(passes[0].params[i]);
        for pass in &passes[1..] {
            g.add_assign(&grads.wrt(pass.params[i]));
        }
        p.gradient = g;
    }
}

/// Output of the layer feeding the discriminator's sigmoid.
fn logit(forward: &Forward) -> crate::numcore::Var {
    forward.outputs[forward.outputs.len() - 2]
}

/// Full batches per epoch; the trailing partial batch is dropped.
pub fn batches_per_epoch(images: usize, batch_size: usize) -> usize {
    images / batch_size
}

fn check_dataset(dataset: &Dataset, config: &GanConfig) -> Result<usize, GanError> {
    if dataset.is_empty() {
        return Err(GanError::EmptyDataset);
    }
    if let Some((index, img)) = dataset
        .images
        .iter()
        .enumerate()
        .find(|(_, i)| i.class_id != config.class_id)
    {
        return Err(GanError::MixedLabels {
            index,
            expected: config.class_id,
            found: img.class_id,
        });
    }
    let batches = batches_per_epoch(dataset.len(), config.batch_size);
    if batches == 0 {
        return Err(GanError::TooFewImages {
            images: dataset.len(),
            batch_size: config.batch_size,
        });
    }
    Ok(batches)
}

/// Trains a fresh GAN for `config.epochs` epochs.
pub fn train_gan(dataset: &Dataset, config: &GanConfig) -> Result<GanCheckpoint, GanError> {
    train_gan_with(dataset, config, None, |_| Ok(()))
}

/// Trains from `resume` (or from scratch) until `config.epochs` epochs are
/// complete, calling `on_epoch` with the checkpoint after every epoch.
///
/// Each epoch draws its shuffle and latents from its own seeded stream, so a
/// resumed run is bit-identical to an uninterrupted one. Per batch the
/// discriminator takes one step on `BCE(D(x), 1) + BCE(D(G(z)), 0)`, then the
/// generator takes one step on `BCE(D(G(z')), 1)`.
pub fn train_gan_with(
    dataset: &Dataset,
    config: &GanConfig,
    resume: Option<GanCheckpoint>,
    mut on_epoch: impl FnMut(&GanCheckpoint) -> Result<(), GanError>,
) -> Result<GanCheckpoint, GanError> {
    config.validate()?;
    let batches = check_dataset(dataset, config)?;
    let mut ck = match resume {
        Some(mut ck) => {
            let mut expected = ck.config.clone();
            expected.epochs = config.epochs;
            if expected != *config {
                return Err(GanError::ResumeMismatch(format!("{:?} vs {:?}", ck.config, config)));
            }
            if ck.batches_per_epoch != batches {
                return Err(GanError::ResumeMismatch(format!(
                    "{} batches per epoch vs {batches}",
                    ck.batches_per_epoch
                )));
            }
            ck.config.epochs = config.epochs;
            ck
        }
        None => GanCheckpoint::initial(config, batches)?,
    };
    let bs = config.batch_size;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    while ck.epochs_completed < config.epochs {
        let epoch = ck.epochs_completed;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[1, epoch as u64]));
        order.sort_unstable();
        order.shuffle(&mut rng);
        for batch in 0..batches {
            let real = dataset.batch(&order[batch * bs..(batch + 1) * bs]);

            let d_value = discriminator_step(&mut ck, real, latent_batch(&mut rng, bs, config.latent_dim))?;
            let g_value = generator_step(&mut ck, latent_batch(&mut rng, bs, config.latent_dim))?;
            if !d_value.is_finite() || !g_value.is_finite() {
                return Err(GanError::NonFinite { epoch, batch });
            }
            ck.loss_history.push((d_value, g_value));
        }
        ck.epochs_completed += 1;
        on_epoch(&ck)?;
    }
    Ok(ck)
}

/// One discriminator update on a real batch and generated images from `z`.
/// The generator and its running statistics are left untouched.
pub fn discriminator_step(ck: &mut GanCheckpoint, real: Tensor<f32>, z: Tensor<f32>) -> Result<f32, GanError> {
    let n = real.dim(0);
    let mut tape = Tape::new();
    let zv = tape.constant(z);
    let fake = ck
        .generator
        .net
        .forward(&mut tape, zv, FROZEN_STATS, Binding::Frozen)?
        .output();
    let xv = tape.constant(real);
    let on_real = ck
        .discriminator
        .net
        .forward(&mut tape, xv, UPDATE_STATS, Binding::Trainable)?;
    let on_fake = ck
        .discriminator
        .net
        .forward(&mut tape, fake, UPDATE_STATS, Binding::Trainable)?;
    let l_real = tape.binary_cross_entropy_with_logits(logit(&on_real), &vec![1.0; n])?;
    let l_fake = tape.binary_cross_entropy_with_logits(logit(&on_fake), &vec![0.0; tape.value(fake).dim(0)])?;
    let loss = tape.add(l_real, l_fake)?;
    let value = tape.value(loss).item().expect("scalar loss");
    let grads = tape.backward(loss)?;
    load_summed(&mut ck.discriminator.net, &grads, &[&on_real, &on_fake]);
    adam_step(&mut ck.discriminator.net.parameters_mut(), &mut ck.d_adam)?;
    Ok(value)
}

/// One generator update through a frozen discriminator. The discriminator
/// and its running statistics are left untouched.
pub fn generator_step(ck: &mut GanCheckpoint, z: Tensor<f32>) -> Result<f32, GanError> {
    let n = z.dim(0);
    let mut tape = Tape::new();
    let zv = tape.constant(z);
    let pass = ck
        .generator
        .net
        .forward(&mut tape, zv, UPDATE_STATS, Binding::Trainable)?;
    let judged = ck
        .discriminator
        .net
        .forward(&mut tape, pass.output(), FROZEN_STATS, Binding::Frozen)?;
    let loss = tape.binary_cross_entropy_with_logits(logit(&judged), &vec![1.0; n])?;
    let value = tape.value(loss).item().expect("scalar loss");
    let grads = tape.backward(loss)?;
    ck.generator.net.load_gradients(&grads, &pass);
    adam_step(&mut ck.generator.net.parameters_mut(), &mut ck.g_adam)?;
    Ok(value)
}

fn generate(generator: &GeneratorNet, z: Tensor<f32>) -> Result<Tensor<f32>, GanError> {
    let mut tape = Tape::new();
    let zv = tape.constant(z);
    let out = generator.net.infer(&mut tape, zv)?.output();
    Ok(tape.value(out).clone())
}

/// Draws `n` images from the generator in eval mode.
pub fn sample_generator(checkpoint: &GanCheckpoint, n: usize, seed: u64) -> Result<Vec<Tensor<f32>>, GanError> {
    let dim = checkpoint.config.latent_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut left = n;
    while left > 0 {
        let m = left.min(SAMPLE_CHUNK);
        let images = generate(&checkpoint.generator, latent_batch(&mut rng, m, dim))?;
        let per = GAN_IMAGE_SIZE * GAN_IMAGE_SIZE;
        for chunk in images.data().chunks_exact(per) {
            out.push(Tensor::new(&[GAN_IMAGE_SIZE, GAN_IMAGE_SIZE, 1], chunk.to_vec())?);
        }
        left -= m;
    }
    Ok(out)
}

/// Samples `count_per_class` images from each checkpoint, labeled with the
/// checkpoint's class.
pub fn synthesize_labeled_set(
    checkpoints: &[GanCheckpoint],
    count_per_class: usize,
    seed: u64,
) -> Result<Dataset, GanError> {
    let mut seen: Vec<ClassId> = Vec::new();
    let mut images = Vec::with_capacity(checkpoints.len() * count_per_class);
    for ck in checkpoints {
        let class = ck.config.class_id;
        if seen.contains(&class) {
            return Err(GanError::DuplicateClass(class));
        }
        seen.push(class);
        if count_per_class == 0 {
            continue;
        }
        let stream = derive_seed(seed, &[class.index() as u64]);
        for px in sample_generator(ck, count_per_class, stream)? {
            images.push(LabeledImage::new(px, class, SYNTHETIC_TAG)?);
        }
    }
    Ok(Dataset::new(images))
}

/// Eval-mode discriminator accuracy at telling `real` images from `n_fake`
/// generator samples (threshold 0.5).
pub fn discriminator_accuracy(
    checkpoint: &GanCheckpoint,
    real: &Dataset,
    n_fake: usize,
    seed: u64,
) -> Result<f64, GanError> {
    let score = |x: Tensor<f32>| -> Result<Vec<f32>, GanError> {
        let mut tape = Tape::new();
        let xv = tape.constant(x);
        let out = checkpoint.discriminator.net.infer(&mut tape, xv)?.output();
        Ok(tape.value(out).data().to_vec())
    };
    let mut correct = 0usize;
    let idx: Vec<usize> = (0..real.len()).collect();
    for chunk in idx.chunks(SAMPLE_CHUNK) {
        correct += score(real.batch(chunk))?.iter().filter(|&&p| p > 0.5).count();
    }
    let fakes = sample_generator(checkpoint, n_fake, seed)?;
    for chunk in fakes.chunks(SAMPLE_CHUNK) {
        let data: Vec<f32> = chunk.iter().flat_map(|t| t.data().iter().copied()).collect();
        let batch = Tensor::new(&[chunk.len(), GAN_IMAGE_SIZE, GAN_IMAGE_SIZE, 1], data)?;
        correct += score(batch)?.iter().filter(|&&p| p.as_f64() < 0.5).count();
    }
    Ok(correct as f64 / (real.len() + n_fake) as f64)
}
