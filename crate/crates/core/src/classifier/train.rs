use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{build_classifier, ClassifierError, ClassifierNet};
use crate::dataio::{Dataset, NUM_CLASSES};
use crate::numcore::nn::Binding;
use crate::numcore::{adam_step, softmax, AdamState, Tape, Tensor};
use crate::seed::derive_seed;

const PREDICT_CHUNK: usize = 256;
/// Adam beta1 for the classifier.
const BETA1: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Pretrain,
    Finetune,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Pretrain => "pretrain",
            Stage::Finetune => "finetune",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub stage: Stage,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl TrainConfig {
    pub fn pretrain(seed: u64) -> Self {
        Self {
            stage: Stage::Pretrain,
            learning_rate: 1e-3,
            epochs: 15,
            batch_size: 64,
            seed,
            lambda1: 0.0,
            lambda2: 0.0,
        }
    }

    pub fn finetune(seed: u64) -> Self {
        Self {
            stage: Stage::Finetune,
            learning_rate: 1e-4,
            epochs: 10,
            ..Self::pretrain(seed)
        }
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: String| Err(ClassifierError::InvalidConfig(m));
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {}", self.learning_rate));
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return bad(format!("elastic-net lambdas {} {}", self.lambda1, self.lambda2));
        }
        Ok(())
    }
}

/// Network, optimizer state and per-batch losses of one training stage.
#[derive(Clone, Debug, PartialEq)]
pub struct ClfCheckpoint {
    pub net: ClassifierNet<f32>,
    pub adam: AdamState<f32>,
    pub config: TrainConfig,
    pub epochs_completed: usize,
    pub batches_per_epoch: usize,
    pub loss_curve: Vec<f32>,
}

/// Runs one training stage.
///
/// Pretraining starts from `build_classifier(config.seed)` unless `start`
/// is given; fine-tuning requires `start`. Each call begins with a fresh
/// Adam state at `config.learning_rate`. The last partial batch of an
/// epoch is kept.
pub fn train_classifier(
    start: Option<&ClfCheckpoint>,
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<ClfCheckpoint, ClassifierError> {
    config.validate()?;
    let mut net = match (start, config.stage) {
        (Some(ck), _) => ck.net.clone(),
        (None, Stage::Pretrain) => build_classifier(config.seed),
        (None, Stage::Finetune) => return Err(ClassifierError::FinetuneWithoutCheckpoint),
    };
    if dataset.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let refs: Vec<_> = net.params.iter().collect();
    let mut adam = AdamState::new(&refs, config.learning_rate, BETA1);
    let batches = dataset.len().div_ceil(config.batch_size);
    let labels = dataset.labels();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut loss_curve = Vec::with_capacity(config.epochs * batches);
    let (l1, l2) = (config.lambda1 as f32, config.lambda2 as f32);
    for epoch in 0..config.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[2, epoch as u64]));
        order.sort_unstable();
        order.shuffle(&mut rng);
        for (batch, idx) in order.chunks(config.batch_size).enumerate() {
            let mut tape = Tape::new();
            let x = tape.constant(dataset.batch(idx));
            let (logits, leaves) = net.forward(&mut tape, x, Binding::Trainable)?;
            let y: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let mut loss = tape.softmax_cross_entropy(logits, &y)?;
            if l1 > 0.0 || l2 > 0.0 {
                let weights: Vec<_> = ClassifierNet::<f32>::weight_indices()
                    .iter()
                    .map(|&i| leaves[i])
                    .collect();
                let penalty = tape.elastic_net(&weights, l1, l2)?;
                loss = tape.add(loss, penalty)?;
            }
            let value = tape.value(loss).item().expect("scalar loss");
            if !value.is_finite() {
                return Err(ClassifierError::NonFinite { epoch, batch });
            }
            let grads = tape.backward(loss)?;
            for (p, v) in net.params.iter_mut().zip(&leaves) {
                p.gradient = grads.wrt(*v);
            }
            let mut params: Vec<_> = net.params.iter_mut().collect();
            adam_step(&mut params, &mut adam)?;
            loss_curve.push(value);
        }
    }
    Ok(ClfCheckpoint {
        net,
        adam,
        config: config.clone(),
        epochs_completed: config.epochs,
        batches_per_epoch: batches,
        loss_curve,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub classes: Vec<usize>,
    pub probabilities: Vec<[f32; NUM_CLASSES]>,
}

fn argmax(row: &[f64]) -> usize {
    // strict comparison keeps the lowest index on ties
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Eval-mode classification of `[n, 28, 28, 1]` images.
pub fn predict_batch(net: &ClassifierNet<f32>, images: &Tensor<f32>) -> Result<Prediction, ClassifierError> {
    let mut tape = Tape::new();
    let x = tape.constant(images.clone());
    let (logits, _) = net.forward(&mut tape, x, Binding::Frozen)?;
    let logits = tape.value(logits).cast::<f64>();
    let probs = softmax(&logits);
    let classes = logits.data().chunks_exact(NUM_CLASSES).map(argmax);
    let probabilities = probs
        .data()
        .chunks_exact(NUM_CLASSES)
        .map(|r| std::array::from_fn(|i| r[i] as f32));
    Ok(Prediction {
        classes: classes.collect(),
        probabilities: probabilities.collect(),
    })
}

/// [`predict_batch`] over a dataset in fixed-size chunks.
pub fn predict_dataset(net: &ClassifierNet<f32>, dataset: &Dataset) -> Result<Prediction, ClassifierError> {
    let mut out = Prediction {
        classes: Vec::with_capacity(dataset.len()),
        probabilities: Vec::with_capacity(dataset.len()),
    };
    let idx: Vec<usize> = (0..dataset.len()).collect();
    for chunk in idx.chunks(PREDICT_CHUNK) {
        let p = predict_batch(net, &dataset.batch(chunk))?;
        out.classes.extend(p.classes);
        out.probabilities.extend(p.probabilities);
    }
    Ok(out)
}
