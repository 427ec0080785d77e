mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use signgan::dataio::toy::{toy_class, toy_corpus, ToyJitter};
use signgan::dataio::{ClassId, Dataset};
use signgan::gan::*;
use signgan::numcore::nn::Layer;
use signgan::numcore::{Activation, Tape, Tensor};

fn class(i: usize) -> ClassId {
    ClassId::new(i).unwrap()
}

fn tiny_config(c: usize, seed: u64) -> GanConfig {
    GanConfig {
        epochs: 2,
        batch_size: 8,
        ..GanConfig::new(class(c), seed)
    }
}

fn run(net: &signgan::numcore::nn::Sequential<f32>, x: Tensor<f32>) -> Tensor<f32> {
    let mut tape = Tape::new();
    let v = tape.constant(x);
    let out = net.infer(&mut tape, v).unwrap().output();
    tape.value(out).clone()
}

#[test]
fn networks_map_declared_shapes_and_ranges() {
    let cfg = GanConfig::new(class(0), 1);
    let (g, d) = build_gan(&cfg);
    let mut r = common::rng(1);
    let z = common::random_tensor(&mut r, &[5, 100], -50.0, 50.0).cast::<f32>();
    let images = run(&g.net, z);
    assert_eq!(images.shape(), &[5, 28, 28, 1]);
    assert!(images.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    let scores = run(&d.net, images);
    assert_eq!(scores.shape(), &[5, 1]);
    assert!(scores.data().iter().all(|&p| p > 0.0 && p < 1.0));
}

#[test]
fn same_seed_builds_identical_networks() {
    let a = build_gan(&GanConfig::new(class(3), 7));
    let b = build_gan(&GanConfig::new(class(3), 7));
    assert!(a == b);
    let c = build_gan(&GanConfig::new(class(3), 8));
    assert!(a.0 != c.0);
}

#[test]
fn architecture_follows_dcgan_guidelines() {
    let (g, d) = build_gan(&GanConfig::new(class(0), 0));
    assert_eq!(audit_architecture(&g, &d), Vec::<String>::new());

    let mut pooled = d.clone();
    pooled.net.layers.insert(2, Layer::MaxPool2d { size: 2, stride: 2 });
    assert!(audit_architecture(&g, &pooled).iter().any(|m| m.contains("pooling")));

    let mut relu_d = d.clone();
    relu_d.net.layers[1] = Layer::Activation(Activation::Relu);
    assert!(audit_architecture(&g, &relu_d).iter().any(|m| m.contains("LeakyReLU")));

    let mut no_tanh = g.clone();
    *no_tanh.net.layers.last_mut().unwrap() = Layer::Activation(Activation::Sigmoid);
    assert!(audit_architecture(&no_tanh, &d).iter().any(|m| m.contains("tanh")));

    let mut hidden_dense = d.clone();
    let head = hidden_dense.net.layers[6].clone();
    hidden_dense.net.layers.insert(6, head);
    assert!(audit_architecture(&g, &hidden_dense)
        .iter()
        .any(|m| m.contains("fully connected")));

    let mut no_bn = g.clone();
    no_bn.net.layers.retain(|l| !matches!(l, Layer::BatchNorm { .. }));
    assert!(audit_architecture(&no_bn, &d).iter().any(|m| m.contains("batch norm")));
}

#[test]
fn batch_count_drops_partial_batch() {
    assert_eq!(batches_per_epoch(2000, 64), 31);
    assert_eq!(25 * batches_per_epoch(2000, 64), 775);
    assert_eq!(batches_per_epoch(63, 64), 0);
}

#[test]
fn steps_touch_only_their_network() {
    let cfg = tiny_config(9, 2);
    let ds = toy_class(class(9), 8, 2, &ToyJitter::default());
    let mut ck = GanCheckpoint::initial(&cfg, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let g_before = ck.generator.clone();
    let d_before = ck.discriminator.clone();
    discriminator_step(
        &mut ck,
        ds.batch(&(0..8).collect::<Vec<_>>()),
        latent_batch(&mut rng, 8, 100),
    )
    .unwrap();
    assert!(ck.generator == g_before);
    assert!(ck.discriminator.net.parameters() != d_before.net.parameters());
    assert!(ck.discriminator.net.running_stats() != d_before.net.running_stats());
    assert_eq!(ck.g_adam.step_count, 0);

    let d_before = ck.discriminator.clone();
    generator_step(&mut ck, latent_batch(&mut rng, 8, 100)).unwrap();
    assert!(ck.discriminator == d_before);
    assert!(ck.generator.net.parameters() != g_before.net.parameters());
    assert_eq!(ck.d_adam.step_count, 1);
}

#[test]
fn short_training_is_finite_and_deterministic() {
    let cfg = tiny_config(2, 4);
    let ds = toy_class(class(2), 20, 4, &ToyJitter::default());
    let mut epochs_seen = Vec::new();
    let a = train_gan_with(&ds, &cfg, None, |ck| {
        epochs_seen.push(ck.epochs_completed);
        Ok(())
    })
    .unwrap();
    assert_eq!(epochs_seen, vec![1, 2]);
    assert_eq!(a.loss_history.len(), 2 * 2);
    assert!(a.loss_history.iter().all(|(d, g)| d.is_finite() && g.is_finite()));
    let b = train_gan(&ds, &cfg).unwrap();
    assert!(a.to_bytes() == b.to_bytes());

    let one = train_gan(
        &ds,
        &GanConfig {
            epochs: 1,
            ..cfg.clone()
        },
    )
    .unwrap();
    let resumed = train_gan_with(&ds, &cfg, Some(one), |_| Ok(())).unwrap();
    assert!(resumed.to_bytes() == a.to_bytes());

    let csv = loss_history_csv(&a);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epoch,batch,d_loss,g_loss");
    assert_eq!(lines.len(), 5);
    assert!(lines[3].starts_with("1,0,"));
    assert_eq!(
        lines[4].split(',').nth(3).unwrap().parse::<f32>().unwrap(),
        a.loss_history[3].1
    );
}

#[test]
fn training_rejects_bad_inputs() {
    let cfg = tiny_config(1, 0);
    assert!(matches!(
        train_gan(&Dataset::default(), &cfg),
        Err(GanError::EmptyDataset)
    ));
    let mixed = toy_corpus(1, 0, &ToyJitter::default());
    assert!(matches!(train_gan(&mixed, &cfg), Err(GanError::MixedLabels { .. })));
    let few = toy_class(class(1), 7, 0, &ToyJitter::default());
    assert!(matches!(
        train_gan(&few, &cfg),
        Err(GanError::TooFewImages {
            images: 7,
            batch_size: 8
        })
    ));
    let bad = GanConfig {
        batch_size: 1,
        ..cfg.clone()
    };
    assert!(matches!(train_gan(&few, &bad), Err(GanError::InvalidConfig(_))));
    let ds = toy_class(class(1), 16, 0, &ToyJitter::default());
    let other = train_gan(
        &ds,
        &GanConfig {
            epochs: 1,
            seed: 9,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert!(matches!(
        train_gan_with(&ds, &cfg, Some(other), |_| Ok(())),
        Err(GanError::ResumeMismatch(_))
    ));
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let cfg = tiny_config(5, 6);
    let ds = toy_class(class(5), 16, 6, &ToyJitter::default());
    let ck = train_gan(&ds, &GanConfig { epochs: 1, ..cfg }).unwrap();
    let bytes = ck.to_bytes();
    assert_eq!(&bytes[..4], b"GANC");
    let back = GanCheckpoint::from_bytes(&bytes).unwrap();
    assert!(back
        .generator
        .net
        .parameters()
        .iter()
        .zip(ck.generator.net.parameters())
        .all(|(a, b)| a.value == b.value));
    assert_eq!(back.to_bytes(), bytes);

    let mut bad = bytes.clone();
    bad[1] = b'X';
    assert!(matches!(GanCheckpoint::from_bytes(&bad), Err(GanError::Checkpoint(_))));
    assert!(GanCheckpoint::from_bytes(&bytes[..bytes.len() / 2]).is_err());
    assert!(GanCheckpoint::from_bytes(&[]).is_err());
}

#[test]
fn sampling_is_deterministic_and_bounded() {
    let ck = GanCheckpoint::initial(&GanConfig::new(class(8), 1), 1).unwrap();
    let a = sample_generator(&ck, 300, 5).unwrap();
    assert_eq!(a.len(), 300);
    assert!(a
        .iter()
        .all(|t| t.shape() == [28, 28, 1] && t.data().iter().all(|v| (-1.0..=1.0).contains(v))));
    assert!(a == sample_generator(&ck, 300, 5).unwrap());
    assert!(a[0] != sample_generator(&ck, 1, 6).unwrap()[0]);
}

#[test]
fn synthesized_sets_are_labeled_by_source() {
    let cks: Vec<GanCheckpoint> = (0..10)
        .map(|c| GanCheckpoint::initial(&GanConfig::new(class(c), c as u64), 1).unwrap())
        .collect();
    let synth = synthesize_labeled_set(&cks, 100, 3).unwrap();
    assert_eq!(synth.len(), 1000);
    assert_eq!(synth.histogram(), [100; 10]);
    for (i, img) in synth.images.iter().enumerate() {
        assert_eq!(img.class_id.index(), i / 100);
        assert_eq!(img.source_tag, SYNTHETIC_TAG);
    }
    let base = toy_corpus(3, 1, &ToyJitter::default());
    let merged = base.clone().merged(&synth);
    assert_eq!(merged.len(), base.len() + synth.len());
    assert_eq!(merged.histogram(), std::array::from_fn(|c| base.histogram()[c] + 100));

    let dup = vec![cks[2].clone(), cks[2].clone()];
    assert!(matches!(
        synthesize_labeled_set(&dup, 1, 0),
        Err(GanError::DuplicateClass(_))
    ));
    let subset = synthesize_labeled_set(&cks[4..6], 7, 0).unwrap();
    assert_eq!(subset.labels(), [vec![4; 7], vec![5; 7]].concat());
}

#[test]
fn discriminator_accuracy_is_a_fraction() {
    let ck = GanCheckpoint::initial(&GanConfig::new(class(0), 1), 1).unwrap();
    let real = toy_class(class(0), 10, 1, &ToyJitter::default());
    let acc = discriminator_accuracy(&ck, &real, 10, 2).unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert_eq!(acc * 20.0, (acc * 20.0).round());
}
