mod common;

use proptest::prelude::*;
use rand::Rng;
use signgan::dataio::toy::{toy_corpus, ToyJitter};
use signgan::dataio::*;
use signgan::numcore::Tensor;

fn random_image(r: &mut impl Rng, class: usize) -> LabeledImage {
    let px = Tensor::from_fn(&[28, 28, 1], |_| r.random_range(-1.0f32..=1.0));
    LabeledImage::new(px, ClassId::new(class).unwrap(), "test").unwrap()
}

fn dataset_with(counts: &[usize]) -> Dataset {
    let mut r = common::rng(99);
    let mut images = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            images.push(random_image(&mut r, c));
        }
    }
    Dataset::new(images)
}

#[test]
fn empty_snf_is_exactly_a_header() {
    let bytes = write_snf(&Dataset::default());
    assert_eq!(bytes.len(), 24);
    assert_eq!(&bytes[..4], b"SNF1");
    assert_eq!(&bytes[8..12], &0u32.to_le_bytes());
    assert!(read_snf(&bytes, "x").unwrap().is_empty());
}

#[test]
fn snf_layout_and_round_trip() {
    let mut r = common::rng(1);
    let ds = Dataset::new((0..3).map(|i| random_image(&mut r, i * 3)).collect());
    let bytes = write_snf(&ds);
    assert_eq!(bytes.len(), 24 + 3 + 4 * 3 * 28 * 28);
    assert_eq!(&bytes[24..27], &[0, 3, 6]);
    let first = f32::from_le_bytes(bytes[27..31].try_into().unwrap());
    assert_eq!(first.to_bits(), ds.images[0].pixels.data()[0].to_bits());
    let back = read_snf(&bytes, "test").unwrap();
    assert_eq!(back, ds);
    assert_eq!(write_snf(&back), bytes);
}

#[test]
fn snf_corruption_gives_distinct_errors() {
    let mut r = common::rng(2);
    let ds = Dataset::new((0..2).map(|i| random_image(&mut r, i)).collect());
    let bytes = write_snf(&ds);

    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    assert!(matches!(read_snf(&bad, ""), Err(DataError::BadMagic { .. })));

    assert!(matches!(
        read_snf(&bytes[..bytes.len() - 1], ""),
        Err(DataError::SizeMismatch { .. })
    ));
    assert!(matches!(
        read_snf(&bytes[..10], ""),
        Err(DataError::SizeMismatch { .. })
    ));
    let mut bad = bytes.clone();
    bad[8] = 7;
    assert!(matches!(read_snf(&bad, ""), Err(DataError::SizeMismatch { .. })));
    let mut bad = bytes.clone();
    bad[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
    assert!(matches!(read_snf(&bad, ""), Err(DataError::SizeMismatch { .. })));

    let mut bad = bytes.clone();
    bad[25] = 10;
    assert!(matches!(
        read_snf(&bad, ""),
        Err(DataError::LabelOutOfRange { index: 1, label: 10 })
    ));

    let mut bad = bytes.clone();
    bad[4] = 2;
    assert!(matches!(read_snf(&bad, ""), Err(DataError::UnsupportedVersion(2))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snf_round_trip_is_byte_identity(labels in prop::collection::vec(0usize..10, 0..6), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let ds = Dataset::new(labels.iter().map(|&c| random_image(&mut r, c)).collect());
        let bytes = write_snf(&ds);
        prop_assert_eq!(bytes.len(), snf_len(ds.len()));
        prop_assert_eq!(write_snf(&read_snf(&bytes, "p").unwrap()), bytes);
    }

    #[test]
    fn preprocess_is_idempotent_on_canonical_images(levels in prop::collection::vec(0u8..=255, 28 * 28)) {
        let x = Tensor::new(&[28, 28, 1], levels.iter().map(|&g| (normalize(g as f64)) as f32).collect()).unwrap();
        let again = preprocess(&denormalize(&x), 28);
        for (a, b) in again.data().iter().zip(x.data()) {
            prop_assert!(((a - b).abs() as f64) <= 2.0 / 255.0 * 0.5 + 1e-6);
        }
    }

    #[test]
    fn split_is_stratified(counts in prop::collection::vec(2usize..30, 10), frac in 0.05f64..0.6, seed in any::<u64>()) {
        let ds = dataset_with(&counts);
        let split = split_dataset(&ds, frac, seed).unwrap();
        let total: usize = counts.iter().sum();
        prop_assert_eq!(split.test.len(), (frac * total as f64).round() as usize);
        prop_assert_eq!(split.train.len() + split.test.len(), total);
        let h = split.test.histogram();
        for c in 0..10 {
            prop_assert!((h[c] as f64 - frac * counts[c] as f64).abs() <= 1.0);
        }
        let mut all: Vec<usize> = split.train_indices.iter().chain(&split.test_indices).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..total).collect::<Vec<_>>());
    }
}

#[test]
fn one_test_image_per_class_at_tenth() {
    let ds = dataset_with(&[10; 10]);
    let split = split_dataset(&ds, 0.1, 5).unwrap();
    assert_eq!(split.test.histogram(), [1; 10]);
}

#[test]
fn splits_are_seed_deterministic() {
    let ds = dataset_with(&[12; 10]);
    let a = split_dataset(&ds, 0.25, 77).unwrap();
    let b = split_dataset(&ds, 0.25, 77).unwrap();
    assert_eq!(a.test_indices, b.test_indices);
    assert_eq!(a.train_indices, b.train_indices);
    let distinct = (0..20u64)
        .map(|s| split_dataset(&ds, 0.25, 1000 + s).unwrap().test_indices)
        .collect::<std::collections::HashSet<_>>();
    assert_eq!(distinct.len(), 20);
}

#[test]
fn split_errors() {
    let mut counts = [5; 10];
    counts[4] = 0;
    let err = split_dataset(&dataset_with(&counts), 0.1, 0).unwrap_err();
    assert!(err.to_string().contains("Speed limit 50"), "{err}");
    assert!(matches!(
        split_dataset(&dataset_with(&[5; 10]), 1.0, 0),
        Err(DataError::InvalidFraction(_))
    ));
}

#[test]
fn ingest_reads_class_directories() {
    let dir = tempfile::tempdir().unwrap();
    let white = RgbImage::new(2, 2, vec![255; 12]);
    let red = RgbImage::new(1, 1, vec![255, 0, 0]);
    std::fs::create_dir_all(dir.path().join("3")).unwrap();
    std::fs::create_dir_all(dir.path().join("9")).unwrap();
    std::fs::write(dir.path().join("3/a.ppm"), encode_ppm(&white)).unwrap();
    std::fs::write(dir.path().join("3/b.png"), encode_png(&red).unwrap()).unwrap();
    std::fs::write(dir.path().join("3/notes.txt"), b"ignored").unwrap();
    std::fs::write(dir.path().join("9/c.PPM"), encode_ppm(&red)).unwrap();
    let ds = ingest_directory(dir.path(), "gtsrb").unwrap();
    assert_eq!(ds.labels(), vec![3, 3, 9]);
    assert!(ds.images[0].pixels.data().iter().all(|&v| v == 1.0));
    assert!((ds.images[1].pixels.data()[0] + 0.402).abs() < 1e-4);
    assert_eq!(ds.images[2].source_tag, "gtsrb");

    std::fs::write(dir.path().join("9/broken.ppm"), b"P6 4 4 255\n\x00").unwrap();
    let err = ingest_directory(dir.path(), "x").unwrap_err();
    assert!(err.to_string().contains("broken.ppm"), "{err}");
}

#[test]
fn toy_corpus_is_canonical() {
    let ds = toy_corpus(4, 3, &ToyJitter::default());
    assert_eq!(ds.len(), 40);
    for img in &ds.images {
        assert_eq!(img.pixels.shape(), &[28, 28, 1]);
        assert!(img.pixels.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
