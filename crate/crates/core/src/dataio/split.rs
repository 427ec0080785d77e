use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassId, DataError, Dataset, NUM_CLASSES};

/// Disjoint stratified train/test partition of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub train: Dataset,
    pub test: Dataset,
    /// Positions in the source dataset, ascending.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub test_fraction: f64,
}

/// Per-class test counts: floors of the proportional shares, with the
/// remaining `round(fraction·total) − Σfloor` slots given to the largest
/// fractional remainders (lower class id first on ties).
pub fn stratified_test_counts(class_sizes: &[usize], test_fraction: f64) -> Vec<usize> {
    let total: usize = class_sizes.iter().sum();
    let target = (test_fraction * total as f64).round() as usize;
    let shares: Vec<f64> = class_sizes.iter().map(|&n| test_fraction * n as f64).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &c in order.iter().take(target.saturating_sub(assigned)) {
        counts[c] += 1;
    }
    counts
}

/// Seeded stratified split. Every class of the taxonomy needs ≥ 2 images.
pub fn split_dataset(data: &Dataset, test_fraction: f64, seed: u64) -> Result<DatasetSplit, DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::InvalidFraction(test_fraction));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
    for (i, img) in data.images.iter().enumerate() {
        by_class[img.class_id.index()].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < 2 {
            return Err(DataError::ClassTooSmall {
                class: ClassId::new(c)?,
                count: members.len(),
            });
        }
    }
    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let counts = stratified_test_counts(&sizes, test_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; data.len()];
    for (members, &k) in by_class.iter_mut().zip(&counts) {
        members.shuffle(&mut rng);
        for &i in &members[..k] {
            in_test[i] = true;
        }
    }
    let (test_indices, train_indices): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| in_test[i]);
    let pick = |idx: &[usize]| Dataset::new(idx.iter().map(|&i| data.images[i].clone()).collect());
    Ok(DatasetSplit {
        train: pick(&train_indices),
        test: pick(&test_indices),
        train_indices,
        test_indices,
        seed,
        test_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_test_size() {
        let sizes = [2500, 2503, 2497, 2600, 2400, 2511, 2489, 2500, 2500, 2500];
        assert_eq!(sizes.iter().sum::<usize>(), 25000);
        let counts = stratified_test_counts(&sizes, 0.1);
        assert_eq!(counts.iter().sum::<usize>(), 2500);
        for (&n, &k) in sizes.iter().zip(&counts) {
            assert!((k as f64 - 0.1 * n as f64).abs() <= 1.0);
        }
    }

    #[test]
    fn exact_proportion() {
        assert_eq!(stratified_test_counts(&[10; 10], 0.1), vec![1; 10]);
    }
}
