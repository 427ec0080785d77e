use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AugmentError, FlipAxis};
use crate::numcore::Tensor;

/// Reverses an `[h, w, c]` image along columns (horizontal) or rows.
pub fn flip(img: &Tensor<f32>, axis: FlipAxis) -> Result<Tensor<f32>, AugmentError> {
    let &[rows, cols, ch] = img.shape() else {
        return Err(AugmentError::BadImage(img.shape().to_vec()));
    };
    let src = img.data();
    let out = Tensor::from_fn(img.shape(), |i| {
        let (r, c, k) = (i / (cols * ch), (i / ch) % cols, i % ch);
        let (r, c) = match axis {
            FlipAxis::Horizontal => (r, cols - 1 - c),
            FlipAxis::Vertical => (rows - 1 - r, c),
        };
        src[(r * cols + c) * ch + k]
    });
    Ok(out)
}

/// Sets each pixel to -1 with probability `p/2`, to +1 with probability
/// `p/2`, else leaves it unchanged.
pub fn salt_pepper(img: &Tensor<f32>, p: f64, seed: u64) -> Result<Tensor<f32>, AugmentError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AugmentError::OutOfRange {
            op: "salt_pepper",
            detail: format!("p {p} outside [0, 1]"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(img.map(|v| {
        let u: f64 = rng.random();
        if u < p / 2.0 {
            -1.0
        } else if u < p {
            1.0
        } else {
            v
        }
    }))
}

/// `clamp(contrast * pixel + brightness, -1, 1)`.
pub fn adjust_lighting(img: &Tensor<f32>, brightness: f64, contrast: f64) -> Tensor<f32> {
    img.map(|v| (contrast * v as f64 + brightness).clamp(-1.0, 1.0) as f32)
}
