use crate::numcore::Tensor;

use super::RgbImage;

/// Side length of canonical images.
pub const IMAGE_SIZE: usize = 28;

pub fn luma(rgb: [u8; 3]) -> f64 {
    0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64
}

/// Map an 8-bit intensity to `[-1, 1]`.
pub fn normalize(p: f64) -> f64 {
    p / 127.5 - 1.0
}

/// Bilinear resize of a single-channel plane with corner-aligned sampling:
/// output corners sample exactly the input corners.
pub fn resize_bilinear(src: &[f64], height: usize, width: usize, out_h: usize, out_w: usize) -> Vec<f64> {
    let scale = |n_in: usize, n_out: usize| {
        if n_out > 1 {
            (n_in - 1) as f64 / (n_out - 1) as f64
        } else {
            0.0
        }
    };
    let (sy, sx) = (scale(height, out_h), scale(width, out_w));
    let mut out = Vec::with_capacity(out_h * out_w);
    for oy in 0..out_h {
        let y = oy as f64 * sy;
        let y0 = (y.floor() as usize).min(height - 1);
        let y1 = (y0 + 1).min(height - 1);
        let fy = y - y0 as f64;
        for ox in 0..out_w {
            let x = ox as f64 * sx;
            let x0 = (x.floor() as usize).min(width - 1);
            let x1 = (x0 + 1).min(width - 1);
            let fx = x - x0 as f64;
            let top = src[y0 * width + x0] * (1.0 - fx) + src[y0 * width + x1] * fx;
            let bottom = src[y1 * width + x0] * (1.0 - fx) + src[y1 * width + x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

/// Grayscale, resize to `target × target`, and normalize to `[-1, 1]`.
pub fn preprocess(img: &RgbImage, target: usize) -> Tensor<f32> {
    let gray: Vec<f64> = img.pixels.chunks_exact(3).map(|p| luma([p[0], p[1], p[2]])).collect();
    let resized = resize_bilinear(&gray, img.height, img.width, target, target);
    Tensor::new(
        &[target, target, 1],
        resized
            .into_iter()
            .map(|p| normalize(p).clamp(-1.0, 1.0) as f32)
            .collect(),
    )
    .expect("target² pixels")
}

/// Inverse of the normalization, replicated to three equal channels.
pub fn denormalize(pixels: &Tensor<f32>) -> RgbImage {
    let (h, w) = (pixels.dim(0), pixels.dim(1));
    let data = pixels
        .data()
        .iter()
        .flat_map(|&v| {
            let g = ((v as f64 + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8;
            [g, g, g]
        })
        .collect();
    RgbImage::new(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_endpoints_and_identity_resize() {
        let pixels: Vec<u8> = (0..28 * 28)
            .flat_map(|i| {
                let g = if i % 2 == 0 { 255 } else { 0 };
                [g, g, g]
            })
            .collect();
        let t = preprocess(&RgbImage::new(28, 28, pixels), 28);
        assert_eq!(t.data()[0], 1.0);
        assert_eq!(t.data()[1], -1.0);
    }

    #[test]
    fn pure_red() {
        let t = preprocess(&RgbImage::new(1, 1, vec![255, 0, 0]), 28);
        assert!((luma([255, 0, 0]) - 76.245).abs() < 1e-9);
        assert!(t.data().iter().all(|&v| (v as f64 + 0.40200).abs() < 1e-4));
    }

    #[test]
    fn downscale_constant() {
        let t = preprocess(&RgbImage::new(56, 56, vec![77; 56 * 56 * 3]), 28);
        let expected = normalize(luma([77, 77, 77])) as f32;
        assert!(t.data().iter().all(|&v| (v - expected).abs() < 1e-6));
    }

    #[test]
    fn corner_aligned_upscale_keeps_corners() {
        let src = [0.0, 10.0, 20.0, 30.0];
        let out = resize_bilinear(&src, 2, 2, 3, 3);
        assert_eq!(out, vec![0.0, 5.0, 10.0, 10.0, 15.0, 20.0, 20.0, 25.0, 30.0]);
    }
}
