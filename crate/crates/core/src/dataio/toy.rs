//! Procedural toy corpus: rendered stand-ins for the ten sign classes at
//! 28×28 with random pose, lighting and background clutter.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{preprocess, ClassId, Dataset, LabeledImage, RgbImage, IMAGE_SIZE};
use crate::seed::derive_seed;

const RED: [f64; 3] = [200.0, 30.0, 35.0];
const WHITE: [f64; 3] = [240.0, 240.0, 235.0];
const BLACK: [f64; 3] = [25.0, 25.0, 25.0];
const YELLOW: [f64; 3] = [245.0, 195.0, 20.0];
const GRAY: [f64; 3] = [120.0, 120.0, 120.0];

/// Sub-samples per pixel axis.
const SUPERSAMPLE: usize = 4;

/// Strength of the per-image nuisance variation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyJitter {
    pub max_rotation_deg: f64,
    pub scale_range: (f64, f64),
    pub max_shift_px: f64,
    pub max_aspect: f64,
    pub brightness_range: (f64, f64),
    pub noise_std_range: (f64, f64),
    pub clutter_boxes: usize,
}

impl Default for ToyJitter {
    fn default() -> Self {
        Self {
            max_rotation_deg: 12.0,
            scale_range: (0.62, 0.95),
            max_shift_px: 3.0,
            max_aspect: 0.15,
            brightness_range: (0.45, 1.25),
            noise_std_range: (3.0, 18.0),
            clutter_boxes: 3,
        }
    }
}

// 3×5 glyphs, one row per string, '#' = ink
fn glyph(ch: char) -> [&'static str; 5] {
    match ch {
        '0' => ["###", "#.#", "#.#", "#.#", "###"],
        '1' => [".#.", "##.", ".#.", ".#.", "###"],
        '3' => ["###", "..#", ".##", "..#", "###"],
        '5' => ["###", "#..", "###", "..#", "###"],
        '7' => ["###", "..#", ".#.", ".#.", ".#."],
        'S' => ["###", "#..", "###", "..#", "###"],
        'T' => ["###", ".#.", ".#.", ".#.", ".#."],
        'O' => ["###", "#.#", "#.#", "#.#", "###"],
        'P' => ["###", "#.#", "###", "#..", "#.."],
        _ => ["...", "...", "...", "...", "..."],
    }
}

/// Whether `(u, v)` falls on ink of `text` laid out in the box
/// `[-half_w, half_w] × [-half_h, half_h]`.
fn text_ink(text: &str, u: f64, v: f64, half_w: f64, half_h: f64) -> bool {
    let n = text.chars().count();
    let cols = 4 * n - 1;
    let fx = (u + half_w) / (2.0 * half_w) * cols as f64;
    let fy = (v + half_h) / (2.0 * half_h) * 5.0;
    if fx < 0.0 || fy < 0.0 || fx >= cols as f64 || fy >= 5.0 {
        return false;
    }
    let (col, row) = (fx as usize, fy as usize);
    if col % 4 == 3 {
        return false;
    }
    let ch = text.chars().nth(col / 4).expect("column within text");
    glyph(ch)[row].as_bytes()[col % 4] == b'#'
}

/// Signed inset of `(u, v)` inside a convex polygon (positive inside).
fn polygon_inset(u: f64, v: f64, vertices: &[(f64, f64)]) -> f64 {
    let n = vertices.len() as f64;
    let centroid = (
        vertices.iter().map(|p| p.0).sum::<f64>() / n,
        vertices.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let mut inset = f64::INFINITY;
    for (i, &(x0, y0)) in vertices.iter().enumerate() {
        let (x1, y1) = vertices[(i + 1) % vertices.len()];
        let (ex, ey) = (x1 - x0, y1 - y0);
        let len = (ex * ex + ey * ey).sqrt();
        let side = |a: f64, b: f64| ((a - x0) * ey - (b - y0) * ex) / len;
        let d = side(u, v) * side(centroid.0, centroid.1).signum();
        inset = inset.min(d);
    }
    inset
}

fn octagon() -> Vec<(f64, f64)> {
    (0..8)
        .map(|i| {
            let a = (22.5 + 45.0 * i as f64).to_radians();
            (a.cos(), a.sin())
        })
        .collect()
}

/// Color of the sign face at sign coordinates `(u, v)`, or `None` off the sign.
pub fn sign_color(class: ClassId, u: f64, v: f64) -> Option<[f64; 3]> {
    let r = (u * u + v * v).sqrt();
    match class.index() {
        0 => (r <= 1.0).then_some(if r > 0.74 { RED } else { WHITE }),
        1 => (r <= 1.0).then_some(if v.abs() < 0.2 && u.abs() < 0.68 { WHITE } else { RED }),
        2 => {
            let oct = octagon();
            let inset = polygon_inset(u, v, &oct);
            (inset >= 0.0).then_some(if text_ink("STOP", u, v, 0.78, 0.3) { WHITE } else { RED })
        }
        3..=6 => {
            if r > 1.0 {
                return None;
            }
            if r > 0.72 {
                return Some(RED);
            }
            let text = ["30", "50", "70", "100"][class.index() - 3];
            let half_w = if text.len() == 3 { 0.6 } else { 0.45 };
            Some(if text_ink(text, u, v, half_w, 0.42) {
                BLACK
            } else {
                WHITE
            })
        }
        7 => {
            if r > 1.0 {
                return None;
            }
            if r > 0.92 {
                return Some(GRAY);
            }
            let d = (u + v) / std::f64::consts::SQRT_2;
            let stripe = (-2..=2).any(|k| (d - k as f64 * 0.17).abs() < 0.045);
            Some(if stripe { BLACK } else { WHITE })
        }
        8 => {
            let m = u.abs() + v.abs();
            (m <= 1.0).then_some(if m > 0.93 {
                BLACK
            } else if m > 0.55 {
                WHITE
            } else {
                YELLOW
            })
        }
        9 => {
            let tri = [(-1.0, -0.82), (1.0, -0.82), (0.0, 0.95)];
            let inset = polygon_inset(u, v, &tri);
            (inset >= 0.0).then_some(if inset > 0.2 { WHITE } else { RED })
        }
        _ => None,
    }
}

/// Render one jittered 28×28 RGB sign.
pub fn render_sign(class: ClassId, jitter: &ToyJitter, rng: &mut impl Rng) -> RgbImage {
    let size = IMAGE_SIZE as f64;
    let theta = rng
        .random_range(-jitter.max_rotation_deg..=jitter.max_rotation_deg)
        .to_radians();
    let radius = size / 2.0 * rng.random_range(jitter.scale_range.0..=jitter.scale_range.1);
    let cx = size / 2.0 + rng.random_range(-jitter.max_shift_px..=jitter.max_shift_px);
    let cy = size / 2.0 + rng.random_range(-jitter.max_shift_px..=jitter.max_shift_px);
    let aspect = 1.0 + rng.random_range(-jitter.max_aspect..=jitter.max_aspect);
    let light = rng.random_range(jitter.brightness_range.0..=jitter.brightness_range.1);
    let tint: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.85..1.15));
    let bg_base: [f64; 3] = {
        let g = rng.random_range(30.0..210.0);
        std::array::from_fn(|_| g * rng.random_range(0.75..1.25))
    };
    let bg_grad = (rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0));
    let boxes: Vec<([f64; 4], [f64; 3])> = (0..rng.random_range(0..=jitter.clutter_boxes))
        .map(|_| {
            let x0 = rng.random_range(-4.0..size);
            let y0 = rng.random_range(-4.0..size);
            let rect = [
                x0,
                y0,
                x0 + rng.random_range(3.0..14.0),
                y0 + rng.random_range(3.0..14.0),
            ];
            (rect, std::array::from_fn(|_| rng.random_range(0.0..255.0)))
        })
        .collect();
    let noise_std = rng.random_range(jitter.noise_std_range.0..=jitter.noise_std_range.1);
    let noise = Normal::new(0.0, noise_std).expect("finite std");
    let (sin, cos) = theta.sin_cos();

    let mut pixels = Vec::with_capacity(IMAGE_SIZE * IMAGE_SIZE * 3);
    for py in 0..IMAGE_SIZE {
        for px in 0..IMAGE_SIZE {
            let mut acc = [0.0; 3];
            for sy in 0..SUPERSAMPLE {
                for sx in 0..SUPERSAMPLE {
                    let x = px as f64 + (sx as f64 + 0.5) / SUPERSAMPLE as f64;
                    let y = py as f64 + (sy as f64 + 0.5) / SUPERSAMPLE as f64;
                    let (dx, dy) = ((x - cx) / radius, (y - cy) / radius);
                    let u = (cos * dx + sin * dy) * aspect;
                    let v = -sin * dx + cos * dy;
                    let color = match sign_color(class, u, v) {
                        Some(c) => std::array::from_fn(|i| c[i] * light * tint[i]),
                        None => {
                            let hit = boxes
                                .iter()
                                .rev()
                                .find(|(r, _)| x >= r[0] && x < r[2] && y >= r[1] && y < r[3]);
                            match hit {
                                Some((_, c)) => *c,
                                None => {
                                    let g = bg_grad.0 * (x / size - 0.5) + bg_grad.1 * (y / size - 0.5);
                                    std::array::from_fn(|i| bg_base[i] + g)
                                }
                            }
                        }
                    };
                    for i in 0..3 {
                        acc[i] += color[i];
                    }
                }
            }
            let n = (SUPERSAMPLE * SUPERSAMPLE) as f64;
            for a in acc {
                pixels.push((a / n + noise.sample(rng)).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RgbImage::new(IMAGE_SIZE, IMAGE_SIZE, pixels)
}

/// `per_class` rendered images of every class, class-major order.
pub fn toy_corpus(per_class: usize, seed: u64, jitter: &ToyJitter) -> Dataset {
    let mut images = Vec::with_capacity(per_class * super::NUM_CLASSES);
    for class in ClassId::all() {
        images.extend(toy_class(class, per_class, seed, jitter).images);
    }
    Dataset::new(images)
}

/// `count` rendered images of one class.
pub fn toy_class(class: ClassId, count: usize, seed: u64, jitter: &ToyJitter) -> Dataset {
    let images = (0..count)
        .map(|i| {
            let rgb = render_indexed(class, i, seed, jitter);
            LabeledImage::new(preprocess(&rgb, IMAGE_SIZE), class, "toy").expect("canonical render")
        })
        .collect();
    Dataset::new(images)
}

/// The `index`-th RGB render of `class` under `seed`, as used by [`toy_class`].
pub fn render_indexed(class: ClassId, index: usize, seed: u64, jitter: &ToyJitter) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[class.index() as u64, index as u64]));
    render_sign(class, jitter, &mut rng)
}
