use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use super::{AugmentError, AugmentOp};
use crate::dataio::IMAGE_SIZE;
use crate::numcore::Tensor;

const CENTER: f64 = (IMAGE_SIZE as f64 - 1.0) / 2.0;
const LAST: f64 = IMAGE_SIZE as f64 - 1.0;
const SNAP: f64 = 1e-9;

/// Corners of the canonical image in `(x, y)` pixel coordinates, ordered
/// top-left, top-right, bottom-right, bottom-left.
pub const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [LAST, 0.0], [LAST, LAST], [0.0, LAST]];

fn about_center(m: Matrix3<f64>) -> Matrix3<f64> {
    let to = Matrix3::new(1.0, 0.0, CENTER, 0.0, 1.0, CENTER, 0.0, 0.0, 1.0);
    let from = Matrix3::new(1.0, 0.0, -CENTER, 0.0, 1.0, -CENTER, 0.0, 0.0, 1.0);
    to * m * from
}

/// Matrix mapping output `(x, y, 1)` to source coordinates for a geometric op.
pub fn homography_for(op: &AugmentOp) -> Result<Matrix3<f64>, AugmentError> {
    match *op {
        AugmentOp::Rotate { theta_deg } => {
            let (s, c) = (-theta_deg).to_radians().sin_cos();
            if theta_deg == 0.0 {
                return Ok(Matrix3::identity());
            }
            Ok(about_center(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)))
        }
        AugmentOp::Translate { dx, dy } => Ok(Matrix3::new(1.0, 0.0, dx, 0.0, 1.0, dy, 0.0, 0.0, 1.0)),
        AugmentOp::Scale { factor } => {
            if factor.abs() < 1e-12 {
                return Err(AugmentError::Singular);
            }
            let k = 1.0 / factor;
            Ok(about_center(Matrix3::new(k, 0.0, 0.0, 0.0, k, 0.0, 0.0, 0.0, 1.0)))
        }
        AugmentOp::Perspective { offsets } => {
            let mut dst = CORNERS;
            for (d, o) in dst.iter_mut().zip(offsets) {
                d[0] += o[0];
                d[1] += o[1];
            }
            homography_from_points(&CORNERS, &dst)
        }
        _ => Err(AugmentError::NotGeometric(op.kind().name())),
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn has_collinear_triple(p: &[[f64; 2]; 4]) -> bool {
    let scale = p.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale * scale;
    (0..4).any(|skip| {
        let t: Vec<[f64; 2]> = (0..4).filter(|&i| i != skip).map(|i| p[i]).collect();
        cross(t[0], t[1], t[2]).abs() <= tol
    })
}

/// Solves for `H` (with `h33 = 1`) such that `H·src[i] ∝ dst[i]`.
pub fn homography_from_points(src: &[[f64; 2]; 4], dst: &[[f64; 2]; 4]) -> Result<Matrix3<f64>, AugmentError> {
    if has_collinear_triple(src) || has_collinear_triple(dst) {
        return Err(AugmentError::Degenerate);
    }
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for i in 0..4 {
        let [x, y] = src[i];
        let [u, v] = dst[i];
        let r = 2 * i;
        a.row_mut(r)
            .copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
        b[r] = u;
        b[r + 1] = v;
    }
    let h = a.lu().solve(&b).ok_or(AugmentError::Degenerate)?;
    if !h.iter().all(|v| v.is_finite()) {
        return Err(AugmentError::Degenerate);
    }
    Ok(Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0))
}

/// Maps a point through `h` with perspective division.
pub fn apply_homography(h: &Matrix3<f64>, p: [f64; 2]) -> [f64; 2] {
    let q = h * Vector3::new(p[0], p[1], 1.0);
    [q[0] / q[2], q[1] / q[2]]
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Resamples an `[h, w, c]` image: output pixel `(x, y)` reads the source
/// at `H·(x, y, 1)` with bilinear interpolation and edge replication.
pub fn warp(img: &Tensor<f32>, h: &Matrix3<f64>) -> Result<Tensor<f32>, AugmentError> {
    let &[rows, cols, ch] = img.shape() else {
        return Err(AugmentError::BadImage(img.shape().to_vec()));
    };
    let det = h.determinant();
    if !det.is_finite() || det.abs() < 1e-12 {
        return Err(AugmentError::Singular);
    }
    let src = img.data();
    let at = |r: usize, c: usize, k: usize| src[(r * cols + c) * ch + k] as f64;
    let mut out = Vec::with_capacity(src.len());
    for y in 0..rows {
        for x in 0..cols {
            let q = h * Vector3::new(x as f64, y as f64, 1.0);
            let (sx, sy) = if q[2].abs() < 1e-12 {
                (x as f64, y as f64)
            } else {
                (snap(q[0] / q[2]), snap(q[1] / q[2]))
            };
            let sx = if sx.is_finite() {
                sx.clamp(0.0, (cols - 1) as f64)
            } else {
                0.0
            };
            let sy = if sy.is_finite() {
                sy.clamp(0.0, (rows - 1) as f64)
            } else {
                0.0
            };
            let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(cols - 1), (y0 + 1).min(rows - 1));
            let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
            for k in 0..ch {
                let v = if fx == 0.0 && fy == 0.0 {
                    at(y0, x0, k)
                } else {
                    let top = at(y0, x0, k) * (1.0 - fx) + at(y0, x1, k) * fx;
                    let bottom = at(y1, x0, k) * (1.0 - fx) + at(y1, x1, k) * fx;
                    top * (1.0 - fy) + bottom * fy
                };
                out.push(v.clamp(-1.0, 1.0) as f32);
            }
        }
    }
    Ok(Tensor::new(img.shape(), out).expect("shape preserved"))
}
