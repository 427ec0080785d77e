//! Forward and backward kernels on plain tensors. NHWC activations,
//! `[kh, kw, c_in, c_out]` convolution kernels.

use super::float::matmul;
use super::{Float, NumError, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ConvGeom {
    pub n: usize,
    pub h: usize,
    pub w: usize,
    pub c_in: usize,
    pub kh: usize,
    pub kw: usize,
    pub c_out: usize,
    pub stride: usize,
    pub pad: usize,
    pub ho: usize,
    pub wo: usize,
}

impl ConvGeom {
    fn rows(&self) -> usize {
        self.n * self.ho * self.wo
    }
    fn patch(&self) -> usize {
        self.kh * self.kw * self.c_in
    }
}

fn mismatch(op: &'static str, detail: String) -> NumError {
    NumError::ShapeMismatch { op, detail }
}

/// Geometry of `conv2d(input, kernel)`.
pub(crate) fn conv_geom<T: Float>(
    input: &Tensor<T>,
    kernel: &Tensor<T>,
    stride: usize,
    pad: usize,
    op: &'static str,
) -> Result<ConvGeom, NumError> {
    if input.rank() != 4 {
        return Err(mismatch(
            op,
            format!("input must be NHWC, got shape {:?}", input.shape()),
        ));
    }
    if kernel.rank() != 4 {
        return Err(mismatch(
            op,
            format!("kernel must be [kh, kw, c_in, c_out], got {:?}", kernel.shape()),
        ));
    }
    if stride == 0 {
        return Err(mismatch(op, "stride must be positive".into()));
    }
    let (n, h, w, c) = (input.dim(0), input.dim(1), input.dim(2), input.dim(3));
    let (kh, kw, kc, co) = (kernel.dim(0), kernel.dim(1), kernel.dim(2), kernel.dim(3));
    if c != kc {
        return Err(mismatch(op, format!("input channels {c} != kernel c_in {kc}")));
    }
    if h + 2 * pad < kh || w + 2 * pad < kw {
        return Err(mismatch(
            op,
            format!(
                "padded input {}x{} smaller than kernel {kh}x{kw}",
                h + 2 * pad,
                w + 2 * pad
            ),
        ));
    }
    Ok(ConvGeom {
        n,
        h,
        w,
        c_in: c,
        kh,
        kw,
        c_out: co,
        stride,
        pad,
        ho: (h + 2 * pad - kh) / stride + 1,
        wo: (w + 2 * pad - kw) / stride + 1,
    })
}

/// Geometry of `conv_transpose2d(input, kernel)`, expressed as the conv2d
/// whose input gradient it is: `g.h × g.w × g.c_in` is the transpose-conv
/// output, `g.ho × g.wo × g.c_out` its input.
pub(crate) fn conv_t_geom<T: Float>(
    input: &Tensor<T>,
    kernel: &Tensor<T>,
    stride: usize,
    pad: usize,
) -> Result<ConvGeom, NumError> {
    const OP: &str = "conv_transpose2d";
    if input.rank() != 4 {
        return Err(mismatch(
            OP,
            format!("input must be NHWC, got shape {:?}", input.shape()),
        ));
    }
    if kernel.rank() != 4 {
        return Err(mismatch(
            OP,
            format!("kernel must be [kh, kw, c_out, c_in], got {:?}", kernel.shape()),
        ));
    }
    if stride == 0 {
        return Err(mismatch(OP, "stride must be positive".into()));
    }
    let (n, hi, wi, ci) = (input.dim(0), input.dim(1), input.dim(2), input.dim(3));
    let (kh, kw, kout, kin) = (kernel.dim(0), kernel.dim(1), kernel.dim(2), kernel.dim(3));
    if ci != kin {
        return Err(mismatch(OP, format!("input channels {ci} != kernel dim 3 ({kin})")));
    }
    let h = ((hi - 1) * stride + kh) as isize - 2 * pad as isize;
    let w = ((wi - 1) * stride + kw) as isize - 2 * pad as isize;
    if h < 1 || w < 1 {
        return Err(mismatch(OP, format!("output size {h}x{w} is empty")));
    }
    Ok(ConvGeom {
        n,
        h: h as usize,
        w: w as usize,
        c_in: kout,
        kh,
        kw,
        c_out: kin,
        stride,
        pad,
        ho: hi,
        wo: wi,
    })
}

/// Unfold zero-padded windows into `[n·ho·wo, kh·kw·c_in]`.
fn im2col<T: Float>(x: &[T], g: &ConvGeom) -> Vec<T> {
    let patch = g.patch();
    let mut cols = vec![T::zero(); g.rows() * patch];
    let c = g.c_in;
    for b in 0..g.n {
        let img = &x[b * g.h * g.w * c..(b + 1) * g.h * g.w * c];
        for oy in 0..g.ho {
            for ox in 0..g.wo {
                let row = ((b * g.ho + oy) * g.wo + ox) * patch;
                for ky in 0..g.kh {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        continue;
                    }
                    for kx in 0..g.kw {
                        let ix = (ox * g.stride + kx) as isize - g.pad as isize;
                        if ix < 0 || ix >= g.w as isize {
                            continue;
                        }
                        let src = (iy as usize * g.w + ix as usize) * c;
                        let dst = row + (ky * g.kw + kx) * c;
                        cols[dst..dst + c].copy_from_slice(&img[src..src + c]);
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatter-add columns back into an NHWC buffer.
fn col2im<T: Float>(cols: &[T], g: &ConvGeom) -> Vec<T> {
    let patch = g.patch();
    let c = g.c_in;
    let mut x = vec![T::zero(); g.n * g.h * g.w * c];
    for b in 0..g.n {
        let img = &mut x[b * g.h * g.w * c..(b + 1) * g.h * g.w * c];
        for oy in 0..g.ho {
            for ox in 0..g.wo {
                let row = ((b * g.ho + oy) * g.wo + ox) * patch;
                for ky in 0..g.kh {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        continue;
                    }
                    for kx in 0..g.kw {
                        let ix = (ox * g.stride + kx) as isize - g.pad as isize;
                        if ix < 0 || ix >= g.w as isize {
                            continue;
                        }
                        let dst = (iy as usize * g.w + ix as usize) * c;
                        let src = row + (ky * g.kw + kx) * c;
                        for (d, &s) in img[dst..dst + c].iter_mut().zip(&cols[src..src + c]) {
                            *d += s;
                        }
                    }
                }
            }
        }
    }
    x
}

fn tensor<T: Float>(shape: &[usize], data: Vec<T>) -> Tensor<T> {
    Tensor::new(shape, data).expect("kernel produced consistent shape")
}

pub(crate) fn conv2d_forward<T: Float>(x: &Tensor<T>, k: &Tensor<T>, g: &ConvGeom) -> Tensor<T> {
    let cols = im2col(x.data(), g);
    let mut out = vec![T::zero(); g.rows() * g.c_out];
    matmul(
        &mut out,
        &cols,
        k.data(),
        g.rows(),
        g.patch(),
        g.c_out,
        false,
        false,
        false,
    );
    tensor(&[g.n, g.ho, g.wo, g.c_out], out)
}

/// Gradients of conv2d w.r.t. its input and kernel, given the output gradient.
pub(crate) fn conv2d_backward<T: Float>(
    x: &Tensor<T>,
    k: &Tensor<T>,
    gy: &Tensor<T>,
    g: &ConvGeom,
    need_input: bool,
    need_kernel: bool,
) -> (Option<Tensor<T>>, Option<Tensor<T>>) {
    let dk = need_kernel.then(|| {
        let cols = im2col(x.data(), g);
        let mut dk = vec![T::zero(); g.patch() * g.c_out];
        matmul(
            &mut dk,
            &cols,
            gy.data(),
            g.patch(),
            g.rows(),
            g.c_out,
            true,
            false,
            false,
        );
        tensor(k.shape(), dk)
    });
    let dx = need_input.then(|| {
        let mut dcols = vec![T::zero(); g.rows() * g.patch()];
        matmul(
            &mut dcols,
            gy.data(),
            k.data(),
            g.rows(),
            g.c_out,
            g.patch(),
            false,
            true,
            false,
        );
        tensor(x.shape(), col2im(&dcols, g))
    });
    (dx, dk)
}

pub(crate) fn conv_t_forward<T: Float>(y: &Tensor<T>, k: &Tensor<T>, g: &ConvGeom) -> Tensor<T> {
    let mut cols = vec![T::zero(); g.rows() * g.patch()];
    matmul(
        &mut cols,
        y.data(),
        k.data(),
        g.rows(),
        g.c_out,
        g.patch(),
        false,
        true,
        false,
    );
    tensor(&[g.n, g.h, g.w, g.c_in], col2im(&cols, g))
}

pub(crate) fn conv_t_backward<T: Float>(
    y: &Tensor<T>,
    k: &Tensor<T>,
    gout: &Tensor<T>,
    g: &ConvGeom,
    need_input: bool,
    need_kernel: bool,
) -> (Option<Tensor<T>>, Option<Tensor<T>>) {
    let cols = im2col(gout.data(), g);
    let dy = need_input.then(|| {
        let mut dy = vec![T::zero(); g.rows() * g.c_out];
        matmul(
            &mut dy,
            &cols,
            k.data(),
            g.rows(),
            g.patch(),
            g.c_out,
            false,
            false,
            false,
        );
        tensor(y.shape(), dy)
    });
    let dk = need_kernel.then(|| {
        let mut dk = vec![T::zero(); g.patch() * g.c_out];
        matmul(
            &mut dk,
            &cols,
            y.data(),
            g.patch(),
            g.rows(),
            g.c_out,
            true,
            false,
            false,
        );
        tensor(k.shape(), dk)
    });
    (dy, dk)
}

pub(crate) fn dense_check<T: Float>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<(), NumError> {
    const OP: &str = "dense";
    if x.rank() != 2 || w.rank() != 2 {
        return Err(mismatch(
            OP,
            format!("input {:?} and weights {:?} must both be 2-D", x.shape(), w.shape()),
        ));
    }
    if x.dim(1) != w.dim(0) {
        return Err(mismatch(
            OP,
            format!("input features {} != weight rows {}", x.dim(1), w.dim(0)),
        ));
    }
    if b.shape() != [w.dim(1)] {
        return Err(mismatch(OP, format!("bias shape {:?} != [{}]", b.shape(), w.dim(1))));
    }
    Ok(())
}

pub(crate) fn dense_forward<T: Float>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let (n, f, g) = (x.dim(0), x.dim(1), w.dim(1));
    let mut out: Vec<T> = (0..n).flat_map(|_| b.data().iter().copied()).collect();
    matmul(&mut out, x.data(), w.data(), n, f, g, false, false, true);
    tensor(&[n, g], out)
}

pub(crate) fn dense_backward<T: Float>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    gy: &Tensor<T>,
    need: [bool; 3],
) -> [Option<Tensor<T>>; 3] {
    let (n, f, g) = (x.dim(0), x.dim(1), w.dim(1));
    let dx = need[0].then(|| {
        let mut dx = vec![T::zero(); n * f];
        matmul(&mut dx, gy.data(), w.data(), n, g, f, false, true, false);
        tensor(x.shape(), dx)
    });
    let dw = need[1].then(|| {
        let mut dw = vec![T::zero(); f * g];
        matmul(&mut dw, x.data(), gy.data(), f, n, g, true, false, false);
        tensor(w.shape(), dw)
    });
    let db = need[2].then(|| {
        let mut db = vec![T::zero(); g];
        for row in gy.data().chunks_exact(g) {
            for (d, &v) in db.iter_mut().zip(row) {
                *d += v;
            }
        }
        tensor(&[g], db)
    });
    [dx, dw, db]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct PoolGeom {
    pub n: usize,
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub size: usize,
    pub stride: usize,
    pub ho: usize,
    pub wo: usize,
}

pub(crate) fn pool_geom<T: Float>(x: &Tensor<T>, size: usize, stride: usize) -> Result<PoolGeom, NumError> {
    const OP: &str = "max_pool2d";
    if x.rank() != 4 {
        return Err(mismatch(OP, format!("input must be NHWC, got {:?}", x.shape())));
    }
    if size == 0 || stride == 0 {
        return Err(mismatch(OP, "window and stride must be positive".into()));
    }
    let (n, h, w, c) = (x.dim(0), x.dim(1), x.dim(2), x.dim(3));
    if h < size || w < size {
        return Err(mismatch(OP, format!("input {h}x{w} smaller than window {size}")));
    }
    Ok(PoolGeom {
        n,
        h,
        w,
        c,
        size,
        stride,
        ho: (h - size) / stride + 1,
        wo: (w - size) / stride + 1,
    })
}

/// Max pooling; returns the output and the flat input index of every maximum
/// (first occurrence wins on ties).
pub(crate) fn max_pool_forward<T: Float>(x: &Tensor<T>, g: &PoolGeom) -> (Tensor<T>, Vec<usize>) {
    let mut out = Vec::with_capacity(g.n * g.ho * g.wo * g.c);
    let mut arg = Vec::with_capacity(out.capacity());
    let d = x.data();
    for b in 0..g.n {
        for oy in 0..g.ho {
            for ox in 0..g.wo {
                for ch in 0..g.c {
                    let mut best = usize::MAX;
                    let mut best_v = T::neg_infinity();
                    for ky in 0..g.size {
                        for kx in 0..g.size {
                            let iy = oy * g.stride + ky;
                            let ix = ox * g.stride + kx;
                            let idx = ((b * g.h + iy) * g.w + ix) * g.c + ch;
                            if best == usize::MAX || d[idx] > best_v {
                                best = idx;
                                best_v = d[idx];
                            }
                        }
                    }
                    out.push(best_v);
                    arg.push(best);
                }
            }
        }
    }
    (tensor(&[g.n, g.ho, g.wo, g.c], out), arg)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct BnStats<T> {
    pub mean: T,
    pub inv_std: T,
    pub var: T,
}

/// Per-channel mean and biased variance over all leading axes.
pub(crate) fn channel_stats<T: Float>(x: &Tensor<T>, eps: T) -> Vec<BnStats<T>> {
    let c = *x.shape().last().expect("non-empty shape");
    let m = x.len() / c;
    let mut mean = vec![T::zero(); c];
    for row in x.data().chunks_exact(c) {
        for (a, &v) in mean.iter_mut().zip(row) {
            *a += v;
        }
    }
    let mf = T::of(m as f64);
    mean.iter_mut().for_each(|a| *a /= mf);
    // second pass removes the rounding residue of the first
    let mut residue = vec![T::zero(); c];
    for row in x.data().chunks_exact(c) {
        for ((r, &v), &mu) in residue.iter_mut().zip(row).zip(&mean) {
            *r += v - mu;
        }
    }
    for (mu, r) in mean.iter_mut().zip(residue) {
        *mu += r / mf;
    }
    let mut var = vec![T::zero(); c];
    for row in x.data().chunks_exact(c) {
        for ((a, &v), &mu) in var.iter_mut().zip(row).zip(&mean) {
            let d = v - mu;
            *a += d * d;
        }
    }
    mean.into_iter()
        .zip(var)
        .map(|(mean, v)| {
            let var = v / mf;
            BnStats {
                mean,
                var,
                inv_std: T::one() / (var + eps).sqrt(),
            }
        })
        .collect()
}

pub(crate) fn bn_forward<T: Float>(x: &Tensor<T>, gamma: &[T], beta: &[T], stats: &[BnStats<T>]) -> Tensor<T> {
    let c = stats.len();
    let mut out = x.clone();
    for row in out.data_mut().chunks_exact_mut(c) {
        for (ch, v) in row.iter_mut().enumerate() {
            let s = &stats[ch];
            *v = gamma[ch] * ((*v - s.mean) * s.inv_std) + beta[ch];
        }
    }
    out
}

/// Batch-norm backward. With `batch_stats` the statistics are treated as
/// functions of the input; otherwise they are constants (eval mode).
pub(crate) fn bn_backward<T: Float>(
    x: &Tensor<T>,
    gamma: &[T],
    stats: &[BnStats<T>],
    gy: &Tensor<T>,
    batch_stats: bool,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let c = stats.len();
    let m = x.len() / c;
    let mut dgamma = vec![T::zero(); c];
    let mut dbeta = vec![T::zero(); c];
    for (row, grow) in x.data().chunks_exact(c).zip(gy.data().chunks_exact(c)) {
        for ch in 0..c {
            let xhat = (row[ch] - stats[ch].mean) * stats[ch].inv_std;
            dgamma[ch] += grow[ch] * xhat;
            dbeta[ch] += grow[ch];
        }
    }
    let mut dx = gy.clone();
    let mf = T::of(m as f64);
    for (row, drow) in x.data().chunks_exact(c).zip(dx.data_mut().chunks_exact_mut(c)) {
        for ch in 0..c {
            let s = &stats[ch];
            if batch_stats {
                let xhat = (row[ch] - s.mean) * s.inv_std;
                // dxhat summed over the batch equals gamma·dbeta and gamma·dgamma.
                drow[ch] = gamma[ch] * s.inv_std / mf * (mf * drow[ch] - dbeta[ch] - xhat * dgamma[ch]);
            } else {
                drow[ch] = drow[ch] * gamma[ch] * s.inv_std;
            }
        }
    }
    (dx, tensor(&[c], dgamma), tensor(&[c], dbeta))
}
