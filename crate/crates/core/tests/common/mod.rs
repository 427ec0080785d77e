//! Test-only oracles: central finite differences and nested-loop reference
//! implementations that share no code with the library kernels.
#![allow(dead_code)]

pub mod composite;
pub mod gradcases;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signgan::numcore::{Tape, Tensor, Var};

pub const FD_STEP: f64 = 1e-5;
/// Gradient entries smaller than this are compared absolutely rather than relatively.
pub const REL_FLOOR: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut impl Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| rng.random_range(lo..hi))
}

/// Values in `[-hi, -lo] ∪ [lo, hi]`, away from activation kinks.
pub fn away_from_zero(rng: &mut impl Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| {
        let m = rng.random_range(lo..hi);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    })
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

/// Contract `out` with the fixed tensor `weights` into a scalar on the tape.
pub fn contract(tape: &mut Tape<f64>, out: Var, weights: &Tensor<f64>) -> Var {
    let n = tape.value(out).len();
    let flat = tape.reshape(out, &[1, n]).unwrap();
    let w = tape.constant(weights.clone().reshape(&[n, 1]).unwrap());
    let b = tape.constant(Tensor::zeros(&[1]));
    tape.dense(flat, w, b).unwrap()
}

/// Compare reverse-mode gradients of `build` against central differences.
///
/// `build` records a scalar loss from the given input leaves. Returns the
/// largest relative error over every element of every input.
pub fn max_grad_error(inputs: &[Tensor<f64>], build: impl Fn(&mut Tape<f64>, &[Var]) -> Var) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.variable(t.clone())).collect();
    let loss = build(&mut tape, &vars);
    let grads = tape.backward(loss).unwrap();
    let eval = |probe: &[Tensor<f64>]| {
        let mut t = Tape::new();
        let vs: Vec<Var> = probe.iter().map(|x| t.variable(x.clone())).collect();
        let l = build(&mut t, &vs);
        t.value(l).item().unwrap()
    };
    let mut worst = 0.0f64;
    for (i, v) in vars.iter().enumerate() {
        let analytic = grads.wrt(*v);
        for j in 0..inputs[i].len() {
            let mut plus = inputs.to_vec();
            plus[i].data_mut()[j] += FD_STEP;
            let mut minus = inputs.to_vec();
            minus[i].data_mut()[j] -= FD_STEP;
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * FD_STEP);
            let e = rel_err(analytic.data()[j], numeric);
            if std::env::var("FD_DEBUG").is_ok() && e > 1e-5 {
                eprintln!(
                    "input {i} elem {j}: analytic {:e} numeric {:e}",
                    analytic.data()[j],
                    numeric
                );
            }
            worst = worst.max(e);
        }
    }
    worst
}

/// Direct NHWC convolution with zero padding, `[kh, kw, cin, cout]` kernel.
pub fn conv2d_reference(x: &Tensor<f64>, k: &Tensor<f64>, stride: usize, pad: usize) -> Tensor<f64> {
    let (n, h, w, cin) = (x.dim(0), x.dim(1), x.dim(2), x.dim(3));
    let (kh, kw, _, cout) = (k.dim(0), k.dim(1), k.dim(2), k.dim(3));
    let ho = (h + 2 * pad - kh) / stride + 1;
    let wo = (w + 2 * pad - kw) / stride + 1;
    let mut out = vec![0.0; n * ho * wo * cout];
    for b in 0..n {
        for oy in 0..ho {
            for ox in 0..wo {
                for co in 0..cout {
                    let mut acc = 0.0;
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let iy = (oy * stride + ky) as isize - pad as isize;
                            let ix = (ox * stride + kx) as isize - pad as isize;
                            if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                continue;
                            }
                            for ci in 0..cin {
                                let xv = x.data()[((b * h + iy as usize) * w + ix as usize) * cin + ci];
                                let kv = k.data()[((ky * kw + kx) * cin + ci) * cout + co];
                                acc += xv * kv;
                            }
                        }
                    }
                    out[((b * ho + oy) * wo + ox) * cout + co] = acc;
                }
            }
        }
    }
    Tensor::new(&[n, ho, wo, cout], out).unwrap()
}

/// Direct scatter form of the transposed convolution: every input pixel
/// stamps the kernel into the (cropped) output.
pub fn conv_transpose2d_reference(y: &Tensor<f64>, k: &Tensor<f64>, stride: usize, pad: usize) -> Tensor<f64> {
    let (n, hi, wi, cin) = (y.dim(0), y.dim(1), y.dim(2), y.dim(3));
    let (kh, kw, cout, _) = (k.dim(0), k.dim(1), k.dim(2), k.dim(3));
    let ho = (hi - 1) * stride + kh - 2 * pad;
    let wo = (wi - 1) * stride + kw - 2 * pad;
    let mut out = vec![0.0; n * ho * wo * cout];
    for b in 0..n {
        for iy in 0..hi {
            for ix in 0..wi {
                for ci in 0..cin {
                    let v = y.data()[((b * hi + iy) * wi + ix) * cin + ci];
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let oy = (iy * stride + ky) as isize - pad as isize;
                            let ox = (ix * stride + kx) as isize - pad as isize;
                            if oy < 0 || ox < 0 || oy >= ho as isize || ox >= wo as isize {
                                continue;
                            }
                            for co in 0..cout {
                                out[((b * ho + oy as usize) * wo + ox as usize) * cout + co] +=
                                    v * k.data()[((ky * kw + kx) * cout + co) * cin + ci];
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::new(&[n, ho, wo, cout], out).unwrap()
}

pub fn dense_reference(x: &Tensor<f64>, w: &Tensor<f64>, b: &Tensor<f64>) -> Tensor<f64> {
    let (n, f, g) = (x.dim(0), x.dim(1), w.dim(1));
    let mut out = vec![0.0; n * g];
    for i in 0..n {
        for j in 0..g {
            let mut acc = b.data()[j];
            for k in 0..f {
                acc += x.data()[i * f + k] * w.data()[k * g + j];
            }
            out[i * g + j] = acc;
        }
    }
    Tensor::new(&[n, g], out).unwrap()
}
