//! Randomized finite-difference cases, one per differentiable operation.
//! Each case builds shapes and values from its seed and returns the largest
//! relative gradient error.

use rand::Rng;
use signgan::numcore::*;

use super::*;

/// Maps a seed to the largest relative gradient error.
pub type Case = fn(u64) -> f64;

/// Every operation with its case function.
pub const CASES: [(&str, Case); 10] = [
    ("conv2d", conv2d),
    ("conv_transpose2d", conv_transpose2d),
    ("batch_norm", batch_norm),
    ("activation", activation),
    ("dense", dense),
    ("softmax_cross_entropy", softmax_cross_entropy),
    ("binary_cross_entropy", binary_cross_entropy),
    ("elastic_net", elastic_net),
    ("max_pool2d", max_pool2d),
    ("concat_bias_add", concat_bias_add),
];

pub fn conv2d(seed: u64) -> f64 {
    let mut r = rng(seed);
    let stride = r.random_range(1..=2);
    let pad = r.random_range(0..=1);
    let (kh, kw) = (r.random_range(1..=3), r.random_range(1..=3));
    let (h, w) = (r.random_range(kh.max(2)..=8), r.random_range(kw.max(2)..=8));
    let (cin, cout) = (r.random_range(1..=4), r.random_range(1..=4));
    let n = r.random_range(1..=2);
    let x = random_tensor(&mut r, &[n, h, w, cin], -1.0, 1.0);
    let k = random_tensor(&mut r, &[kh, kw, cin, cout], -1.0, 1.0);
    let ho = (h + 2 * pad - kh) / stride + 1;
    let wo = (w + 2 * pad - kw) / stride + 1;
    let proj = random_tensor(&mut r, &[n, ho, wo, cout], -1.0, 1.0);
    max_grad_error(&[x, k], |t, v| {
        let y = t.conv2d(v[0], v[1], stride, pad).unwrap();
        contract(t, y, &proj)
    })
}

pub fn conv_transpose2d(seed: u64) -> f64 {
    let mut r = rng(1000 + seed);
    let stride = r.random_range(1..=2);
    let pad = r.random_range(0..=1);
    let kh = r.random_range(2..=4);
    let (h, w) = (r.random_range(2..=5), r.random_range(2..=5));
    let (cin, cout) = (r.random_range(1..=4), r.random_range(1..=4));
    let n = r.random_range(1..=2);
    let x = random_tensor(&mut r, &[n, h, w, cin], -1.0, 1.0);
    let k = random_tensor(&mut r, &[kh, kh, cout, cin], -1.0, 1.0);
    let ho = (h - 1) * stride + kh - 2 * pad;
    let wo = (w - 1) * stride + kh - 2 * pad;
    let proj = random_tensor(&mut r, &[n, ho, wo, cout], -1.0, 1.0);
    max_grad_error(&[x, k], |t, v| {
        let y = t.conv_transpose2d(v[0], v[1], stride, pad).unwrap();
        contract(t, y, &proj)
    })
}

pub fn batch_norm(seed: u64) -> f64 {
    let mut r = rng(2000 + seed);
    let n = r.random_range(2..=4);
    let (h, w, c) = (r.random_range(1..=4), r.random_range(1..=4), r.random_range(1..=4));
    let x = random_tensor(&mut r, &[n, h, w, c], -2.0, 2.0);
    let gamma = random_tensor(&mut r, &[c], 0.5, 1.5);
    let beta = random_tensor(&mut r, &[c], -0.5, 0.5);
    let proj = random_tensor(&mut r, &[n, h, w, c], -1.0, 1.0);
    let running = RunningStats {
        mean: (0..c).map(|_| r.random_range(-0.5..0.5)).collect(),
        var: (0..c).map(|_| r.random_range(0.5..1.5)).collect(),
    };
    let mode = if seed % 4 == 3 {
        BatchNormMode::Eval
    } else {
        BatchNormMode::Train { update_running: false }
    };
    max_grad_error(&[x, gamma, beta], |t, v| {
        let mut stats = running.clone();
        let y = t
            .batch_norm(v[0], v[1], v[2], &mut stats, mode, BatchNormConfig::default())
            .unwrap();
        contract(t, y, &proj)
    })
}

pub fn activation(seed: u64) -> f64 {
    let kinds = [
        Activation::Relu,
        Activation::LeakyRelu(0.2),
        Activation::Tanh,
        Activation::Sigmoid,
    ];
    let mut r = rng(3000 + seed);
    let kind = kinds[seed as usize % kinds.len()];
    let shape = [r.random_range(1..=4), r.random_range(1..=8)];
    let x = away_from_zero(&mut r, &shape, 0.05, 3.0);
    let proj = random_tensor(&mut r, &shape, -1.0, 1.0);
    max_grad_error(&[x], |t, v| {
        let y = t.activation(v[0], kind).unwrap();
        contract(t, y, &proj)
    })
}

pub fn dense(seed: u64) -> f64 {
    let mut r = rng(4000 + seed);
    let (n, f, g) = (r.random_range(1..=4), r.random_range(1..=8), r.random_range(1..=8));
    let x = random_tensor(&mut r, &[n, f], -1.0, 1.0);
    let w = random_tensor(&mut r, &[f, g], -1.0, 1.0);
    let b = random_tensor(&mut r, &[g], -1.0, 1.0);
    let proj = random_tensor(&mut r, &[n, g], -1.0, 1.0);
    max_grad_error(&[x, w, b], |t, v| {
        let y = t.dense(v[0], v[1], v[2]).unwrap();
        contract(t, y, &proj)
    })
}

pub fn softmax_cross_entropy(seed: u64) -> f64 {
    let mut r = rng(5000 + seed);
    let (n, c) = (r.random_range(1..=4), r.random_range(2..=10));
    let z = random_tensor(&mut r, &[n, c], -3.0, 3.0);
    let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..c)).collect();
    max_grad_error(&[z], |t, v| t.softmax_cross_entropy(v[0], &labels).unwrap())
}

pub fn binary_cross_entropy(seed: u64) -> f64 {
    let mut r = rng(6000 + seed);
    let n = r.random_range(1..=8);
    let p = random_tensor(&mut r, &[n], 0.05, 0.95);
    let z = random_tensor(&mut r, &[n], -4.0, 4.0);
    let targets: Vec<f64> = (0..n).map(|_| r.random_range(0..2) as f64).collect();
    let probs = max_grad_error(&[p], |t, v| t.binary_cross_entropy(v[0], &targets).unwrap());
    let logits = max_grad_error(&[z], |t, v| t.binary_cross_entropy_with_logits(v[0], &targets).unwrap());
    probs.max(logits)
}

pub fn elastic_net(seed: u64) -> f64 {
    let mut r = rng(7000 + seed);
    let (la, lb) = (r.random_range(1..=6), r.random_range(1..=4));
    let a = away_from_zero(&mut r, &[la], 0.05, 2.0);
    let b = away_from_zero(&mut r, &[2, lb], 0.05, 2.0);
    let (l1, l2) = (r.random_range(0.0..1.0), r.random_range(0.0..1.0));
    max_grad_error(&[a, b], |t, v| t.elastic_net(v, l1, l2).unwrap())
}

pub fn max_pool2d(seed: u64) -> f64 {
    let mut r = rng(8000 + seed);
    let (n, h, w, c) = (
        r.random_range(1..=2),
        r.random_range(2..=8),
        r.random_range(2..=8),
        r.random_range(1..=4),
    );
    // distinct values spaced well beyond the probe step keep the argmax fixed
    let len = n * h * w * c;
    let mut values: Vec<f64> = (0..len).map(|i| i as f64 * 0.01).collect();
    for i in (1..len).rev() {
        values.swap(i, r.random_range(0..=i));
    }
    let x = Tensor::new(&[n, h, w, c], values).unwrap();
    let (ho, wo) = ((h - 2) / 2 + 1, (w - 2) / 2 + 1);
    let proj = random_tensor(&mut r, &[n, ho, wo, c], -1.0, 1.0);
    max_grad_error(&[x], |t, v| {
        let y = t.max_pool2d(v[0], 2, 2).unwrap();
        contract(t, y, &proj)
    })
}

pub fn concat_bias_add(seed: u64) -> f64 {
    let mut r = rng(9000 + seed);
    let (n, f1, f2) = (r.random_range(1..=3), r.random_range(1..=5), r.random_range(1..=5));
    let a = random_tensor(&mut r, &[n, f1], -1.0, 1.0);
    let b = random_tensor(&mut r, &[n, f2], -1.0, 1.0);
    let bias = random_tensor(&mut r, &[f1 + f2], -1.0, 1.0);
    let other = random_tensor(&mut r, &[n, f1 + f2], -1.0, 1.0);
    let proj = random_tensor(&mut r, &[n, f1 + f2], -1.0, 1.0);
    max_grad_error(&[a, b, bias, other], |t, v| {
        let c = t.concat(&[v[0], v[1]]).unwrap();
        let c = t.bias_add(c, v[2]).unwrap();
        let c = t.add(c, v[3]).unwrap();
        contract(t, c, &proj)
    })
}
