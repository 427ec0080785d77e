//! Finite-difference check of the whole classifier loss (cross-entropy plus
//! elastic net) in 64-bit, on sampled coordinates of every parameter and the input.

use std::ops::Range;

use rand::Rng;
use signgan::classifier::{build_classifier, classifier_forward};
use signgan::numcore::{Tape, Tensor, Var};

use super::{random_tensor, rel_err, rng};

const COORDS: usize = 12;
const STEP: f64 = 1e-6;
/// h versus h/2 disagreement marking a ReLU or max-pool switch inside the probe.
const KINK: f64 = 1e-5;

pub struct CompositeCheck {
    pub worst: f64,
    pub redrawn: usize,
    pub checked: usize,
}

pub fn check(seeds: Range<u64>) -> CompositeCheck {
    let mut out = CompositeCheck {
        worst: 0.0,
        redrawn: 0,
        checked: 0,
    };
    for seed in seeds {
        let mut r = rng(seed);
        let mut net = build_classifier::<f64>(seed);
        for p in &mut net.params {
            let scale = if p.name.ends_with(".b") { 0.1 } else { 0.15 };
            p.value = random_tensor(&mut r, p.value.shape(), -scale, scale);
        }
        let x = random_tensor(&mut r, &[2, 28, 28, 1], -1.0, 1.0);
        let labels = [r.random_range(0..10), r.random_range(0..10)];
        let loss = |tape: &mut Tape<f64>, params: &[Var], x| {
            let out = classifier_forward(tape, x, params).unwrap();
            let ce = tape.softmax_cross_entropy(out, &labels).unwrap();
            let weights: Vec<_> = [0, 2, 4, 6].iter().map(|&i| params[i]).collect();
            let pen = tape.elastic_net(&weights, 1e-3, 1e-3).unwrap();
            tape.add(ce, pen).unwrap()
        };
        let eval = |params: &[Tensor<f64>], x: &Tensor<f64>| {
            let mut tape = Tape::new();
            let vs: Vec<_> = params.iter().map(|p| tape.variable(p.clone())).collect();
            let xv = tape.variable(x.clone());
            let l = loss(&mut tape, &vs, xv);
            (tape, vs, xv, l)
        };
        let mut inputs: Vec<Tensor<f64>> = net.params.iter().map(|p| p.value.clone()).collect();
        inputs.push(x);
        let (tape, vs, xv, l) = eval(&inputs[..8], &inputs[8]);
        let grads = tape.backward(l).unwrap();
        let leaves: Vec<_> = vs.into_iter().chain([xv]).collect();
        let scalar = |probe: &[Tensor<f64>]| {
            let (t, _, _, l) = eval(&probe[..8], &probe[8]);
            t.value(l).item().unwrap()
        };
        let central = |i: usize, j: usize, h: f64| {
            let mut plus = inputs.clone();
            plus[i].data_mut()[j] += h;
            let mut minus = inputs.clone();
            minus[i].data_mut()[j] -= h;
            (scalar(&plus) - scalar(&minus)) / (2.0 * h)
        };
        for (i, leaf) in leaves.iter().enumerate() {
            let analytic = grads.wrt(*leaf);
            let mut done = 0;
            while done < COORDS {
                let j = r.random_range(0..inputs[i].len());
                let numeric = central(i, j, STEP);
                if rel_err(numeric, central(i, j, STEP / 2.0)) > KINK {
                    out.redrawn += 1;
                    continue;
                }
                out.worst = out.worst.max(rel_err(analytic.data()[j], numeric));
                done += 1;
            }
        }
        out.checked += leaves.len() * COORDS;
    }
    out
}
