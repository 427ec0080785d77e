//! Reverse-mode computation record.
//!
//! Every operation appends a node holding its output value and whatever it
//! needs for the backward pass. [`Tape::backward`] walks the nodes in reverse.

use super::kernels::{self, BnStats, ConvGeom, PoolGeom};
use super::loss;
use super::{Float, NumError, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::LeakyRelu(_) => "leaky_relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn apply<T: Float>(&self, x: T) -> T {
        match *self {
            Activation::Relu => x.max(T::zero()),
            Activation::LeakyRelu(a) => {
                if x > T::zero() {
                    x
                } else {
                    T::of(a) * x
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => loss::sigmoid(x),
        }
    }

    /// Derivative expressed through the input `x` and output `y`.
    fn derivative<T: Float>(&self, x: T, y: T) -> T {
        match *self {
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::LeakyRelu(a) => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::of(a)
                }
            }
            Activation::Tanh => T::one() - y * y,
            Activation::Sigmoid => y * (T::one() - y),
        }
    }
}

/// Running mean/variance of a batch-norm layer.
#[derive(Clone, Debug, PartialEq)]
pub struct RunningStats<T> {
    pub mean: Vec<T>,
    pub var: Vec<T>,
}

impl<T: Float> RunningStats<T> {
    pub fn new(channels: usize) -> Self {
        Self {
            mean: vec![T::zero(); channels],
            var: vec![T::one(); channels],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchNormMode {
    /// Normalize by batch statistics; optionally fold them into the running stats.
    Train { update_running: bool },
    /// Normalize by the running statistics.
    Eval,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchNormConfig {
    pub momentum: f64,
    pub epsilon: f64,
}

impl Default for BatchNormConfig {
    fn default() -> Self {
        Self {
            momentum: 0.9,
            epsilon: 1e-5,
        }
    }
}

#[derive(Clone, Debug)]
enum Op<T> {
    Leaf,
    Conv2d {
        x: Var,
        k: Var,
        geom: ConvGeom,
    },
    ConvT2d {
        x: Var,
        k: Var,
        geom: ConvGeom,
    },
    BiasAdd {
        x: Var,
        b: Var,
    },
    BatchNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        stats: Vec<BnStats<T>>,
        batch_stats: bool,
        eps: T,
    },
    Act {
        x: Var,
        kind: Activation,
    },
    Dense {
        x: Var,
        w: Var,
        b: Var,
    },
    MaxPool {
        x: Var,
        geom: PoolGeom,
        argmax: Vec<usize>,
    },
    Reshape {
        x: Var,
    },
    Concat {
        parts: Vec<Var>,
    },
    Add {
        a: Var,
        b: Var,
    },
    SoftmaxCe {
        logits: Var,
        labels: Vec<usize>,
    },
    Bce {
        p: Var,
        targets: Vec<T>,
    },
    BceLogits {
        z: Var,
        targets: Vec<T>,
    },
    ElasticNet {
        params: Vec<Var>,
        l1: T,
        l2: T,
    },
}

#[derive(Clone, Debug)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    requires_grad: bool,
}

/// Ordered record of operations sufficient for exact reverse-mode gradients.
#[derive(Clone, Debug, Default)]
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

/// Gradients of one scalar loss with respect to every recorded value.
#[derive(Debug)]
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
    shapes: Vec<Vec<usize>>,
}

impl<T: Float> Gradients<T> {
    /// Gradient of `var`, or `None` if the loss does not depend on it.
    pub fn get(&self, var: Var) -> Option<&Tensor<T>> {
        self.grads[var.0].as_ref()
    }

    /// Gradient of `var`, zeros when the loss does not depend on it.
    pub fn wrt(&self, var: Var) -> Tensor<T> {
        self.grads[var.0]
            .clone()
            .unwrap_or_else(|| Tensor::zeros(&self.shapes[var.0]))
    }
}

fn unary(x: Var) -> Vec<Var> {
    vec![x]
}

impl<T: Float> Op<T> {
    fn inputs(&self) -> Vec<Var> {
        match self {
            Op::Leaf => vec![],
            Op::Conv2d { x, k, .. } | Op::ConvT2d { x, k, .. } => vec![*x, *k],
            Op::BiasAdd { x, b } => vec![*x, *b],
            Op::BatchNorm { x, gamma, beta, .. } => vec![*x, *gamma, *beta],
            Op::Act { x, .. } | Op::MaxPool { x, .. } | Op::Reshape { x } => unary(*x),
            Op::Dense { x, w, b } => vec![*x, *w, *b],
            Op::Concat { parts } => parts.clone(),
            Op::Add { a, b } => vec![*a, *b],
            Op::SoftmaxCe { logits, .. } => unary(*logits),
            Op::Bce { p, .. } => unary(*p),
            Op::BceLogits { z, .. } => unary(*z),
            Op::ElasticNet { params, .. } => params.clone(),
        }
    }
}

impl<T: Float> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Record an input that gradients are not propagated into.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Record a differentiable input (a parameter or a probed input).
    pub fn variable(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_op(&mut self, value: Tensor<T>, op: Op<T>) -> Var {
        let requires_grad = op.inputs().iter().any(|v| self.nodes[v.0].requires_grad);
        self.push(value, op, requires_grad)
    }

    pub fn conv2d(&mut self, x: Var, k: Var, stride: usize, padding: usize) -> Result<Var, NumError> {
        let geom = kernels::conv_geom(self.value(x), self.value(k), stride, padding, "conv2d")?;
        let out = kernels::conv2d_forward(self.value(x), self.value(k), &geom);
        Ok(self.push_op(out, Op::Conv2d { x, k, geom }))
    }

    /// Fractionally-strided convolution: the adjoint of [`Tape::conv2d`] with
    /// the same kernel tensor, mapping kernel dim 3 channels to dim 2 channels.
    pub fn conv_transpose2d(&mut self, x: Var, k: Var, stride: usize, padding: usize) -> Result<Var, NumError> {
        let geom = kernels::conv_t_geom(self.value(x), self.value(k), stride, padding)?;
        let out = kernels::conv_t_forward(self.value(x), self.value(k), &geom);
        Ok(self.push_op(out, Op::ConvT2d { x, k, geom }))
    }

    /// Adds a per-channel bias along the last axis.
    pub fn bias_add(&mut self, x: Var, b: Var) -> Result<Var, NumError> {
        let c = *self.value(x).shape().last().expect("non-empty shape");
        if self.value(b).shape() != [c] {
            return Err(NumError::ShapeMismatch {
                op: "bias_add",
                detail: format!("bias {:?} vs {c} channels", self.value(b).shape()),
            });
        }
        let mut out = self.value(x).clone();
        let bias = self.value(b).data();
        for row in out.data_mut().chunks_exact_mut(c) {
            for (v, &bv) in row.iter_mut().zip(bias) {
                *v += bv;
            }
        }
        Ok(self.push_op(out, Op::BiasAdd { x, b }))
    }

    /// Batch normalization over all axes but the last (channel) one.
    pub fn batch_norm(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        running: &mut RunningStats<T>,
        mode: BatchNormMode,
        config: BatchNormConfig,
    ) -> Result<Var, NumError> {
        let input = self.value(x);
        let c = *input.shape().last().expect("non-empty shape");
        for (name, v) in [("gamma", gamma), ("beta", beta)] {
            if self.value(v).shape() != [c] {
                return Err(NumError::ShapeMismatch {
                    op: "batch_norm",
                    detail: format!("{name} {:?} vs {c} channels", self.value(v).shape()),
                });
            }
        }
        if running.mean.len() != c || running.var.len() != c {
            return Err(NumError::ShapeMismatch {
                op: "batch_norm",
                detail: format!("running stats for {} channels vs {c}", running.mean.len()),
            });
        }
        let eps = T::of(config.epsilon);
        let (stats, batch_stats) = match mode {
            BatchNormMode::Train { update_running } => {
                if input.dim(0) < 2 {
                    return Err(NumError::BatchTooSmall(input.dim(0)));
                }
                let stats = kernels::channel_stats(input, eps);
                if update_running {
                    let mom = T::of(config.momentum);
                    let keep = T::one() - mom;
                    for (ch, s) in stats.iter().enumerate() {
                        running.mean[ch] = mom * running.mean[ch] + keep * s.mean;
                        running.var[ch] = mom * running.var[ch] + keep * s.var;
                    }
                }
                (stats, true)
            }
            BatchNormMode::Eval => (
                running
                    .mean
                    .iter()
                    .zip(&running.var)
                    .map(|(&mean, &var)| BnStats {
                        mean,
                        var,
                        inv_std: T::one() / (var + eps).sqrt(),
                    })
                    .collect(),
                false,
            ),
        };
        let out = kernels::bn_forward(input, self.value(gamma).data(), self.value(beta).data(), &stats);
        Ok(self.push_op(
            out,
            Op::BatchNorm {
                x,
                gamma,
                beta,
                stats,
                batch_stats,
                eps,
            },
        ))
    }

    pub fn activation(&mut self, x: Var, kind: Activation) -> Result<Var, NumError> {
        if let Activation::LeakyRelu(a) = kind {
            if !(a > 0.0 && a < 1.0) {
                return Err(NumError::InvalidParameter(format!(
                    "leaky_relu alpha {a} outside (0,1)"
                )));
            }
        }
        let out = self.value(x).map(|v| kind.apply(v));
        Ok(self.push_op(out, Op::Act { x, kind }))
    }

    pub fn dense(&mut self, x: Var, w: Var, b: Var) -> Result<Var, NumError> {
        kernels::dense_check(self.value(x), self.value(w), self.value(b))?;
        let out = kernels::dense_forward(self.value(x), self.value(w), self.value(b));
        Ok(self.push_op(out, Op::Dense { x, w, b }))
    }

    pub fn max_pool2d(&mut self, x: Var, size: usize, stride: usize) -> Result<Var, NumError> {
        let geom = kernels::pool_geom(self.value(x), size, stride)?;
        let (out, argmax) = kernels::max_pool_forward(self.value(x), &geom);
        Ok(self.push_op(out, Op::MaxPool { x, geom, argmax }))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var, NumError> {
        let out = self.value(x).clone().reshape(shape)?;
        Ok(self.push_op(out, Op::Reshape { x }))
    }

    /// Collapse every axis after the first: `[n, ...] → [n, prod(...)]`.
    pub fn flatten(&mut self, x: Var) -> Result<Var, NumError> {
        let t = self.value(x);
        let n = t.dim(0);
        let f = t.len() / n;
        self.reshape(x, &[n, f])
    }

    /// Concatenate 2-D tensors along the feature axis.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, NumError> {
        let first = parts
            .first()
            .ok_or_else(|| NumError::InvalidParameter("concat of nothing".into()))?;
        let n = self.value(*first).dim(0);
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let t = self.value(p);
            if t.rank() != 2 || t.dim(0) != n {
                return Err(NumError::ShapeMismatch {
                    op: "concat",
                    detail: format!("part {:?} does not match batch {n}", t.shape()),
                });
            }
            widths.push(t.dim(1));
        }
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(n * total);
        for row in 0..n {
            for (&p, &w) in parts.iter().zip(&widths) {
                out.extend_from_slice(&self.value(p).data()[row * w..(row + 1) * w]);
            }
        }
        let out = Tensor::new(&[n, total], out)?;
        Ok(self.push_op(out, Op::Concat { parts: parts.to_vec() }))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(NumError::ShapeMismatch {
                op: "add",
                detail: format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape()),
            });
        }
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        Ok(self.push_op(out, Op::Add { a, b }))
    }

    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var, NumError> {
        let (l, _) = loss::softmax_cross_entropy(self.value(logits), labels)?;
        Ok(self.push_op(
            Tensor::scalar(l),
            Op::SoftmaxCe {
                logits,
                labels: labels.to_vec(),
            },
        ))
    }

    pub fn binary_cross_entropy(&mut self, p: Var, targets: &[T]) -> Result<Var, NumError> {
        let (l, _) = loss::binary_cross_entropy(self.value(p), targets)?;
        Ok(self.push_op(
            Tensor::scalar(l),
            Op::Bce {
                p,
                targets: targets.to_vec(),
            },
        ))
    }

    pub fn binary_cross_entropy_with_logits(&mut self, z: Var, targets: &[T]) -> Result<Var, NumError> {
        let (l, _) = loss::binary_cross_entropy_with_logits(self.value(z), targets)?;
        Ok(self.push_op(
            Tensor::scalar(l),
            Op::BceLogits {
                z,
                targets: targets.to_vec(),
            },
        ))
    }

    pub fn elastic_net(&mut self, params: &[Var], lambda1: T, lambda2: T) -> Result<Var, NumError> {
        let values: Vec<&Tensor<T>> = params.iter().map(|&p| self.value(p)).collect();
        let (penalty, _) = loss::elastic_net_penalty(&values, lambda1, lambda2)?;
        Ok(self.push_op(
            Tensor::scalar(penalty),
            Op::ElasticNet {
                params: params.to_vec(),
                l1: lambda1,
                l2: lambda2,
            },
        ))
    }

    /// Exact gradients of the scalar `loss` with respect to every node.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>, NumError> {
        let n_elem = self.value(loss).len();
        if n_elem != 1 {
            return Err(NumError::NonScalarLoss(self.value(loss).shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::full(self.value(loss).shape(), T::one()));
        for idx in (0..=loss.0).rev() {
            let Some(gy) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if node.requires_grad {
                self.propagate(node, &gy, &mut grads);
            }
            grads[idx] = Some(gy);
        }
        Ok(Gradients {
            grads,
            shapes: self.nodes.iter().map(|n| n.value.shape().to_vec()).collect(),
        })
    }

    fn need(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn propagate(&self, node: &Node<T>, gy: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) {
        let mut send = |v: Var, g: Tensor<T>| match &mut grads[v.0] {
            Some(acc) => acc.add_assign(&g),
            slot @ None => *slot = Some(g),
        };
        match &node.op {
            Op::Leaf => {}
            Op::Conv2d { x, k, geom } => {
                let (dx, dk) =
                    kernels::conv2d_backward(self.value(*x), self.value(*k), gy, geom, self.need(*x), self.need(*k));
                if let Some(g) = dx {
                    send(*x, g);
                }
                if let Some(g) = dk {
                    send(*k, g);
                }
            }
            Op::ConvT2d { x, k, geom } => {
                let (dx, dk) =
                    kernels::conv_t_backward(self.value(*x), self.value(*k), gy, geom, self.need(*x), self.need(*k));
                if let Some(g) = dx {
                    send(*x, g);
                }
                if let Some(g) = dk {
                    send(*k, g);
                }
            }
            Op::BiasAdd { x, b } => {
                if self.need(*b) {
                    let c = self.value(*b).len();
                    let mut db = vec![T::zero(); c];
                    for row in gy.data().chunks_exact(c) {
                        for (d, &v) in db.iter_mut().zip(row) {
                            *d += v;
                        }
                    }
                    send(*b, Tensor::new(&[c], db).expect("bias shape"));
                }
                if self.need(*x) {
                    send(*x, gy.clone());
                }
            }
            Op::BatchNorm {
                x,
                gamma,
                beta,
                stats,
                batch_stats,
                ..
            } => {
                let (dx, dgamma, dbeta) =
                    kernels::bn_backward(self.value(*x), self.value(*gamma).data(), stats, gy, *batch_stats);
                if self.need(*x) {
                    send(*x, dx);
                }
                if self.need(*gamma) {
                    send(*gamma, dgamma);
                }
                if self.need(*beta) {
                    send(*beta, dbeta);
                }
            }
            Op::Act { x, kind } => {
                let mut dx = gy.clone();
                for ((d, &xi), &yi) in dx
                    .data_mut()
                    .iter_mut()
                    .zip(self.value(*x).data())
                    .zip(node.value.data())
                {
                    *d *= kind.derivative(xi, yi);
                }
                send(*x, dx);
            }
            Op::Dense { x, w, b } => {
                let [dx, dw, db] = kernels::dense_backward(
                    self.value(*x),
                    self.value(*w),
                    gy,
                    [self.need(*x), self.need(*w), self.need(*b)],
                );
                if let Some(g) = dx {
                    send(*x, g);
                }
                if let Some(g) = dw {
                    send(*w, g);
                }
                if let Some(g) = db {
                    send(*b, g);
                }
            }
            Op::MaxPool { x, argmax, .. } => {
                let mut dx = Tensor::zeros(self.value(*x).shape());
                let d = dx.data_mut();
                for (&i, &g) in argmax.iter().zip(gy.data()) {
                    d[i] += g;
                }
                send(*x, dx);
            }
            Op::Reshape { x } => {
                let g = gy.clone().reshape(self.value(*x).shape()).expect("same element count");
                send(*x, g);
            }
            Op::Concat { parts } => {
                let n = gy.dim(0);
                let total = gy.dim(1);
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).dim(1);
                    if self.need(p) {
                        let mut g = Vec::with_capacity(n * w);
                        for row in 0..n {
                            g.extend_from_slice(&gy.data()[row * total + offset..row * total + offset + w]);
                        }
                        send(p, Tensor::new(&[n, w], g).expect("concat part shape"));
                    }
                    offset += w;
                }
            }
            Op::Add { a, b } => {
                if self.need(*a) {
                    send(*a, gy.clone());
                }
                if self.need(*b) {
                    send(*b, gy.clone());
                }
            }
            Op::SoftmaxCe { logits, labels } => {
                let (_, g) = loss::softmax_cross_entropy(self.value(*logits), labels).expect("validated on record");
                send(*logits, scale(g, gy));
            }
            Op::Bce { p, targets } => {
                let (_, g) = loss::binary_cross_entropy(self.value(*p), targets).expect("validated on record");
                send(*p, scale(g, gy));
            }
            Op::BceLogits { z, targets } => {
                let (_, g) =
                    loss::binary_cross_entropy_with_logits(self.value(*z), targets).expect("validated on record");
                send(*z, scale(g, gy));
            }
            Op::ElasticNet { params, l1, l2 } => {
                let values: Vec<&Tensor<T>> = params.iter().map(|&p| self.value(p)).collect();
                let (_, gs) = loss::elastic_net_penalty(&values, *l1, *l2).expect("validated on record");
                for (&p, g) in params.iter().zip(gs) {
                    if self.need(p) {
                        send(p, scale(g, gy));
                    }
                }
            }
        }
    }

    /// Recompute every node forward from the recorded leaves.
    pub fn replay(&self) -> Vec<Tensor<T>> {
        let mut out: Vec<Tensor<T>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = |var: &Var| &out[var.0];
            let value = match &node.op {
                Op::Leaf => node.value.clone(),
                Op::Conv2d { x, k, geom } => kernels::conv2d_forward(v(x), v(k), geom),
                Op::ConvT2d { x, k, geom } => kernels::conv_t_forward(v(x), v(k), geom),
                Op::BiasAdd { x, b } => {
                    let c = v(b).len();
                    let mut t = v(x).clone();
                    for row in t.data_mut().chunks_exact_mut(c) {
                        for (a, &bv) in row.iter_mut().zip(v(b).data()) {
                            *a += bv;
                        }
                    }
                    t
                }
                Op::BatchNorm {
                    x,
                    gamma,
                    beta,
                    stats,
                    batch_stats,
                    eps,
                } => {
                    let stats = if *batch_stats {
                        kernels::channel_stats(v(x), *eps)
                    } else {
                        stats.clone()
                    };
                    kernels::bn_forward(v(x), v(gamma).data(), v(beta).data(), &stats)
                }
                Op::Act { x, kind } => v(x).map(|e| kind.apply(e)),
                Op::Dense { x, w, b } => kernels::dense_forward(v(x), v(w), v(b)),
                Op::MaxPool { x, geom, .. } => kernels::max_pool_forward(v(x), geom).0,
                Op::Reshape { x } => v(x).clone().reshape(node.value.shape()).expect("recorded shape"),
                Op::Concat { parts } => {
                    let n = node.value.dim(0);
                    let mut data = Vec::with_capacity(node.value.len());
                    for row in 0..n {
                        for p in parts {
                            data.extend_from_slice(v(p).outer(row));
                        }
                    }
                    Tensor::new(node.value.shape(), data).expect("recorded shape")
                }
                Op::Add { a, b } => {
                    let mut t = v(a).clone();
                    t.add_assign(v(b));
                    t
                }
                Op::SoftmaxCe { logits, labels } => {
                    Tensor::scalar(loss::softmax_cross_entropy(v(logits), labels).expect("recorded").0)
                }
                Op::Bce { p, targets } => {
                    Tensor::scalar(loss::binary_cross_entropy(v(p), targets).expect("recorded").0)
                }
                Op::BceLogits { z, targets } => Tensor::scalar(
                    loss::binary_cross_entropy_with_logits(v(z), targets)
                        .expect("recorded")
                        .0,
                ),
                Op::ElasticNet { params, l1, l2 } => {
                    let values: Vec<&Tensor<T>> = params.iter().map(v).collect();
                    Tensor::scalar(loss::elastic_net_penalty(&values, *l1, *l2).expect("recorded").0)
                }
            };
            out.push(value);
        }
        out
    }

    /// Whether [`Tape::replay`] reproduces every recorded value bit-exactly.
    pub fn replay_matches(&self) -> bool {
        self.replay().iter().zip(&self.nodes).all(|(r, n)| {
            r.shape() == n.value.shape() && r.data().iter().zip(n.value.data()).all(|(a, b)| a.to_bits_eq(b))
        })
    }
}

fn scale<T: Float>(mut g: Tensor<T>, gy: &Tensor<T>) -> Tensor<T> {
    let s = gy.data()[0];
    if s != T::one() {
        g.data_mut().iter_mut().for_each(|v| *v *= s);
    }
    g
}

trait BitEq {
    fn to_bits_eq(&self, other: &Self) -> bool;
}

impl<T: Float> BitEq for T {
    fn to_bits_eq(&self, other: &Self) -> bool {
        self.as_f64().to_bits() == other.as_f64().to_bits()
    }
}
