use super::{Float, NumError, Tensor};

/// Probabilities closer than this to 0 or 1 are clamped before taking logs.
pub const BCE_CLAMP: f64 = 1e-7;

/// Row-wise softmax of an `N×C` tensor.
pub fn softmax<T: Float>(logits: &Tensor<T>) -> Tensor<T> {
    let c = logits.dim(logits.rank() - 1);
    let mut out = logits.clone();
    for row in out.data_mut().chunks_exact_mut(c) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut total = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

/// Mean softmax cross-entropy and its gradient `(softmax − onehot) / N`.
pub fn softmax_cross_entropy<T: Float>(logits: &Tensor<T>, labels: &[usize]) -> Result<(T, Tensor<T>), NumError> {
    if logits.rank() != 2 || logits.dim(0) != labels.len() {
        return Err(NumError::ShapeMismatch {
            op: "softmax_cross_entropy",
            detail: format!("logits {:?} vs {} labels", logits.shape(), labels.len()),
        });
    }
    let (n, c) = (logits.dim(0), logits.dim(1));
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(NumError::LabelOutOfRange { label: bad, classes: c });
    }
    let mut grad = softmax(logits);
    let inv_n = T::one() / T::of(n as f64);
    let mut loss = T::zero();
    for ((row, logit_row), &label) in grad
        .data_mut()
        .chunks_exact_mut(c)
        .zip(logits.data().chunks_exact(c))
        .zip(labels)
    {
        // log-sum-exp form keeps the loss finite for saturated logits
        let max = logit_row.iter().copied().fold(T::neg_infinity(), T::max);
        let lse = logit_row.iter().map(|&z| (z - max).exp()).sum::<T>().ln() + max;
        loss += lse - logit_row[label];
        row[label] -= T::one();
        row.iter_mut().for_each(|g| *g *= inv_n);
    }
    Ok((loss * inv_n, grad))
}

/// Mean binary cross-entropy of clamped predictions and its gradient.
pub fn binary_cross_entropy<T: Float>(predictions: &Tensor<T>, targets: &[T]) -> Result<(T, Tensor<T>), NumError> {
    if predictions.len() != targets.len() {
        return Err(NumError::ShapeMismatch {
            op: "binary_cross_entropy",
            detail: format!("{} predictions vs {} targets", predictions.len(), targets.len()),
        });
    }
    let lo = T::of(BCE_CLAMP);
    let hi = T::one() - lo;
    let inv_n = T::one() / T::of(targets.len() as f64);
    let mut loss = T::zero();
    let mut grad = predictions.clone();
    for (g, &t) in grad.data_mut().iter_mut().zip(targets) {
        let p = g.max(lo).min(hi);
        loss -= t * p.ln() + (T::one() - t) * (T::one() - p).ln();
        *g = (p - t) / (p * (T::one() - p)) * inv_n;
    }
    Ok((loss * inv_n, grad))
}

/// Mean binary cross-entropy of `sigmoid(logits)` computed from the logits
/// (`softplus(z) − t·z`), with gradient `(sigmoid(z) − t) / N`.
///
/// Equals [`binary_cross_entropy`] of the sigmoid outputs wherever the clamp
/// is inactive, but its gradient does not vanish when the sigmoid saturates.
pub fn binary_cross_entropy_with_logits<T: Float>(
    logits: &Tensor<T>,
    targets: &[T],
) -> Result<(T, Tensor<T>), NumError> {
    if logits.len() != targets.len() {
        return Err(NumError::ShapeMismatch {
            op: "binary_cross_entropy_with_logits",
            detail: format!("{} logits vs {} targets", logits.len(), targets.len()),
        });
    }
    let inv_n = T::one() / T::of(targets.len() as f64);
    let mut loss = T::zero();
    let mut grad = logits.clone();
    for (g, &t) in grad.data_mut().iter_mut().zip(targets) {
        let z = *g;
        let softplus = z.max(T::zero()) + (-z.abs()).exp().ln_1p();
        loss += softplus - t * z;
        *g = (sigmoid(z) - t) * inv_n;
    }
    Ok((loss * inv_n, grad))
}

pub(crate) fn sigmoid<T: Float>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `lambda1·Σ|w| + lambda2·Σw²` over all tensors, with gradient
/// `lambda1·sign(w) + 2·lambda2·w` (sign(0) = 0).
pub fn elastic_net_penalty<T: Float>(
    params: &[&Tensor<T>],
    lambda1: T,
    lambda2: T,
) -> Result<(T, Vec<Tensor<T>>), NumError> {
    if lambda1 < T::zero() || lambda2 < T::zero() || lambda1.is_nan() || lambda2.is_nan() {
        return Err(NumError::NegativeLambda {
            lambda1: lambda1.as_f64(),
            lambda2: lambda2.as_f64(),
        });
    }
    let two = T::of(2.0);
    let mut penalty = T::zero();
    let grads = params
        .iter()
        .map(|w| {
            let (mut l1, mut l2) = (T::zero(), T::zero());
            for &v in w.data() {
                l1 += v.abs();
                l2 += v * v;
            }
            penalty += lambda1 * l1 + lambda2 * l2;
            w.map(|v| {
                let sign = if v > T::zero() {
                    T::one()
                } else if v < T::zero() {
                    -T::one()
                } else {
                    T::zero()
                };
                lambda1 * sign + two * lambda2 * v
            })
        })
        .collect();
    Ok((penalty, grads))
}
