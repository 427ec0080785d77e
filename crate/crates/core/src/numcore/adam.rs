use super::{Float, NumError, Parameter, Tensor};

/// Moment estimates and hyper-parameters of the Adam optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub step_count: u64,
    pub first_moment: Vec<Tensor<T>>,
    pub second_moment: Vec<Tensor<T>>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl<T: Float> AdamState<T> {
    pub fn new(params: &[&Parameter<T>], learning_rate: f64, beta1: f64) -> Self {
        Self {
            step_count: 0,
            first_moment: params.iter().map(|p| Tensor::zeros(p.value.shape())).collect(),
            second_moment: params.iter().map(|p| Tensor::zeros(p.value.shape())).collect(),
            learning_rate,
            beta1,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam update using each parameter's `gradient`.
pub fn adam_step<T: Float>(params: &mut [&mut Parameter<T>], state: &mut AdamState<T>) -> Result<(), NumError> {
    if params.len() != state.first_moment.len() {
        return Err(NumError::ShapeMismatch {
            op: "adam_step",
            detail: format!(
                "{} parameters vs {} moment slots",
                params.len(),
                state.first_moment.len()
            ),
        });
    }
    for (p, m) in params.iter().zip(&state.first_moment) {
        if p.value.shape() != m.shape() || p.gradient.shape() != m.shape() {
            return Err(NumError::ShapeMismatch {
                op: "adam_step",
                detail: format!("parameter {} {:?} vs moment {:?}", p.name, p.value.shape(), m.shape()),
            });
        }
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (T::of(state.beta1), T::of(state.beta2));
    let correction1 = T::of(1.0 - state.beta1.powi(t));
    let correction2 = T::of(1.0 - state.beta2.powi(t));
    let lr = T::of(state.learning_rate);
    let eps = T::of(state.epsilon);
    let one = T::one();
    for ((p, m), v) in params
        .iter_mut()
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        let grads = p.gradient.data().to_vec();
        for (((w, &g), mi), vi) in p
            .value
            .data_mut()
            .iter_mut()
            .zip(&grads)
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            *mi = b1 * *mi + (one - b1) * g;
            *vi = b2 * *vi + (one - b2) * g * g;
            let m_hat = *mi / correction1;
            let v_hat = *vi / correction2;
            *w -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
