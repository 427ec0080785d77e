use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Float, Tensor};

/// Standard deviation of the Gaussian used for conv/dense weights.
pub const INIT_STD: f64 = 0.02;

/// A named trainable tensor and its accumulated gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameter<T> {
    pub name: String,
    pub value: Tensor<T>,
    pub gradient: Tensor<T>,
}

impl<T: Float> Parameter<T> {
    pub fn new(name: impl Into<String>, value: Tensor<T>) -> Self {
        let gradient = Tensor::zeros(value.shape());
        Self {
            name: name.into(),
            value,
            gradient,
        }
    }

    /// Zero-mean Gaussian weights with standard deviation [`INIT_STD`].
    pub fn gaussian(name: impl Into<String>, shape: &[usize], rng: &mut impl Rng) -> Self {
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let value = Tensor::from_fn(shape, |_| T::of(normal.sample(rng)));
        Self::new(name, value)
    }

    pub fn constant(name: impl Into<String>, shape: &[usize], value: f64) -> Self {
        Self::new(name, Tensor::full(shape, T::of(value)))
    }

    pub fn zero_grad(&mut self) {
        self.gradient.data_mut().iter_mut().for_each(|g| *g = T::zero());
    }
}
