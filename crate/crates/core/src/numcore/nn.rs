//! Sequential layer stacks built on the [`Tape`] operations.

use super::{
    Activation, BatchNormConfig, BatchNormMode, Float, Gradients, NumError, Parameter, RunningStats, Tape, Var,
};

#[derive(Clone, Debug, PartialEq)]
pub enum Layer<T> {
    Dense {
        weights: Parameter<T>,
        bias: Parameter<T>,
    },
    Conv2d {
        kernel: Parameter<T>,
        bias: Option<Parameter<T>>,
        stride: usize,
        padding: usize,
    },
    ConvTranspose2d {
        kernel: Parameter<T>,
        bias: Option<Parameter<T>>,
        stride: usize,
        padding: usize,
    },
    BatchNorm {
        gamma: Parameter<T>,
        beta: Parameter<T>,
        running: RunningStats<T>,
        config: BatchNormConfig,
    },
    Activation(Activation),
    /// Reshape each sample to the given per-sample shape.
    Reshape(Vec<usize>),
    Flatten,
    MaxPool2d {
        size: usize,
        stride: usize,
    },
}

impl<T: Float> Layer<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Dense { .. } => "dense",
            Layer::Conv2d { .. } => "conv2d",
            Layer::ConvTranspose2d { .. } => "conv_transpose2d",
            Layer::BatchNorm { .. } => "batch_norm",
            Layer::Activation(a) => a.name(),
            Layer::Reshape(_) => "reshape",
            Layer::Flatten => "flatten",
            Layer::MaxPool2d { .. } => "max_pool2d",
        }
    }

    pub fn parameters(&self) -> Vec<&Parameter<T>> {
        match self {
            Layer::Dense { weights, bias } => vec![weights, bias],
            Layer::Conv2d { kernel, bias, .. } | Layer::ConvTranspose2d { kernel, bias, .. } => {
                std::iter::once(kernel).chain(bias.as_ref()).collect()
            }
            Layer::BatchNorm { gamma, beta, .. } => vec![gamma, beta],
            _ => vec![],
        }
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter<T>> {
        match self {
            Layer::Dense { weights, bias } => vec![weights, bias],
            Layer::Conv2d { kernel, bias, .. } | Layer::ConvTranspose2d { kernel, bias, .. } => {
                std::iter::once(kernel).chain(bias.as_mut()).collect()
            }
            Layer::BatchNorm { gamma, beta, .. } => vec![gamma, beta],
            _ => vec![],
        }
    }
}

/// Whether parameters enter the tape as differentiable leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    Trainable,
    Frozen,
}

/// Values recorded by one forward pass.
#[derive(Clone, Debug)]
pub struct Forward {
    /// Output of every layer, in order.
    pub outputs: Vec<Var>,
    /// Tape handles of the parameters, in [`Sequential::parameters`] order.
    pub params: Vec<Var>,
}

impl Forward {
    pub fn output(&self) -> Var {
        *self.outputs.last().expect("at least one layer")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sequential<T> {
    pub layers: Vec<Layer<T>>,
}

pub(crate) fn bind<T: Float>(tape: &mut Tape<T>, p: &Parameter<T>, binding: Binding) -> Var {
    match binding {
        Binding::Trainable => tape.variable(p.value.clone()),
        Binding::Frozen => tape.constant(p.value.clone()),
    }
}

impl<T: Float> Sequential<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Self {
        Self { layers }
    }

    pub fn parameters(&self) -> Vec<&Parameter<T>> {
        self.layers.iter().flat_map(|l| l.parameters()).collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter<T>> {
        self.layers.iter_mut().flat_map(|l| l.parameters_mut()).collect()
    }

    pub fn running_stats(&self) -> Vec<&RunningStats<T>> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::BatchNorm { running, .. } => Some(running),
                _ => None,
            })
            .collect()
    }

    pub fn running_stats_mut(&mut self) -> Vec<&mut RunningStats<T>> {
        self.layers
            .iter_mut()
            .filter_map(|l| match l {
                Layer::BatchNorm { running, .. } => Some(running),
                _ => None,
            })
            .collect()
    }

    /// Record a forward pass. In train mode batch-norm layers may update their
    /// running statistics, hence `&mut self`.
    pub fn forward(
        &mut self,
        tape: &mut Tape<T>,
        input: Var,
        mode: BatchNormMode,
        binding: Binding,
    ) -> Result<Forward, NumError> {
        let mut x = input;
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut params = Vec::new();
        for layer in &mut self.layers {
            x = match layer {
                Layer::Dense { weights, bias } => {
                    let w = bind(tape, weights, binding);
                    let b = bind(tape, bias, binding);
                    params.extend([w, b]);
                    tape.dense(x, w, b)?
                }
                Layer::Conv2d {
                    kernel,
                    bias,
                    stride,
                    padding,
                } => {
                    let k = bind(tape, kernel, binding);
                    params.push(k);
                    let y = tape.conv2d(x, k, *stride, *padding)?;
                    match bias {
                        Some(b) => {
                            let b = bind(tape, b, binding);
                            params.push(b);
                            tape.bias_add(y, b)?
                        }
                        None => y,
                    }
                }
                Layer::ConvTranspose2d {
                    kernel,
                    bias,
                    stride,
                    padding,
                } => {
                    let k = bind(tape, kernel, binding);
                    params.push(k);
                    let y = tape.conv_transpose2d(x, k, *stride, *padding)?;
                    match bias {
                        Some(b) => {
                            let b = bind(tape, b, binding);
                            params.push(b);
                            tape.bias_add(y, b)?
                        }
                        None => y,
                    }
                }
                Layer::BatchNorm {
                    gamma,
                    beta,
                    running,
                    config,
                } => {
                    let g = bind(tape, gamma, binding);
                    let b = bind(tape, beta, binding);
                    params.extend([g, b]);
                    tape.batch_norm(x, g, b, running, mode, *config)?
                }
                Layer::Activation(kind) => tape.activation(x, *kind)?,
                Layer::Reshape(shape) => {
                    let n = tape.value(x).dim(0);
                    let full: Vec<usize> = std::iter::once(n).chain(shape.iter().copied()).collect();
                    tape.reshape(x, &full)?
                }
                Layer::Flatten => tape.flatten(x)?,
                Layer::MaxPool2d { size, stride } => tape.max_pool2d(x, *size, *stride)?,
            };
            outputs.push(x);
        }
        Ok(Forward { outputs, params })
    }

    /// Eval-mode forward pass that leaves `self` untouched.
    pub fn infer(&self, tape: &mut Tape<T>, input: Var) -> Result<Forward, NumError> {
        // eval mode never writes running stats, so a shallow copy of them is enough
        let mut view = self.clone();
        view.forward(tape, input, BatchNormMode::Eval, Binding::Frozen)
    }

    /// Copy the gradients of a forward pass into the parameters.
    pub fn load_gradients(&mut self, grads: &Gradients<T>, forward: &Forward) {
        for (p, &v) in self.parameters_mut().into_iter().zip(&forward.params) {
            p.gradient = grads.wrt(v);
        }
    }
}
