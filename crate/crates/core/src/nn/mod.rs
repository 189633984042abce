//! Fully connected Q-network: rectifier hidden layers, linear output.
//!
//! Parameters live in one flat `Vec<f64>`. Layer `l` owns a weight block of
//! shape `inputs x outputs` (row-major) followed by its bias vector, and
//! layers are stored in order. Gradients and optimizer moments use the same
//! layout, so the optimizer and the gradient checker work on plain slices.

mod adam;
mod backprop;
mod gemm;
mod gradcheck;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Xoshiro256;

pub use adam::{AdamConfig, AdamState};
pub use backprop::{Forward, TrainingBatch};
pub use gradcheck::{check_gradients, gradient_check, relative_error, GradientCheck};

/// Hidden layer widths of the Q-network.
pub const HIDDEN_DIMS: [usize; 5] = [512, 512, 512, 256, 128];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
}

impl NetworkSpec {
    /// The five-hidden-layer geometry used by both agents.
    pub fn standard(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dims: HIDDEN_DIMS.to_vec(),
            output_dim,
        }
    }

    pub fn new(input_dim: usize, hidden_dims: &[usize], output_dim: usize) -> Result<Self> {
        let spec = Self {
            input_dim,
            hidden_dims: hidden_dims.to_vec(),
            output_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidSpec(format!(
                "input and output widths must be positive ({} -> {})",
                self.input_dim, self.output_dim
            )));
        }
        if self.hidden_dims.contains(&0) {
            return Err(Error::InvalidSpec("hidden layer of width 0".into()));
        }
        Ok(())
    }

    /// `[input, hidden..., output]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(self.output_dim);
        dims
    }

    pub fn layer_count(&self) -> usize {
        self.hidden_dims.len() + 1
    }

    pub fn param_count(&self) -> usize {
        self.dims().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Location of one dense layer inside the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
    pub offset: usize,
}

impl LayerShape {
    pub fn weights(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.inputs * self.outputs
    }

    pub fn bias(&self) -> core::ops::Range<usize> {
        let start = self.offset + self.inputs * self.outputs;
        start..start + self.outputs
    }

    pub fn len(&self) -> usize {
        self.inputs * self.outputs + self.outputs
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Network parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<LayerShape>,
    params: Vec<f64>,
}

impl Network {
    /// Fan-in scaled uniform initialization: `U(-sqrt(6/fan_in), sqrt(6/fan_in))`
    /// for weights, zero biases.
    pub fn init(spec: &NetworkSpec, rng: &mut Xoshiro256) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        for layer in net.layers.clone() {
            let limit = libm::sqrt(6.0 / layer.inputs as f64);
            for w in &mut net.params[layer.weights()] {
                *w = rng.uniform(-limit, limit);
            }
        }
        Ok(net)
    }

    pub fn zeros(spec: &NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let dims = spec.dims();
        let mut layers = Vec::with_capacity(dims.len() - 1);
        let mut offset = 0;
        for w in dims.windows(2) {
            let shape = LayerShape {
                inputs: w[0],
                outputs: w[1],
                offset,
            };
            offset += shape.len();
            layers.push(shape);
        }
        Ok(Self {
            spec: spec.clone(),
            layers,
            params: alloc::vec![0.0; offset],
        })
    }

    pub fn from_params(spec: &NetworkSpec, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        if params.len() != net.params.len() {
            return Err(Error::DimensionMismatch {
                expected: net.params.len(),
                got: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim
    }

    pub fn layer_weights(&self, layer: usize) -> &[f64] {
        &self.params[self.layers[layer].weights()]
    }

    pub fn layer_bias(&self, layer: usize) -> &[f64] {
        &self.params[self.layers[layer].bias()]
    }
}
