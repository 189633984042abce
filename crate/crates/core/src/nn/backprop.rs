use alloc::vec;
use alloc::vec::Vec;

use super::gemm::{gemm, MatRef};
use super::Network;
use crate::error::{Error, Result};

/// Mini-batch of `(state, taken action, target)` rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingBatch {
    /// Row-major `len x input_dim`.
    pub inputs: Vec<f64>,
    pub actions: Vec<usize>,
    pub targets: Vec<f64>,
}

impl TrainingBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn push(&mut self, input: &[f64], action: usize, target: f64) {
        self.inputs.extend_from_slice(input);
        self.actions.push(action);
        self.targets.push(target);
    }
}

/// Cached pre-activations of a batched forward pass.
#[derive(Clone, Debug)]
pub struct Forward {
    batch: usize,
    /// `pre[l]` is `batch x outputs(l)`; the last entry holds the Q-values.
    pre: Vec<Vec<f64>>,
}

impl Forward {
    pub fn q_values(&self) -> &[f64] {
        self.pre.last().expect("network has at least one layer")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Sign pattern of every hidden unit, folded into a hash. Two parameter
    /// vectors with equal hashes (almost surely) sit in the same linear piece.
    pub fn activation_pattern(&self) -> u64 {
        let mut hash = 0xCBF2_9CE4_8422_2325u64;
        for z in &self.pre[..self.pre.len() - 1] {
            for chunk in z.chunks(64) {
                let mut bits = 0u64;
                for (i, &v) in chunk.iter().enumerate() {
                    if v > 0.0 {
                        bits |= 1 << i;
                    }
                }
                hash = (hash ^ bits).wrapping_mul(0x0000_0100_0000_01B3);
            }
        }
        hash
    }
}

fn relu_in_place(xs: &mut [f64]) {
    for x in xs {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn broadcast_bias(out: &mut [f64], bias: &[f64]) {
    for row in out.chunks_exact_mut(bias.len()) {
        row.copy_from_slice(bias);
    }
}

impl Network {
    fn check_inputs(&self, inputs: &[f64], batch: usize) -> Result<()> {
        let expected = batch * self.input_dim();
        if inputs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: inputs.len(),
            });
        }
        Ok(())
    }

    /// Q-values for a single state.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward_batch(input, 1)
    }

    /// Q-values for `batch` states stacked row-major; returns `batch x output_dim`.
    pub fn forward_batch(&self, inputs: &[f64], batch: usize) -> Result<Vec<f64>> {
        self.check_inputs(inputs, batch)?;
        let mut current: Vec<f64> = inputs.to_vec();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; batch * layer.outputs];
            broadcast_bias(&mut out, &self.params[layer.bias()]);
            gemm(
                1.0,
                MatRef::new(&current, batch, layer.inputs),
                MatRef::new(&self.params[layer.weights()], layer.inputs, layer.outputs),
                1.0,
                &mut out,
            );
            if l != last {
                relu_in_place(&mut out);
            }
            current = out;
        }
        Ok(current)
    }

    /// Forward pass that keeps the pre-activations needed for backprop.
    pub fn forward_cached(&self, inputs: &[f64], batch: usize) -> Result<Forward> {
        self.check_inputs(inputs, batch)?;
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut act: Vec<f64> = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            let input: &[f64] = if l == 0 { inputs } else { &act };
            let mut z = vec![0.0; batch * layer.outputs];
            broadcast_bias(&mut z, &self.params[layer.bias()]);
            gemm(
                1.0,
                MatRef::new(input, batch, layer.inputs),
                MatRef::new(&self.params[layer.weights()], layer.inputs, layer.outputs),
                1.0,
                &mut z,
            );
            act = z.clone();
            relu_in_place(&mut act);
            pre.push(z);
        }
        Ok(Forward { batch, pre })
    }

    fn check_batch(&self, batch: &TrainingBatch) -> Result<()> {
        if batch.targets.len() != batch.len() {
            return Err(Error::DimensionMismatch {
                expected: batch.len(),
                got: batch.targets.len(),
            });
        }
        if let Some(&bad) = batch.actions.iter().find(|&&a| a >= self.output_dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                got: bad + 1,
            });
        }
        self.check_inputs(&batch.inputs, batch.len())
    }

    /// Mean squared error between targets and the Q-values of the taken actions.
    pub fn loss(&self, batch: &TrainingBatch) -> Result<f64> {
        self.check_batch(batch)?;
        let q = self.forward_batch(&batch.inputs, batch.len())?;
        Ok(masked_mse(&q, self.output_dim(), batch))
    }

    /// Loss plus its gradient with respect to every parameter (flat layout).
    pub fn loss_and_grad(&self, batch: &TrainingBatch) -> Result<(f64, Vec<f64>)> {
        let (loss, grads, _) = self.loss_grad_pattern(batch)?;
        Ok((loss, grads))
    }

    pub(crate) fn loss_grad_pattern(&self, batch: &TrainingBatch) -> Result<(f64, Vec<f64>, u64)> {
        self.check_batch(batch)?;
        let n = batch.len();
        let fwd = self.forward_cached(&batch.inputs, n)?;
        let out_dim = self.output_dim();
        let q = fwd.q_values();
        let loss = masked_mse(q, out_dim, batch);
        let mut grads = vec![0.0; self.params.len()];
        if n == 0 {
            return Ok((loss, grads, fwd.activation_pattern()));
        }

        // dJ/dQ is nonzero only on the taken action of each row.
        let mut delta = vec![0.0; n * out_dim];
        let scale = 2.0 / n as f64;
        for (i, (&a, &y)) in batch.actions.iter().zip(&batch.targets).enumerate() {
            delta[i * out_dim + a] = scale * (q[i * out_dim + a] - y);
        }

        for l in (0..self.layers.len()).rev() {
            let layer = self.layers[l];
            let prev_act: Vec<f64>;
            let input: &[f64] = if l == 0 {
                &batch.inputs
            } else {
                prev_act = fwd.pre[l - 1].iter().map(|&z| z.max(0.0)).collect();
                &prev_act
            };
            gemm(
                1.0,
                MatRef::new(input, n, layer.inputs).t(),
                MatRef::new(&delta, n, layer.outputs),
                0.0,
                &mut grads[layer.weights()],
            );
            let db = &mut grads[layer.bias()];
            for row in delta.chunks_exact(layer.outputs) {
                for (g, d) in db.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l == 0 {
                break;
            }
            let mut next = vec![0.0; n * layer.inputs];
            gemm(
                1.0,
                MatRef::new(&delta, n, layer.outputs),
                MatRef::new(&self.params[layer.weights()], layer.inputs, layer.outputs).t(),
                0.0,
                &mut next,
            );
            for (d, &z) in next.iter_mut().zip(&fwd.pre[l - 1]) {
                if z <= 0.0 {
                    *d = 0.0;
                }
            }
            delta = next;
        }
        Ok((loss, grads, fwd.activation_pattern()))
    }
}

fn masked_mse(q: &[f64], out_dim: usize, batch: &TrainingBatch) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let sum: f64 = batch
        .actions
        .iter()
        .zip(&batch.targets)
        .enumerate()
        .map(|(i, (&a, &y))| {
            let e = y - q[i * out_dim + a];
            e * e
        })
        .sum();
    sum / batch.len() as f64
}
