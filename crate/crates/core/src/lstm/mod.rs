//! Stacked LSTM regressor trained by backpropagation through time.
//!
//! Each cell computes, over the concatenation `[h_{t-1}, x_t]`,
//!
//! ```text
//! f_t = sigmoid(W_f [h_{t-1}, x_t] + b_f)
//! i_t = sigmoid(W_i [h_{t-1}, x_t] + b_i)
//! g_t = tanh   (W_c [h_{t-1}, x_t] + b_c)
//! o_t = sigmoid(W_o [h_{t-1}, x_t] + b_o)
//! C_t = f_t * C_{t-1} + i_t * g_t
//! h_t = o_t * tanh(C_t)
//! ```
//!
//! and a linear head maps the top layer's final `h` to a scalar.

mod tape;
mod train;
mod windows;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{sigmoid, sqrt, tanh};

pub use tape::bptt_gradients;
pub use train::{train, train_with_validation, TrainConfig, TrainReport};
pub use windows::{make_windows, SupervisedWindowSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Forget = 0,
    Input = 1,
    Candidate = 2,
    Output = 3,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Forget, Gate::Input, Gate::Candidate, Gate::Output];

    pub fn label(self) -> &'static str {
        match self {
            Gate::Forget => "f",
            Gate::Input => "i",
            Gate::Candidate => "c",
            Gate::Output => "o",
        }
    }
}

/// Weights of one cell: four `hidden x (hidden + input)` gate blocks stacked
/// row-wise in gate order f, i, c, o, plus the matching biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Row-major `(4 * hidden) x (hidden + input)`.
    pub weights: Vec<f64>,
    /// Length `4 * hidden`.
    pub bias: Vec<f64>,
}

impl LstmCellParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            weights: vec![0.0; 4 * hidden_dim * (hidden_dim + input_dim)],
            bias: vec![0.0; 4 * hidden_dim],
        }
    }

    /// Width of the concatenated `[h, x]` input.
    pub fn concat_dim(&self) -> usize {
        self.hidden_dim + self.input_dim
    }

    pub fn gate_weights(&self, gate: Gate) -> &[f64] {
        let block = self.hidden_dim * self.concat_dim();
        &self.weights[gate as usize * block..(gate as usize + 1) * block]
    }

    pub fn gate_weights_mut(&mut self, gate: Gate) -> &mut [f64] {
        let block = self.hidden_dim * self.concat_dim();
        &mut self.weights[gate as usize * block..(gate as usize + 1) * block]
    }

    pub fn gate_bias(&self, gate: Gate) -> &[f64] {
        let h = self.hidden_dim;
        &self.bias[gate as usize * h..(gate as usize + 1) * h]
    }

    pub fn gate_bias_mut(&mut self, gate: Gate) -> &mut [f64] {
        let h = self.hidden_dim;
        &mut self.bias[gate as usize * h..(gate as usize + 1) * h]
    }

    fn check(&self) -> Result<()> {
        let k = self.concat_dim();
        if self.hidden_dim == 0 || self.input_dim == 0 {
            return Err(Error::config("cell dimensions must be positive"));
        }
        if self.weights.len() != 4 * self.hidden_dim * k || self.bias.len() != 4 * self.hidden_dim {
            return Err(Error::config(format!(
                "cell expects {} weights and {} biases, found {} and {}",
                4 * self.hidden_dim * k,
                4 * self.hidden_dim,
                self.weights.len(),
                self.bias.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_dim: usize) -> Self {
        Self {
            h: vec![0.0; hidden_dim],
            c: vec![0.0; hidden_dim],
        }
    }
}

/// Single-sample cell step written directly from the gate equations.
pub fn cell_forward(params: &LstmCellParams, x: &[f64], prev: &LstmState) -> Result<LstmState> {
    params.check()?;
    let hd = params.hidden_dim;
    if x.len() != params.input_dim || prev.h.len() != hd || prev.c.len() != hd {
        return Err(Error::config(format!(
            "cell expects input {} and state {}, got input {} and state {}/{}",
            params.input_dim,
            hd,
            x.len(),
            prev.h.len(),
            prev.c.len()
        )));
    }
    let concat: Vec<f64> = prev.h.iter().chain(x).copied().collect();
    let affine = |gate: Gate, row: usize| -> f64 {
        let k = params.concat_dim();
        let w = &params.gate_weights(gate)[row * k..(row + 1) * k];
        params.gate_bias(gate)[row] + w.iter().zip(&concat).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut next = LstmState::zeros(hd);
    for r in 0..hd {
        let f = sigmoid(affine(Gate::Forget, r));
        let i = sigmoid(affine(Gate::Input, r));
        let g = tanh(affine(Gate::Candidate, r));
        let o = sigmoid(affine(Gate::Output, r));
        let c = f * prev.c[r] + i * g;
        next.c[r] = c;
        next.h[r] = o * tanh(c);
    }
    if next.c.iter().chain(&next.h).any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite LSTM cell state"));
    }
    Ok(next)
}

/// Affine map from the top hidden state to a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputHead {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmNetwork {
    pub layers: Vec<LstmCellParams>,
    pub head: OutputHead,
}

impl LstmNetwork {
    /// All-zero network; its prediction is the head bias (zero).
    pub fn zeros(input_dim: usize, hidden_dim: usize, layers: usize) -> Result<Self> {
        if layers == 0 || hidden_dim == 0 || input_dim == 0 {
            return Err(Error::config("layers, hidden and input dimensions must be positive"));
        }
        let cells = (0..layers)
            .map(|l| LstmCellParams::zeros(if l == 0 { input_dim } else { hidden_dim }, hidden_dim))
            .collect();
        Ok(Self {
            layers: cells,
            head: OutputHead {
                weights: vec![0.0; hidden_dim],
                bias: 0.0,
            },
        })
    }

    /// Seeded initialization: every matrix uniform on `(-k, k)` with
    /// `k = 1 / sqrt(fan_in + fan_out_rows)`; forget-gate biases 1, other biases 0.
    pub fn new(input_dim: usize, hidden_dim: usize, layers: usize, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(input_dim, hidden_dim, layers)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for cell in &mut net.layers {
            let k = 1.0 / sqrt((cell.hidden_dim + cell.input_dim) as f64);
            for w in &mut cell.weights {
                *w = rng.random_range(-k..k);
            }
            cell.gate_bias_mut(Gate::Forget).fill(1.0);
        }
        let k = 1.0 / sqrt((hidden_dim + 1) as f64);
        for w in &mut net.head.weights {
            *w = rng.random_range(-k..k);
        }
        Ok(net)
    }

    /// Zeroes the output head so the network predicts exactly zero.
    pub fn with_zero_head(mut self) -> Self {
        self.head.weights.fill(0.0);
        self.head.bias = 0.0;
        self
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers[0].hidden_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::config("network needs at least one layer"));
        }
        let hd = self.hidden_dim();
        for (l, cell) in self.layers.iter().enumerate() {
            cell.check()?;
            if cell.hidden_dim != hd || (l > 0 && cell.input_dim != hd) {
                return Err(Error::config(format!("layer {l} dimensions break the chain")));
            }
        }
        if self.head.weights.len() != hd {
            return Err(Error::config("output head width differs from hidden size"));
        }
        let finite = self
            .layers
            .iter()
            .flat_map(|c| c.weights.iter().chain(&c.bias))
            .chain(&self.head.weights)
            .all(|v| v.is_finite());
        if !finite || !self.head.bias.is_finite() {
            return Err(Error::numerical("network has non-finite parameters"));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|c| c.weights.len() + c.bias.len()).sum::<usize>() + self.head.weights.len() + 1
    }

    /// Parameter blocks in a fixed order shared with [`LstmGradients`].
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(2 * self.layers.len() + 2);
        for cell in &mut self.layers {
            out.push(&mut cell.weights);
            out.push(&mut cell.bias);
        }
        out.push(&mut self.head.weights);
        out.push(core::slice::from_mut(&mut self.head.bias));
        out
    }

    /// Prediction for one window of `steps x input_dim` values.
    pub fn forward(&self, window: &[f64]) -> Result<f64> {
        let steps = window.len() / self.input_dim();
        Ok(self.forward_batch(window, 1, steps)?[0])
    }

    /// Predictions for `batch` windows stored back to back, each
    /// `steps x input_dim`, starting from zero states.
    pub fn forward_batch(&self, inputs: &[f64], batch: usize, steps: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let mut tape = tape::Tape::new(self, batch, steps);
        tape.forward(self, inputs)?;
        Ok(tape.predictions().to_vec())
    }
}

/// Gradient of the loss, laid out like [`LstmNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGradients {
    pub layers: Vec<LstmCellParams>,
    pub head: OutputHead,
}

impl LstmGradients {
    pub fn zeros_like(net: &LstmNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|c| LstmCellParams::zeros(c.input_dim, c.hidden_dim))
                .collect(),
            head: OutputHead {
                weights: vec![0.0; net.head.weights.len()],
                bias: 0.0,
            },
        }
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(2 * self.layers.len() + 2);
        for cell in &self.layers {
            out.push(&cell.weights);
            out.push(&cell.bias);
        }
        out.push(&self.head.weights);
        out.push(core::slice::from_ref(&self.head.bias));
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.slices().iter().flat_map(|s| s.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Names the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        for (l, cell) in self.layers.iter().enumerate() {
            let k = cell.concat_dim();
            let hd = cell.hidden_dim;
            if let Some(idx) = cell.weights.iter().position(|v| !v.is_finite()) {
                let gate = Gate::ALL[idx / (hd * k)];
                let within = idx % (hd * k);
                return Some(format!("layer {l} W_{}[{}, {}]", gate.label(), within / k, within % k));
            }
            if let Some(idx) = cell.bias.iter().position(|v| !v.is_finite()) {
                return Some(format!("layer {l} b_{}[{}]", Gate::ALL[idx / hd].label(), idx % hd));
            }
        }
        if let Some(idx) = self.head.weights.iter().position(|v| !v.is_finite()) {
            return Some(format!("head w[{idx}]"));
        }
        (!self.head.bias.is_finite()).then(|| String::from("head b"))
    }
}

#[cfg(test)]
mod tests;
