use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tape::Tape;
use super::{LstmGradients, LstmNetwork, SupervisedWindowSet};
use crate::error::{Error, Result};
use crate::math::{powf, sqrt};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;
/// RNG stream used for per-epoch shuffling; stream 0 is left to initialization.
const SHUFFLE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub layers: usize,
    pub hidden_dim: usize,
    pub window: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            epochs: 100,
            batch_size: 64,
            layers: 3,
            hidden_dim: 32,
            window: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        for (name, v) in [
            ("epochs", self.epochs),
            ("batch size", self.batch_size),
            ("layers", self.layers),
            ("hidden size", self.hidden_dim),
            ("window", self.window),
        ] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Fresh network with this configuration's shape, seeded from `seed`.
    pub fn init_network(&self) -> Result<LstmNetwork> {
        self.validate()?;
        LstmNetwork::new(1, self.hidden_dim, self.layers, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean training MSE of each epoch, in scaled units.
    pub loss_history: Vec<f64>,
    /// Validation MSE after each epoch (empty without validation data).
    pub val_history: Vec<f64>,
    /// `(epoch, val_mse)` of the lowest validation loss, 0-based epoch.
    pub best_val: Option<(usize, f64)>,
}

impl TrainReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.loss_history.last().copied()
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: i32,
}

impl Adam {
    fn new(grads: &LstmGradients) -> Self {
        let m: Vec<Vec<f64>> = grads.slices().iter().map(|s| vec![0.0; s.len()]).collect();
        Self {
            v: m.clone(),
            m,
            step: 0,
        }
    }

    fn update(&mut self, net: &mut LstmNetwork, grads: &LstmGradients, lr: f64) {
        self.step += 1;
        let c1 = 1.0 - powf(BETA1, f64::from(self.step));
        let c2 = 1.0 - powf(BETA2, f64::from(self.step));
        let step_size = lr * sqrt(c2) / c1;
        let eps = EPSILON * sqrt(c2);
        for (((p, g), m), v) in net
            .param_slices_mut()
            .into_iter()
            .zip(grads.slices())
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for j in 0..p.len() {
                m[j] = BETA1 * m[j] + (1.0 - BETA1) * g[j];
                v[j] = BETA2 * v[j] + (1.0 - BETA2) * g[j] * g[j];
                p[j] -= step_size * m[j] / (sqrt(v[j]) + eps);
            }
        }
    }
}

/// Trains `net` in place on `data` with Adam on mini-batches.
pub fn train(net: &mut LstmNetwork, data: &SupervisedWindowSet, cfg: &TrainConfig) -> Result<TrainReport> {
    train_with_validation(net, data, None, cfg)
}

/// As [`train`], also scoring `val` after every epoch. Validation data never
/// affects the weights; the returned network holds the last epoch's weights.
pub fn train_with_validation(
    net: &mut LstmNetwork,
    data: &SupervisedWindowSet,
    val: Option<&SupervisedWindowSet>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    net.validate()?;
    if data.is_empty() {
        return Err(Error::config("no training windows"));
    }
    if net.input_dim() != 1 {
        return Err(Error::config("windowed training expects a scalar-input network"));
    }
    let steps = data.window();
    let n = data.len();
    let batch = cfg.batch_size.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grads = LstmGradients::zeros_like(net);
    let mut adam = Adam::new(&grads);
    let mut full = Tape::new(net, batch, steps);
    let tail = n % batch;
    let mut partial = (tail > 0).then(|| Tape::new(net, tail, steps));
    let (mut xb, mut yb) = (Vec::with_capacity(batch * steps), Vec::with_capacity(batch));
    let mut report = TrainReport::default();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        for chunk in order.chunks(batch) {
            let tape = if chunk.len() == batch {
                &mut full
            } else {
                partial.as_mut().expect("tail tape exists")
            };
            data.gather(chunk, &mut xb, &mut yb);
            tape.forward(net, &xb)?;
            zero(&mut grads);
            let loss = tape
                .backward(net, &yb, &mut grads)
                .map_err(|e| Error::numerical(format!("epoch {epoch}: {e}")))?;
            sse += loss * chunk.len() as f64;
            adam.update(net, &grads, cfg.learning_rate);
        }
        report.loss_history.push(sse / n as f64);
        if let Some(val) = val.filter(|v| !v.is_empty()) {
            let loss = evaluate(net, val)?;
            if report.best_val.is_none_or(|(_, best)| loss < best) {
                report.best_val = Some((epoch, loss));
            }
            report.val_history.push(loss);
        }
    }
    Ok(report)
}

/// Mean squared error of `net` over `data`.
pub(crate) fn evaluate(net: &LstmNetwork, data: &SupervisedWindowSet) -> Result<f64> {
    let preds = net.forward_batch(data.inputs(), data.len(), data.window())?;
    let sse: f64 = preds.iter().zip(data.targets()).map(|(p, y)| (p - y) * (p - y)).sum();
    Ok(sse / data.len() as f64)
}

fn zero(grads: &mut LstmGradients) {
    for cell in &mut grads.layers {
        cell.weights.fill(0.0);
        cell.bias.fill(0.0);
    }
    grads.head.weights.fill(0.0);
    grads.head.bias = 0.0;
}
