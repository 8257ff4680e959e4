//! Batched forward pass with cached activations and its exact reverse pass.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{LstmGradients, LstmNetwork};
use crate::error::{Error, Result};
use crate::math::{sigmoid_slice, tanh_slice};

/// `c = alpha * a * b + beta * c` on strided row-major views.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    debug_assert!(k == 0 || a.len() > (m - 1) * rsa + (k - 1) * csa);
    debug_assert!(k == 0 || b.len() > (k - 1) * rsb + (n - 1) * csb);
    debug_assert!(c.len() >= (m - 1) * rsc + n);
    // SAFETY: the asserted extents keep every strided access inside the slices,
    // and `c` is uniquely borrowed so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}

struct LayerTape {
    hidden: usize,
    input: usize,
    /// `[h_{t-1}, x_t]` rows, `steps x batch x (hidden + input)`.
    zin: Vec<f64>,
    /// Gate activations f, i, g, o, `steps x batch x 4 hidden`.
    act: Vec<f64>,
    /// Cell state, `steps x batch x hidden`.
    c: Vec<f64>,
    /// `tanh(C_t)`.
    tc: Vec<f64>,
    /// Hidden output.
    h: Vec<f64>,
}

/// Reverse-pass buffers, reused across calls.
struct Scratch {
    dpre: Vec<f64>,
    dh_out: Vec<f64>,
    dh_below: Vec<f64>,
    dh_next: Vec<f64>,
    dc_next: Vec<f64>,
    dz: Vec<f64>,
}

pub(crate) struct Tape {
    batch: usize,
    steps: usize,
    layers: Vec<LayerTape>,
    preds: Vec<f64>,
    scratch: Scratch,
}

impl Tape {
    pub(crate) fn new(net: &LstmNetwork, batch: usize, steps: usize) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|cell| {
                let (hd, k) = (cell.hidden_dim, cell.concat_dim());
                LayerTape {
                    hidden: hd,
                    input: cell.input_dim,
                    zin: vec![0.0; steps * batch * k],
                    act: vec![0.0; steps * batch * 4 * hd],
                    c: vec![0.0; steps * batch * hd],
                    tc: vec![0.0; steps * batch * hd],
                    h: vec![0.0; steps * batch * hd],
                }
            })
            .collect();
        let hd = net.hidden_dim();
        let widest = net.layers.iter().map(|c| c.concat_dim()).max().unwrap_or(0);
        Self {
            batch,
            steps,
            layers,
            preds: vec![0.0; batch],
            scratch: Scratch {
                dpre: vec![0.0; steps * batch * 4 * hd],
                dh_out: vec![0.0; steps * batch * hd],
                dh_below: vec![0.0; steps * batch * hd],
                dh_next: vec![0.0; batch * hd],
                dc_next: vec![0.0; batch * hd],
                dz: vec![0.0; batch * widest],
            },
        }
    }

    pub(crate) fn predictions(&self) -> &[f64] {
        &self.preds
    }

    pub(crate) fn forward(&mut self, net: &LstmNetwork, inputs: &[f64]) -> Result<()> {
        #[cfg(all(feature = "std", target_arch = "x86_64"))]
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { self.forward_wide(net, inputs) };
        }
        self.forward_body(net, inputs)
    }

    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    #[target_feature(enable = "avx2")]
    fn forward_wide(&mut self, net: &LstmNetwork, inputs: &[f64]) -> Result<()> {
        self.forward_body(net, inputs)
    }

    #[inline(always)]
    fn forward_body(&mut self, net: &LstmNetwork, inputs: &[f64]) -> Result<()> {
        let (batch, steps) = (self.batch, self.steps);
        let input_dim = net.input_dim();
        if batch == 0 || steps == 0 || inputs.len() != batch * steps * input_dim {
            return Err(Error::config(format!(
                "expected {batch} windows of {steps} steps x {input_dim} inputs, got {} values",
                inputs.len()
            )));
        }
        for l in 0..self.layers.len() {
            let (below, rest) = self.layers.split_at_mut(l);
            let lt = &mut rest[0];
            let cell = &net.layers[l];
            let (hd, inp) = (lt.hidden, lt.input);
            let k = hd + inp;
            let g4 = 4 * hd;
            for t in 0..steps {
                let zin = &mut lt.zin[t * batch * k..(t + 1) * batch * k];
                for b in 0..batch {
                    let row = &mut zin[b * k..(b + 1) * k];
                    if t == 0 {
                        row[..hd].fill(0.0);
                    } else {
                        let off = ((t - 1) * batch + b) * hd;
                        row[..hd].copy_from_slice(&lt.h[off..off + hd]);
                    }
                    match below.last() {
                        None => {
                            let off = (b * steps + t) * inp;
                            row[hd..].copy_from_slice(&inputs[off..off + inp]);
                        }
                        Some(prev) => {
                            let off = (t * batch + b) * inp;
                            row[hd..].copy_from_slice(&prev.h[off..off + inp]);
                        }
                    }
                }
                let act = &mut lt.act[t * batch * g4..(t + 1) * batch * g4];
                for b in 0..batch {
                    act[b * g4..(b + 1) * g4].copy_from_slice(&cell.bias);
                }
                gemm(batch, k, g4, zin, (k, 1), &cell.weights, (1, k), 1.0, act, g4);
                for a in act.chunks_exact_mut(g4) {
                    sigmoid_slice(&mut a[..2 * hd]);
                    tanh_slice(&mut a[2 * hd..3 * hd]);
                    sigmoid_slice(&mut a[3 * hd..]);
                }
                let cur = t * batch * hd..(t + 1) * batch * hd;
                let (c_before, c_rest) = lt.c.split_at_mut(cur.start);
                let c_now = &mut c_rest[..batch * hd];
                for b in 0..batch {
                    let a = &act[b * g4..(b + 1) * g4];
                    for j in 0..hd {
                        let c_prev = if t == 0 { 0.0 } else { c_before[cur.start - batch * hd + b * hd + j] };
                        c_now[b * hd + j] = a[j] * c_prev + a[hd + j] * a[2 * hd + j];
                    }
                }
                let tc = &mut lt.tc[cur.clone()];
                tc.copy_from_slice(c_now);
                tanh_slice(tc);
                let h = &mut lt.h[cur];
                for b in 0..batch {
                    let o = &act[b * g4 + 3 * hd..(b + 1) * g4];
                    for j in 0..hd {
                        h[b * hd + j] = o[j] * tc[b * hd + j];
                    }
                }
            }
        }
        let top = self.layers.last().expect("network has layers");
        let hd = top.hidden;
        let last = (steps - 1) * batch * hd;
        for b in 0..batch {
            let h = &top.h[last + b * hd..last + (b + 1) * hd];
            self.preds[b] = net.head.bias + h.iter().zip(&net.head.weights).map(|(x, w)| x * w).sum::<f64>();
        }
        if let Some(b) = self.preds.iter().position(|p| !p.is_finite()) {
            return Err(Error::numerical(format!("non-finite LSTM output for window {b}")));
        }
        Ok(())
    }

    /// Accumulates the gradient of the mean squared error over the batch into
    /// `grads` and returns that loss. Requires a preceding [`Tape::forward`].
    pub(crate) fn backward(&mut self, net: &LstmNetwork, targets: &[f64], grads: &mut LstmGradients) -> Result<f64> {
        #[cfg(all(feature = "std", target_arch = "x86_64"))]
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { self.backward_wide(net, targets, grads) };
        }
        self.backward_body(net, targets, grads)
    }

    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    #[target_feature(enable = "avx2")]
    fn backward_wide(&mut self, net: &LstmNetwork, targets: &[f64], grads: &mut LstmGradients) -> Result<f64> {
        self.backward_body(net, targets, grads)
    }

    #[inline(always)]
    fn backward_body(&mut self, net: &LstmNetwork, targets: &[f64], grads: &mut LstmGradients) -> Result<f64> {
        let (batch, steps) = (self.batch, self.steps);
        if targets.len() != batch {
            return Err(Error::config("one target per window is required"));
        }
        let scale = 2.0 / batch as f64;
        let mut loss = 0.0;
        let dpred: Vec<f64> = self
            .preds
            .iter()
            .zip(targets)
            .map(|(p, y)| {
                let e = p - y;
                loss += e * e;
                scale * e
            })
            .collect();
        loss /= batch as f64;

        let top = self.layers.last().expect("network has layers");
        let hd_top = top.hidden;
        let last = (steps - 1) * batch * hd_top;
        let Scratch {
            dpre,
            dh_out,
            dh_below,
            dh_next,
            dc_next,
            dz,
        } = &mut self.scratch;
        // Gradient flowing into each layer's h from above, `steps x batch x hidden`.
        dh_out.fill(0.0);
        for b in 0..batch {
            let h = &top.h[last + b * hd_top..last + (b + 1) * hd_top];
            for j in 0..hd_top {
                grads.head.weights[j] += dpred[b] * h[j];
                dh_out[last + b * hd_top + j] = dpred[b] * net.head.weights[j];
            }
            grads.head.bias += dpred[b];
        }

        for l in (0..self.layers.len()).rev() {
            let lt = &self.layers[l];
            let cell = &net.layers[l];
            let gcell = &mut grads.layers[l];
            let (hd, inp) = (lt.hidden, lt.input);
            let k = hd + inp;
            let g4 = 4 * hd;
            let dpre = &mut dpre[..steps * batch * g4];
            let dz = &mut dz[..batch * k];
            dh_next.fill(0.0);
            dc_next.fill(0.0);
            for t in (0..steps).rev() {
                let dp = &mut dpre[t * batch * g4..(t + 1) * batch * g4];
                for b in 0..batch {
                    let a = &lt.act[(t * batch + b) * g4..(t * batch + b + 1) * g4];
                    let base = (t * batch + b) * hd;
                    let d = &mut dp[b * g4..(b + 1) * g4];
                    for j in 0..hd {
                        let (f, i, g, o) = (a[j], a[hd + j], a[2 * hd + j], a[3 * hd + j]);
                        let tc = lt.tc[base + j];
                        let c_prev = if t == 0 { 0.0 } else { lt.c[base - batch * hd + j] };
                        let dh = dh_out[base + j] + dh_next[b * hd + j];
                        let dc = dc_next[b * hd + j] + dh * o * (1.0 - tc * tc);
                        dc_next[b * hd + j] = dc * f;
                        d[j] = dc * c_prev * f * (1.0 - f);
                        d[hd + j] = dc * g * i * (1.0 - i);
                        d[2 * hd + j] = dc * i * (1.0 - g * g);
                        d[3 * hd + j] = dh * tc * o * (1.0 - o);
                    }
                }
                if t == 0 && l == 0 {
                    break;
                }
                gemm(batch, g4, k, dp, (g4, 1), &cell.weights, (k, 1), 0.0, dz, k);
                for b in 0..batch {
                    dh_next[b * hd..(b + 1) * hd].copy_from_slice(&dz[b * k..b * k + hd]);
                    if l > 0 {
                        let off = (t * batch + b) * inp;
                        dh_below[off..off + inp].copy_from_slice(&dz[b * k + hd..(b + 1) * k]);
                    }
                }
            }
            let rows = steps * batch;
            gemm(g4, rows, k, dpre, (1, g4), &lt.zin, (k, 1), 1.0, &mut gcell.weights, k);
            for r in 0..rows {
                for (acc, v) in gcell.bias.iter_mut().zip(&dpre[r * g4..(r + 1) * g4]) {
                    *acc += v;
                }
            }
            core::mem::swap(dh_out, dh_below);
        }
        if let Some(path) = grads.first_non_finite() {
            return Err(Error::numerical(format!("non-finite gradient at {path}")));
        }
        Ok(loss)
    }
}

/// Exact gradient of the mean squared error of `net` over a batch of windows
/// (each `steps x input_dim`, stored back to back), together with that loss.
pub fn bptt_gradients(net: &LstmNetwork, inputs: &[f64], targets: &[f64], steps: usize) -> Result<(f64, LstmGradients)> {
    net.validate()?;
    let batch = targets.len();
    let mut tape = Tape::new(net, batch, steps);
    tape.forward(net, inputs)?;
    let mut grads = LstmGradients::zeros_like(net);
    let loss = tape.backward(net, targets, &mut grads)?;
    Ok((loss, grads))
}
