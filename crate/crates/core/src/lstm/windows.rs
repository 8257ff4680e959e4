use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scale::ScaleParams;

/// Fixed-length input windows with one-step-ahead targets, in scaled units.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedWindowSet {
    window: usize,
    /// `len() x window`, row-major.
    inputs: Vec<f64>,
    targets: Vec<f64>,
    scale: ScaleParams,
}

impl SupervisedWindowSet {
    pub fn from_pairs(inputs: Vec<f64>, targets: Vec<f64>, window: usize, scale: ScaleParams) -> Result<Self> {
        if window == 0 || inputs.len() != targets.len() * window {
            return Err(Error::config(format!(
                "{} inputs do not form {} windows of length {window}",
                inputs.len(),
                targets.len()
            )));
        }
        Ok(Self {
            window,
            inputs,
            targets,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn scale(&self) -> &ScaleParams {
        &self.scale
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.window..(i + 1) * self.window]
    }

    /// Gathers the selected windows into contiguous buffers.
    pub fn gather(&self, idx: &[usize], inputs: &mut Vec<f64>, targets: &mut Vec<f64>) {
        inputs.clear();
        targets.clear();
        for &i in idx {
            inputs.extend_from_slice(self.input(i));
            targets.push(self.targets[i]);
        }
    }
}

/// Scales `values` and cuts every window `values[t-m..t] -> values[t]`.
pub fn make_windows(values: &[f64], window: usize, scale: ScaleParams) -> Result<SupervisedWindowSet> {
    if window == 0 {
        return Err(Error::config("window length must be positive"));
    }
    if values.len() <= window {
        return Err(Error::degenerate(format!(
            "{} values cannot form a window of length {window} plus a target",
            values.len()
        )));
    }
    let scaled = scale.scale_all(values);
    let count = scaled.len() - window;
    let mut inputs = Vec::with_capacity(count * window);
    for t in window..scaled.len() {
        inputs.extend_from_slice(&scaled[t - window..t]);
    }
    let targets = scaled[window..].to_vec();
    SupervisedWindowSet::from_pairs(inputs, targets, window, scale)
}
