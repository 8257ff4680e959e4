use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Affine map from `[min, max]` onto `[target_lo, target_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleParams {
    pub min: f64,
    pub max: f64,
    pub target_lo: f64,
    pub target_hi: f64,
}

impl ScaleParams {
    pub fn new(min: f64, max: f64, target_lo: f64, target_hi: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::degenerate(format!(
                "scale range needs max > min, got [{min}, {max}]"
            )));
        }
        if !(target_lo.is_finite() && target_hi.is_finite()) || target_hi <= target_lo {
            return Err(Error::config(format!(
                "target range needs hi > lo, got [{target_lo}, {target_hi}]"
            )));
        }
        Ok(Self {
            min,
            max,
            target_lo,
            target_hi,
        })
    }

    /// Fits `[min, max]` of `values` onto `[-1, 1]`.
    pub fn fit(values: &[f64]) -> Result<Self> {
        let (lo, hi) = extent(values)?;
        Self::new(lo, hi, -1.0, 1.0)
    }

    /// Fits `[-a, a]` with `a = max |v|` onto `[-1, 1]`, so zero maps to zero.
    pub fn fit_symmetric(values: &[f64]) -> Result<Self> {
        let (lo, hi) = extent(values)?;
        let a = lo.abs().max(hi.abs());
        Self::new(-a, a, -1.0, 1.0)
    }

    #[inline]
    pub fn scale(&self, x: f64) -> f64 {
        self.target_lo + (x - self.min) * (self.target_hi - self.target_lo) / (self.max - self.min)
    }

    #[inline]
    pub fn unscale(&self, y: f64) -> f64 {
        self.min + (y - self.target_lo) * (self.max - self.min) / (self.target_hi - self.target_lo)
    }

    pub fn scale_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.scale(v)).collect()
    }

    pub fn unscale_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.unscale(v)).collect()
    }
}

fn extent(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::degenerate("cannot fit scale on empty input"));
    }
    Ok(values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}
