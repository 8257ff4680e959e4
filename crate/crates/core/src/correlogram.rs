//! Sample ACF and PACF (Durbin–Levinson) with white-noise confidence bounds.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{mean, sqrt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelogramPoint {
    pub lag: usize,
    pub value: f64,
    /// Half-width of the 95% white-noise band, `1.96 / sqrt(n)`.
    pub confidence_bound: f64,
}

/// Autocorrelations for lags `0..=max_lag` from the biased (divide-by-n)
/// autocovariance estimator.
pub fn autocorrelations(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n <= max_lag || n < 2 {
        return Err(Error::degenerate(format!(
            "need more than {max_lag} observations for lag {max_lag}, got {n}"
        )));
    }
    let mu = mean(values);
    let centered: Vec<f64> = values.iter().map(|v| v - mu).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 == 0.0 || sqrt(c0) <= 1e-12 * mu.abs() {
        return Err(Error::degenerate("series has zero variance"));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for k in 1..=max_lag {
        let ck: f64 = centered[..n - k]
            .iter()
            .zip(&centered[k..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        out.push(ck / c0);
    }
    Ok(out)
}

fn bound(n: usize) -> f64 {
    1.96 / sqrt(n as f64)
}

/// ACF for lags `1..=max_lag`.
pub fn acf(values: &[f64], max_lag: usize) -> Result<Vec<CorrelogramPoint>> {
    let rho = autocorrelations(values, max_lag)?;
    let b = bound(values.len());
    Ok(rho
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(lag, value)| CorrelogramPoint {
            lag,
            value,
            confidence_bound: b,
        })
        .collect())
}

/// PACF for lags `1..=max_lag` via the Durbin–Levinson recursion on the ACF.
pub fn pacf(values: &[f64], max_lag: usize) -> Result<Vec<CorrelogramPoint>> {
    if 2 * max_lag >= values.len() {
        return Err(Error::degenerate(format!(
            "PACF lag {max_lag} needs more than {} observations",
            2 * max_lag
        )));
    }
    let rho = autocorrelations(values, max_lag)?;
    let partial = durbin_levinson(&rho)?;
    let b = bound(values.len());
    Ok(partial
        .into_iter()
        .enumerate()
        .map(|(i, value)| CorrelogramPoint {
            lag: i + 1,
            value,
            confidence_bound: b,
        })
        .collect())
}

/// Partial autocorrelations `phi_kk` for `k = 1..rho.len()-1`, where `rho[0] == 1`.
pub(crate) fn durbin_levinson(rho: &[f64]) -> Result<Vec<f64>> {
    levinson_coefficients(rho).map(|(_, partial)| partial)
}

/// Runs the recursion to order `rho.len() - 1`, returning the final AR
/// coefficients alongside the partial autocorrelations.
pub(crate) fn levinson_coefficients(rho: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let max_lag = rho.len().saturating_sub(1);
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    let mut partial = Vec::with_capacity(max_lag);
    let mut err = 1.0;
    for k in 1..=max_lag {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        if err <= 1e-12 {
            return Err(Error::numerical(format!(
                "Durbin-Levinson recursion is singular at lag {k}"
            )));
        }
        let kk = num / err;
        let mut next = vec![0.0; k];
        for j in 0..k - 1 {
            next[j] = phi[j] - kk * phi[k - 2 - j];
        }
        next[k - 1] = kk;
        phi = next;
        err *= 1.0 - kk * kk;
        partial.push(kk);
    }
    Ok((phi, partial))
}
