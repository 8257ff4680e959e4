//! ARIMA(p,d,q) estimation by conditional sum of squares, order selection by
//! AIC, one-step forecasting and residual extraction.
//!
//! The differenced series `w` is modelled as
//! `z_t = c + sum_i ar_i z_{t-i} + e_t - sum_j ma_j e_{t-j}` with
//! `z = w - center`. `center` is the sample mean of `w` when `d == 0` and zero
//! otherwise, so for ARIMA(0,1,0) the intercept `c` is the mean drift.

mod css;
mod optim;
mod select;

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::correlogram::levinson_coefficients;
use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::math::{ln, mean, sqrt};
use crate::series::difference;

pub use select::{select_order, OrderCandidate, OrderChoice, OrderSearchReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    /// Default search caps: p <= 5, d <= 2, q <= 5.
    pub const DEFAULT_CAPS: ArimaOrder = ArimaOrder { p: 5, d: 2, q: 5 };

    pub const fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q }
    }

    pub fn within(&self, caps: &ArimaOrder) -> bool {
        self.p <= caps.p && self.d <= caps.d && self.q <= caps.q
    }

    pub fn n_params(&self) -> usize {
        self.p + self.q + 1
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub intercept: f64,
    pub center: f64,
    /// CSS divided by the number of innovations.
    pub sigma2: f64,
    /// Innovations `e_t` for `t = p..n-d` of the differenced training series.
    pub in_sample_residuals: Vec<f64>,
    pub n_obs: usize,
    /// All roots of `1 - sum ar_i z^i` lie outside the unit circle.
    pub ar_stationary: bool,
}

impl ArimaModel {
    /// Assembles a model from parameters, recomputing residuals on `values`.
    pub fn from_parameters(
        order: ArimaOrder,
        ar: Vec<f64>,
        ma: Vec<f64>,
        intercept: f64,
        center: f64,
        values: &[f64],
    ) -> Result<Self> {
        if ar.len() != order.p || ma.len() != order.q {
            return Err(Error::config(format!(
                "order {order} needs {} AR and {} MA coefficients, got {} and {}",
                order.p,
                order.q,
                ar.len(),
                ma.len()
            )));
        }
        let mut model = ArimaModel {
            order,
            ar_stationary: ar_is_stationary(&ar),
            ar,
            ma,
            intercept,
            center,
            sigma2: 0.0,
            in_sample_residuals: Vec::new(),
            n_obs: values.len(),
        };
        let e = residuals(&model, values)?;
        model.sigma2 = e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64;
        model.in_sample_residuals = e;
        Ok(model)
    }

    pub fn effective_n(&self) -> usize {
        self.in_sample_residuals.len()
    }

    pub fn css(&self) -> f64 {
        self.sigma2 * self.effective_n() as f64
    }
}

const MAX_ITER: usize = 500;
const GTOL: f64 = 1e-8;

/// Fits ARIMA(p,d,q) by conditional sum of squares. Pure AR orders are solved
/// exactly by OLS; orders with MA terms use BFGS from a Yule–Walker start.
pub fn fit(values: &[f64], order: ArimaOrder) -> Result<ArimaModel> {
    let ArimaOrder { p, d, q } = order;
    let n = values.len();
    if n < p + q + d + 2 {
        return Err(Error::degenerate(format!(
            "ARIMA{order} needs at least {} observations, got {n}",
            p + q + d + 2
        )));
    }
    let w = difference(values, d)?.values;
    let center = if d == 0 { mean(&w) } else { 0.0 };
    let z: Vec<f64> = w.iter().map(|v| v - center).collect();

    if q == 0 {
        let (intercept, ar) = fit_ar_ols(&z, p)?;
        return ArimaModel::from_parameters(order, ar, Vec::new(), intercept, center, values);
    }

    let min = minimize_css(&z, p, q);
    let intercept = min.params[0];
    let ar = min.params[1..1 + p].to_vec();
    let ma = min.params[1 + p..].to_vec();
    let model = ArimaModel::from_parameters(order, ar, ma, intercept, center, values)?;
    if !model.sigma2.is_finite() {
        return Err(Error::numerical(format!("ARIMA{order} residual variance is not finite")));
    }
    if !min.converged {
        return Err(Error::NotConverged {
            order,
            iterations: min.iterations,
            best: Box::new(model),
        });
    }
    Ok(model)
}

/// OLS of `z_t` on `[1, z_{t-1}, .., z_{t-p}]`, `t = p..`.
fn fit_ar_ols(z: &[f64], p: usize) -> Result<(f64, Vec<f64>)> {
    if p == 0 {
        if z.is_empty() {
            return Err(Error::degenerate("no observations after differencing"));
        }
        return Ok((mean(z), Vec::new()));
    }
    let rows = z.len() - p;
    let mut design = Vec::with_capacity(rows * (p + 1));
    for t in p..z.len() {
        design.push(1.0);
        design.extend((1..=p).map(|i| z[t - i]));
    }
    let fit = ols(&design, p + 1, &z[p..])?;
    Ok((fit.coef[0], fit.coef[1..].to_vec()))
}

pub(crate) struct CssMinimum {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// BFGS on `css / n_eff` of the standardized series; returns parameters on
/// the original scale packed as `[intercept, ar.., ma..]`.
pub(crate) fn minimize_css(z: &[f64], p: usize, q: usize) -> CssMinimum {
    let neff = (z.len() - p) as f64;
    let sd = {
        let mu = mean(z);
        sqrt(z.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / z.len() as f64)
    };
    let scale = if sd > 0.0 && sd.is_finite() { sd } else { 1.0 };
    let zs: Vec<f64> = z.iter().map(|v| v / scale).collect();

    let ar0 = yule_walker(&zs, p);
    let c0 = mean(&zs) * (1.0 - ar0.iter().sum::<f64>());
    let mut x0 = vec![c0];
    x0.extend_from_slice(&ar0);
    x0.extend(core::iter::repeat_n(0.0, q));

    let mut lower = vec![f64::NEG_INFINITY];
    let mut upper = vec![f64::INFINITY];
    for (k, bound) in [(p, p), (q, q)] {
        for i in 1..=k {
            let b = binomial(bound, i) as f64;
            lower.push(-b);
            upper.push(b);
        }
    }
    let settings = optim::Settings {
        max_iter: MAX_ITER,
        gtol: GTOL,
        stall_gtol: 1e-6,
    };
    let m = optim::minimize(
        |x, g| {
            let v = css::css_with_gradient(&zs, p, q, x, g) / neff;
            g.iter_mut().for_each(|gi| *gi /= neff);
            v
        },
        &x0,
        &lower,
        &upper,
        &settings,
    );
    let mut params = m.x;
    params[0] *= scale;
    CssMinimum {
        params,
        iterations: m.iterations,
        converged: m.converged,
    }
}

fn yule_walker(z: &[f64], p: usize) -> Vec<f64> {
    if p == 0 {
        return Vec::new();
    }
    crate::correlogram::autocorrelations(z, p)
        .and_then(|rho| levinson_coefficients(&rho))
        .map(|(phi, _)| phi)
        .unwrap_or_else(|_| vec![0.0; p])
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Step-down (reverse Levinson) check: stationary iff every implied partial
/// autocorrelation has modulus below one.
pub fn ar_is_stationary(ar: &[f64]) -> bool {
    let mut a = ar.to_vec();
    while let Some(&kk) = a.last() {
        if !kk.is_finite() || kk.abs() >= 1.0 {
            return false;
        }
        let k = a.len();
        let denom = 1.0 - kk * kk;
        let prev: Vec<f64> = (0..k - 1).map(|j| (a[j] + kk * a[k - 2 - j]) / denom).collect();
        a = prev;
    }
    true
}

/// Smallest modulus among the roots of `1 - sum c_i z^i`; infinity for an
/// empty or all-zero polynomial.
pub fn min_root_modulus(coefs: &[f64]) -> f64 {
    let k = coefs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
    if k == 0 {
        return f64::INFINITY;
    }
    // roots of the lag polynomial are reciprocals of the companion eigenvalues
    let mut companion = nalgebra::DMatrix::<f64>::zeros(k, k);
    for (j, c) in coefs[..k].iter().enumerate() {
        companion[(0, j)] = *c;
    }
    for i in 1..k {
        companion[(i, i - 1)] = 1.0;
    }
    let largest = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| crate::math::sqrt(z.re * z.re + z.im * z.im))
        .fold(0.0, f64::max);
    1.0 / largest
}

/// `n ln(css / n) + 2 (p + q + 1)` with `n` the number of innovations.
pub fn aic(model: &ArimaModel) -> Result<f64> {
    let n = model.effective_n();
    if n == 0 {
        return Err(Error::degenerate("model has no residuals"));
    }
    if model.sigma2 <= 0.0 {
        return Err(Error::degenerate("residual variance is zero; AIC is undefined"));
    }
    Ok(n as f64 * ln(model.sigma2) + 2.0 * model.order.n_params() as f64)
}

fn centered_differences(model: &ArimaModel, values: &[f64]) -> Result<Vec<f64>> {
    let w = difference(values, model.order.d)?.values;
    Ok(w.into_iter().map(|v| v - model.center).collect())
}

/// One-step-ahead level forecast after the last value of `history`.
pub fn forecast_one(model: &ArimaModel, history: &[f64]) -> Result<f64> {
    let ArimaOrder { p, d, .. } = model.order;
    let n = history.len();
    if n < p + d || n == 0 {
        return Err(Error::degenerate(format!(
            "ARIMA{} forecast needs at least {} observations, got {n}",
            model.order,
            (p + d).max(1)
        )));
    }
    let z = if n > d { centered_differences(model, history)? } else { Vec::new() };
    let e = css::innovations(&z, p, model.intercept, &model.ar, &model.ma);
    let m = z.len();
    let mut next = model.intercept;
    for (i, a) in model.ar.iter().enumerate() {
        next += a * z[m - 1 - i];
    }
    for (j, b) in model.ma.iter().enumerate() {
        // innovation at time m - 1 - j, stored at index m - 1 - j - p
        if m > p + j {
            next -= b * e[m - 1 - j - p];
        }
    }
    let w_hat = next + model.center;
    // y_n = w_hat + sum_k (-1)^(k+1) C(d,k) y_{n-k}
    let mut level = 0.0;
    for k in 1..=d {
        let c = binomial(d, k) as f64;
        let term = c * history[n - k];
        if k % 2 == 1 {
            level += term;
        } else {
            level -= term;
        }
    }
    Ok(w_hat + level)
}

/// One-step in-sample innovations over `values`; length `n - d - p`.
pub fn residuals(model: &ArimaModel, values: &[f64]) -> Result<Vec<f64>> {
    let ArimaOrder { p, d, .. } = model.order;
    if values.len() <= p + d {
        return Err(Error::degenerate(format!(
            "ARIMA{} residuals need more than {} observations, got {}",
            model.order,
            p + d,
            values.len()
        )));
    }
    let z = centered_differences(model, values)?;
    Ok(css::innovations(&z, p, model.intercept, &model.ar, &model.ma))
}
