use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{fit, min_root_modulus, ArimaModel, ArimaOrder};
use crate::adf::{adf_test, AdfResult};
use crate::error::{Error, Result};
use crate::series::difference;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderCandidate {
    pub order: ArimaOrder,
    /// NaN when the fit failed outright.
    pub aic: f64,
    pub converged: bool,
    /// Some AR or MA root lies within modulus `1 + UNIT_ROOT_MARGIN`; such
    /// candidates are reported but never chosen.
    pub near_unit_root: bool,
}

pub const UNIT_ROOT_MARGIN: f64 = 0.01;

fn near_unit_root(model: &ArimaModel) -> bool {
    let limit = 1.0 + UNIT_ROOT_MARGIN;
    min_root_modulus(&model.ar) < limit || min_root_modulus(&model.ma) < limit
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSearchReport {
    /// ADF results for d = 0, 1, .. up to the chosen d.
    pub adf: Vec<AdfResult>,
    pub candidates: Vec<OrderCandidate>,
    pub chosen: ArimaOrder,
}

/// How the ARIMA order is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderChoice {
    Auto { caps: ArimaOrder },
    Fixed(ArimaOrder),
}

impl Default for OrderChoice {
    fn default() -> Self {
        OrderChoice::Auto {
            caps: ArimaOrder::DEFAULT_CAPS,
        }
    }
}

impl OrderChoice {
    /// Resolves the order (searching if needed) and fits it on `values`.
    pub fn fit(&self, values: &[f64]) -> Result<(ArimaModel, Option<OrderSearchReport>)> {
        match *self {
            OrderChoice::Fixed(order) => Ok((fit(values, order)?, None)),
            OrderChoice::Auto { caps } => {
                let report = select_order(values, caps)?;
                Ok((fit(values, report.chosen)?, Some(report)))
            }
        }
    }
}

/// Picks `d` as the smallest differencing order passing the 5% ADF test, then
/// grid-searches `p`, `q` by AIC among converged fits.
pub fn select_order(values: &[f64], caps: ArimaOrder) -> Result<OrderSearchReport> {
    let mut adf = Vec::new();
    let mut chosen_d = None;
    for d in 0..=caps.d {
        let w = difference(values, d)?.values;
        let r = adf_test(&w, None)?;
        adf.push(r);
        if r.is_stationary_5pct {
            chosen_d = Some(d);
            break;
        }
    }
    let d = chosen_d.ok_or_else(|| {
        Error::Analysis(format!(
            "series is not stationary after up to {} differences; unsuitable for ARIMA",
            caps.d
        ))
    })?;

    let mut candidates = Vec::with_capacity((caps.p + 1) * (caps.q + 1));
    for p in 0..=caps.p {
        for q in 0..=caps.q {
            let order = ArimaOrder::new(p, d, q);
            let candidate = match fit(values, order) {
                Ok(model) => OrderCandidate {
                    order,
                    aic: common_sample_aic(&model, caps.p),
                    converged: true,
                    near_unit_root: near_unit_root(&model),
                },
                Err(Error::NotConverged { best, .. }) => OrderCandidate {
                    order,
                    aic: common_sample_aic(&best, caps.p),
                    converged: false,
                    near_unit_root: near_unit_root(&best),
                },
                Err(_) => OrderCandidate {
                    order,
                    aic: f64::NAN,
                    converged: false,
                    near_unit_root: false,
                },
            };
            candidates.push(candidate);
        }
    }
    let chosen = choose(&candidates).ok_or_else(|| {
        Error::Analysis(format!("no ARIMA(p,{d},q) candidate converged to a finite AIC"))
    })?;
    Ok(OrderSearchReport {
        adf,
        candidates,
        chosen,
    })
}

/// AIC over innovations from time `max_p` on, so every candidate in the grid
/// is scored on the same observations.
fn common_sample_aic(model: &ArimaModel, max_p: usize) -> f64 {
    let skip = max_p - model.order.p;
    let e = &model.in_sample_residuals[skip.min(model.in_sample_residuals.len())..];
    let n = e.len() as f64;
    let css: f64 = e.iter().map(|v| v * v).sum();
    if n == 0.0 || css <= 0.0 {
        return f64::NAN;
    }
    n * crate::math::ln(css / n) + 2.0 * model.order.n_params() as f64
}

/// Minimal AIC among converged candidates clear of the unit circle; ties go to smaller `p + q`, then smaller `p`.
/// The result does not depend on candidate order.
pub(crate) fn choose(candidates: &[OrderCandidate]) -> Option<ArimaOrder> {
    candidates
        .iter()
        .filter(|c| c.converged && !c.near_unit_root && c.aic.is_finite())
        .min_by(|a, b| rank(a, b))
        .map(|c| c.order)
}

fn rank(a: &OrderCandidate, b: &OrderCandidate) -> Ordering {
    a.aic
        .total_cmp(&b.aic)
        .then((a.order.p + a.order.q).cmp(&(b.order.p + b.order.q)))
        .then(a.order.p.cmp(&b.order.p))
        .then(a.order.d.cmp(&b.order.d))
}
