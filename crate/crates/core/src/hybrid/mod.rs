//! The additive ARIMA + LSTM forecaster and its single-model baselines.
//!
//! The ARIMA part captures the linear structure `L̂_t`; an LSTM trained on the
//! ARIMA's in-sample residuals supplies the nonlinear correction `N̂_t`, and
//! the forecast is `ŷ_t = L̂_t + N̂_t`.

mod eval;

use alloc::format;
use alloc::vec::Vec;

use crate::arima::{forecast_one, residuals, ArimaModel, OrderChoice, OrderSearchReport};
use crate::error::{Error, Result};
use crate::lstm::{make_windows, train_with_validation, LstmNetwork, SupervisedWindowSet, TrainConfig, TrainReport};
use crate::scale::ScaleParams;

pub use eval::{
    compare_models, sliding_window_evaluate, Comparison, EvalConfig, EvalRun, FittedModel, ModelKind, RefitPolicy,
};

#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    pub arima: ArimaModel,
    pub residual_net: LstmNetwork,
    /// Fitted on the training residuals only.
    pub residual_scale: ScaleParams,
    pub window_m: usize,
}

/// LSTM on scaled raw levels, the nonlinear-only baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLstmModel {
    pub net: LstmNetwork,
    pub scale: ScaleParams,
    pub window_m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridFit {
    pub model: HybridModel,
    pub order_report: Option<OrderSearchReport>,
    pub train_report: TrainReport,
}

/// A forecast with its linear and nonlinear components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridPrediction {
    pub combined: f64,
    pub linear: f64,
    pub nonlinear: f64,
}

/// Windows whose targets fall in `values[from..]`, inputs may reach back before `from`.
fn tail_windows(values: &[f64], from: usize, m: usize, scale: ScaleParams) -> Result<Option<SupervisedWindowSet>> {
    if values.len() <= from || values.len() <= m {
        return Ok(None);
    }
    let all = make_windows(values, m, scale)?;
    let first = from.max(m) - m;
    let count = all.len() - first;
    SupervisedWindowSet::from_pairs(
        all.inputs()[first * m..].to_vec(),
        all.targets()[first..].to_vec(),
        m,
        scale,
    )
    .map(|w| (count > 0).then_some(w))
}

/// Fits the ARIMA part on `train` and the residual network on its in-sample
/// residuals; `val` only feeds the per-epoch validation score.
pub fn fit_hybrid(train: &[f64], val: &[f64], order: &OrderChoice, cfg: &TrainConfig) -> Result<HybridFit> {
    cfg.validate()?;
    let (arima, order_report) = order.fit(train)?;
    let (model, train_report) = fit_residual_net(arima, train, val, cfg)?;
    Ok(HybridFit {
        model,
        order_report,
        train_report,
    })
}

pub(crate) fn fit_residual_net(
    arima: ArimaModel,
    train: &[f64],
    val: &[f64],
    cfg: &TrainConfig,
) -> Result<(HybridModel, TrainReport)> {
    let m = cfg.window;
    let resid = residuals(&arima, train)?;
    if resid.len() <= m {
        return Err(Error::config(format!(
            "{} training residuals are too few for windows of length {m}",
            resid.len()
        )));
    }
    let scale = ScaleParams::fit_symmetric(&resid)?;
    let windows = make_windows(&resid, m, scale)?;
    let val_windows = if val.is_empty() {
        None
    } else {
        let joined: Vec<f64> = train.iter().chain(val).copied().collect();
        let all = residuals(&arima, &joined)?;
        tail_windows(&all, resid.len(), m, scale)?
    };
    let mut net = cfg.init_network()?.with_zero_head();
    let report = train_with_validation(&mut net, &windows, val_windows.as_ref(), cfg)?;
    Ok((
        HybridModel {
            arima,
            residual_net: net,
            residual_scale: scale,
            window_m: m,
        },
        report,
    ))
}

/// Trains the levels baseline on min-max scaled `train`.
pub fn fit_level_lstm(train: &[f64], val: &[f64], cfg: &TrainConfig) -> Result<(LevelLstmModel, TrainReport)> {
    cfg.validate()?;
    let m = cfg.window;
    if train.len() <= m {
        return Err(Error::config(format!(
            "{} training values are too few for windows of length {m}",
            train.len()
        )));
    }
    let scale = ScaleParams::fit(train)?;
    let windows = make_windows(train, m, scale)?;
    let joined: Vec<f64> = train.iter().chain(val).copied().collect();
    let val_windows = tail_windows(&joined, train.len(), m, scale)?;
    let mut net = cfg.init_network()?;
    let report = train_with_validation(&mut net, &windows, val_windows.as_ref(), cfg)?;
    Ok((LevelLstmModel { net, scale, window_m: m }, report))
}

impl LevelLstmModel {
    /// One-step forecast from the last `window_m` values of `history`.
    pub fn predict(&self, history: &[f64]) -> Result<f64> {
        let m = self.window_m;
        if history.len() < m {
            return Err(Error::degenerate(format!("need {m} values of history, got {}", history.len())));
        }
        let x = self.scale.scale_all(&history[history.len() - m..]);
        Ok(self.scale.unscale(self.net.forward(&x)?))
    }
}

impl HybridModel {
    /// Residual-network correction from the last `window_m` residuals.
    pub fn nonlinear(&self, recent_residuals: &[f64]) -> Result<f64> {
        let m = self.window_m;
        if recent_residuals.len() < m {
            return Err(Error::degenerate(format!(
                "need {m} recent residuals, got {}",
                recent_residuals.len()
            )));
        }
        let x = self.residual_scale.scale_all(&recent_residuals[recent_residuals.len() - m..]);
        Ok(self.residual_scale.unscale(self.residual_net.forward(&x)?))
    }
}

/// `ŷ = L̂ + N̂` for the step after `history`.
pub fn predict_one(model: &HybridModel, history: &[f64], recent_residuals: &[f64]) -> Result<HybridPrediction> {
    let nonlinear = model.nonlinear(recent_residuals)?;
    let linear = forecast_one(&model.arima, history)?;
    Ok(HybridPrediction {
        combined: linear + nonlinear,
        linear,
        nonlinear,
    })
}
