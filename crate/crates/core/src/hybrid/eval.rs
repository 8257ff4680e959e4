//! One-step-ahead rolling evaluation over the test segment.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{fit_level_lstm, fit_residual_net, HybridModel, LevelLstmModel};
use crate::arima::{fit, forecast_one, residuals, ArimaModel, OrderChoice, OrderSearchReport};
use crate::error::{Error, Result};
use crate::lstm::{TrainConfig, TrainReport};
use crate::metrics::{MetricsReport, MetricsRow};
use crate::series::{Observations, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Arima,
    Lstm,
    Hybrid,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Arima, ModelKind::Lstm, ModelKind::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Arima => "arima",
            ModelKind::Lstm => "lstm",
            ModelKind::Hybrid => "hybrid",
        }
    }

    /// Offset added to the master seed for this model's network.
    fn seed_offset(self) -> u64 {
        match self {
            ModelKind::Arima => 0,
            ModelKind::Lstm => 1,
            ModelKind::Hybrid => 2,
        }
    }
}

/// Whether ARIMA coefficients are re-estimated on each rolling window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefitPolicy {
    #[default]
    None,
    Arima,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub order: OrderChoice,
    pub train: TrainConfig,
    /// Length of the rolling history window.
    pub window_l: usize,
    pub refit: RefitPolicy,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            order: OrderChoice::default(),
            train: TrainConfig::default(),
            window_l: 120,
            refit: RefitPolicy::None,
        }
    }
}

impl EvalConfig {
    fn train_config(&self, kind: ModelKind) -> TrainConfig {
        TrainConfig {
            seed: self.train.seed.wrapping_add(kind.seed_offset()),
            ..self.train.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Arima(ArimaModel),
    Lstm(LevelLstmModel),
    Hybrid(HybridModel),
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Arima(_) => ModelKind::Arima,
            FittedModel::Lstm(_) => ModelKind::Lstm,
            FittedModel::Hybrid(_) => ModelKind::Hybrid,
        }
    }

    fn arima(&self) -> Option<&ArimaModel> {
        match self {
            FittedModel::Arima(a) => Some(a),
            FittedModel::Hybrid(h) => Some(&h.arima),
            FittedModel::Lstm(_) => None,
        }
    }

    /// Smallest history from which a forecast can be formed.
    fn min_history(&self) -> usize {
        let arima_need = |a: &ArimaModel| a.order.d + a.order.p.max(1);
        match self {
            FittedModel::Arima(a) => arima_need(a),
            FittedModel::Lstm(l) => l.window_m,
            FittedModel::Hybrid(h) => arima_need(&h.arima) + h.window_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRun {
    pub kind: ModelKind,
    /// Index of the first test observation.
    pub test_start: usize,
    pub predictions: Vec<f64>,
    pub actuals: Vec<f64>,
    /// ARIMA component of each hybrid prediction (empty for other kinds).
    pub linear: Vec<f64>,
    /// Residual-network component of each hybrid prediction (empty for other kinds).
    pub nonlinear: Vec<f64>,
    pub window_l: usize,
    /// History length consumed by each prediction.
    pub history_used: Vec<usize>,
    /// Set when some prediction had fewer than `window_l` observations available.
    pub short_history: bool,
    pub model: FittedModel,
    pub order_report: Option<OrderSearchReport>,
    pub train_report: Option<TrainReport>,
}

struct Fitted {
    model: FittedModel,
    order_report: Option<OrderSearchReport>,
    train_report: Option<TrainReport>,
}

fn check_split(len: usize, spec: &SplitSpec, cfg: &EvalConfig) -> Result<()> {
    if spec.total() > len {
        return Err(Error::config(format!(
            "split needs {} observations, series has {len}",
            spec.total()
        )));
    }
    if spec.test == 0 {
        return Err(Error::config("test segment is empty"));
    }
    if cfg.window_l == 0 {
        return Err(Error::config("rolling window length must be positive"));
    }
    cfg.train.validate()
}

/// Reads the fit-time segments, announcing the horizon first.
fn fit_segments<S: Observations + ?Sized>(series: &S, spec: &SplitSpec) -> (Vec<f64>, Vec<f64>) {
    let test_start = spec.test_start();
    series.declare_horizon(Some(test_start));
    (series.read_range(0..spec.train), series.read_range(spec.train..test_start))
}

fn fit_kind(kind: ModelKind, train: &[f64], val: &[f64], cfg: &EvalConfig) -> Result<Fitted> {
    let tc = cfg.train_config(kind);
    Ok(match kind {
        ModelKind::Arima => {
            let (arima, order_report) = cfg.order.fit(train)?;
            Fitted {
                model: FittedModel::Arima(arima),
                order_report,
                train_report: None,
            }
        }
        ModelKind::Lstm => {
            let (model, report) = fit_level_lstm(train, val, &tc)?;
            Fitted {
                model: FittedModel::Lstm(model),
                order_report: None,
                train_report: Some(report),
            }
        }
        ModelKind::Hybrid => {
            let (arima, order_report) = cfg.order.fit(train)?;
            hybrid_from(arima, order_report, train, val, cfg)?
        }
    })
}

fn hybrid_from(
    arima: ArimaModel,
    order_report: Option<OrderSearchReport>,
    train: &[f64],
    val: &[f64],
    cfg: &EvalConfig,
) -> Result<Fitted> {
    let (model, report) = fit_residual_net(arima, train, val, &cfg.train_config(ModelKind::Hybrid))?;
    Ok(Fitted {
        model: FittedModel::Hybrid(model),
        order_report,
        train_report: Some(report),
    })
}

/// Refits the ARIMA coefficients at a fixed order, keeping the best iterate
/// when the optimizer stops short.
fn refit(template: &ArimaModel, history: &[f64]) -> Result<ArimaModel> {
    match fit(history, template.order) {
        Ok(m) => Ok(m),
        Err(Error::NotConverged { best, .. }) => Ok(*best),
        Err(e) => Err(e),
    }
}

fn roll<S: Observations + ?Sized>(series: &S, spec: &SplitSpec, fitted: Fitted, cfg: &EvalConfig) -> Result<EvalRun> {
    let test_start = spec.test_start();
    let end = spec.total();
    let kind = fitted.model.kind();
    let need = fitted.model.min_history();
    let n = spec.test;
    let mut run = EvalRun {
        kind,
        test_start,
        predictions: Vec::with_capacity(n),
        actuals: Vec::new(),
        linear: Vec::new(),
        nonlinear: Vec::new(),
        window_l: cfg.window_l,
        history_used: Vec::with_capacity(n),
        short_history: false,
        model: fitted.model,
        order_report: fitted.order_report,
        train_report: fitted.train_report,
    };
    for t in test_start..end {
        series.declare_horizon(Some(t));
        let start = t.saturating_sub(cfg.window_l);
        let history = series.read_range(start..t);
        if history.len() < cfg.window_l {
            run.short_history = true;
        }
        if history.len() < need {
            return Err(Error::degenerate(format!(
                "{} observations precede test index {t}; {} needs {need}",
                history.len(),
                kind.name()
            )));
        }
        run.history_used.push(history.len());
        let refitted = match (cfg.refit, run.model.arima()) {
            (RefitPolicy::Arima, Some(a)) => Some(refit(a, &history)?),
            _ => None,
        };
        let prediction = match &run.model {
            FittedModel::Arima(a) => forecast_one(refitted.as_ref().unwrap_or(a), &history)?,
            FittedModel::Lstm(l) => l.predict(&history)?,
            FittedModel::Hybrid(h) => {
                let arima = refitted.as_ref().unwrap_or(&h.arima);
                let resid = residuals(arima, &history)?;
                let nonlinear = h.nonlinear(&resid)?;
                let linear = forecast_one(arima, &history)?;
                run.linear.push(linear);
                run.nonlinear.push(nonlinear);
                linear + nonlinear
            }
        };
        if !prediction.is_finite() {
            return Err(Error::numerical(format!("non-finite {} prediction at index {t}", kind.name())));
        }
        run.predictions.push(prediction);
    }
    series.declare_horizon(None);
    run.actuals = series.read_range(test_start..end);
    Ok(run)
}

/// Fits `kind` once on the training segment, then predicts every test day
/// from the `window_l` observations before it.
pub fn sliding_window_evaluate<S: Observations + ?Sized>(
    series: &S,
    spec: &SplitSpec,
    kind: ModelKind,
    cfg: &EvalConfig,
) -> Result<EvalRun> {
    check_split(series.len(), spec, cfg)?;
    let (train, val) = fit_segments(series, spec);
    let fitted = fit_kind(kind, &train, &val, cfg)?;
    roll(series, spec, fitted, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub arima: Result<EvalRun>,
    pub lstm: Result<EvalRun>,
    pub hybrid: Result<EvalRun>,
    pub report: MetricsReport,
}

impl Comparison {
    pub fn run(&self, kind: ModelKind) -> &Result<EvalRun> {
        match kind {
            ModelKind::Arima => &self.arima,
            ModelKind::Lstm => &self.lstm,
            ModelKind::Hybrid => &self.hybrid,
        }
    }

    pub fn all_ok(&self) -> bool {
        ModelKind::ALL.iter().all(|&k| self.run(k).is_ok())
    }
}

/// Runs the ARIMA, levels-LSTM and hybrid models on identical splits. The
/// ARIMA fit is shared by the ARIMA and hybrid rows; a failing model yields a
/// failed row instead of aborting the others.
pub fn compare_models<S: Observations + ?Sized>(series: &S, spec: &SplitSpec, cfg: &EvalConfig) -> Result<Comparison> {
    check_split(series.len(), spec, cfg)?;
    let (train, val) = fit_segments(series, spec);
    let arima_fit = cfg.order.fit(&train);
    let arima = arima_fit.clone().and_then(|(model, report)| {
        roll(
            series,
            spec,
            Fitted {
                model: FittedModel::Arima(model),
                order_report: report,
                train_report: None,
            },
            cfg,
        )
    });
    series.declare_horizon(Some(spec.test_start()));
    let lstm = fit_kind(ModelKind::Lstm, &train, &val, cfg).and_then(|f| roll(series, spec, f, cfg));
    series.declare_horizon(Some(spec.test_start()));
    let hybrid = arima_fit
        .and_then(|(model, report)| hybrid_from(model, report, &train, &val, cfg))
        .and_then(|f| roll(series, spec, f, cfg));

    let rows = [(ModelKind::Arima, &arima), (ModelKind::Lstm, &lstm), (ModelKind::Hybrid, &hybrid)]
        .into_iter()
        .map(|(kind, run)| match run {
            Ok(r) => MetricsRow::from_predictions(kind.name(), &r.predictions, &r.actuals)
                .unwrap_or_else(|e| MetricsRow::failed(kind.name(), e.to_string())),
            Err(e) => MetricsRow::failed(kind.name(), e.to_string()),
        })
        .collect();
    Ok(Comparison {
        arima,
        lstm,
        hybrid,
        report: MetricsReport::new("test", rows),
    })
}
