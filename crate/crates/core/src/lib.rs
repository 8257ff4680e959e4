//! Forecasting primitives for univariate fund net-asset-value series.
//!
//! The crate combines an ARIMA model for the linear structure of a series
//! with a stacked LSTM trained on the ARIMA residuals, and superposes the two
//! one-step forecasts. Around that sit the supporting analyses (differencing,
//! ADF unit-root test, correlograms), min-max scaling, chronological splits,
//! sliding-window one-step-ahead evaluation and the MSE/MAE/RMSE report.
//!
//! The crate is `no_std` + `alloc`. The default `std` feature only swaps in
//! the platform math library and runtime SIMD detection for matrix kernels.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod adf;
pub mod arima;
pub mod correlogram;
mod error;
pub mod hybrid;
mod linalg;
pub mod lstm;
mod math;
pub mod metrics;
pub mod scale;
pub mod series;

pub use adf::{adf_test, AdfResult, CriticalValues};
pub use arima::{
    aic, fit, forecast_one, residuals, select_order, ArimaModel, ArimaOrder, OrderCandidate,
    OrderChoice, OrderSearchReport,
};
pub use correlogram::{acf, autocorrelations, pacf, CorrelogramPoint};
pub use error::{Error, Result};
pub use hybrid::{
    compare_models, fit_hybrid, fit_level_lstm, predict_one, sliding_window_evaluate, Comparison,
    EvalConfig, EvalRun, FittedModel, HybridFit, HybridModel, HybridPrediction, LevelLstmModel,
    ModelKind, RefitPolicy,
};
pub use lstm::{
    bptt_gradients, cell_forward, make_windows, train, train_with_validation, Gate,
    LstmCellParams, LstmGradients, LstmNetwork, LstmState, OutputHead, SupervisedWindowSet,
    TrainConfig, TrainReport,
};
pub use metrics::{build_report, mae, mse, rmse, Best, MetricsReport, MetricsRow, RowStatus};
pub use scale::ScaleParams;
pub use series::{
    difference, integrate, split, DifferencedSeries, Observations, SplitSpec, TimeSeries,
};
