//! Point-forecast error measures and the model comparison table.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::sqrt;

fn check(pred: &[f64], actual: &[f64]) -> Result<()> {
    if pred.is_empty() || pred.len() != actual.len() {
        return Err(Error::config(format!(
            "metrics need equal nonzero lengths, got {} predictions and {} actuals",
            pred.len(),
            actual.len()
        )));
    }
    if pred.iter().chain(actual).any(|v| !v.is_finite()) {
        return Err(Error::config("metrics need finite values"));
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check(pred, actual)?;
    let sse: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok(sse / pred.len() as f64)
}

/// Mean absolute error.
pub fn mae(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check(pred, actual)?;
    let sae: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(sae / pred.len() as f64)
}

/// Root mean squared error.
pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    mse(pred, actual).map(sqrt)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok { mse: f64, mae: f64, rmse: f64 },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub model: String,
    pub n: usize,
    pub status: RowStatus,
}

impl MetricsRow {
    pub fn from_predictions(model: &str, pred: &[f64], actual: &[f64]) -> Result<Self> {
        Ok(Self {
            model: model.into(),
            n: pred.len(),
            status: RowStatus::Ok {
                mse: mse(pred, actual)?,
                mae: mae(pred, actual)?,
                rmse: rmse(pred, actual)?,
            },
        })
    }

    pub fn failed(model: &str, reason: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            n: 0,
            status: RowStatus::Failed(reason.into()),
        }
    }

    /// `(mse, mae, rmse)` of a successful row.
    pub fn values(&self) -> Option<(f64, f64, f64)> {
        match self.status {
            RowStatus::Ok { mse, mae, rmse } => Some((mse, mae, rmse)),
            RowStatus::Failed(_) => None,
        }
    }
}

/// Which row, if any, is no worse than every other on all three metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Best {
    Model(String),
    Tie,
    /// No single row dominates.
    Mixed,
}

impl fmt::Display for Best {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Best::Model(m) => f.write_str(m),
            Best::Tie => f.write_str("tie"),
            Best::Mixed => f.write_str("mixed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub segment: String,
    pub rows: Vec<MetricsRow>,
    pub best: Best,
}

impl MetricsReport {
    pub fn new(segment: &str, rows: Vec<MetricsRow>) -> Self {
        let best = best_of(&rows);
        Self {
            segment: segment.into(),
            rows,
            best,
        }
    }

    pub fn row(&self, model: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.values().is_some())
    }
}

fn best_of(rows: &[MetricsRow]) -> Best {
    let ok: Vec<(&str, [f64; 3])> = rows
        .iter()
        .filter_map(|r| r.values().map(|(a, b, c)| (r.model.as_str(), [a, b, c])))
        .collect();
    let dominant: Vec<&str> = ok
        .iter()
        .filter(|(_, m)| ok.iter().all(|(_, o)| (0..3).all(|k| m[k] <= o[k])))
        .map(|(name, _)| *name)
        .collect();
    match dominant.as_slice() {
        [] => Best::Mixed,
        [one] => Best::Model((*one).into()),
        _ => Best::Tie,
    }
}

/// Metrics table over named `(predictions, actuals)` runs, in the given order.
pub fn build_report(segment: &str, runs: &[(&str, &[f64], &[f64])]) -> Result<MetricsReport> {
    let rows = runs
        .iter()
        .map(|(name, pred, actual)| MetricsRow::from_predictions(name, pred, actual))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport::new(segment, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_values() {
        let (p, a) = ([1.0, 2.0], [2.0, 4.0]);
        assert_eq!(mse(&p, &a).unwrap(), 2.5);
        assert_eq!(mae(&p, &a).unwrap(), 1.5);
        assert_eq!(rmse(&p, &a).unwrap(), 2.5f64.sqrt());
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mae(&a, &a).unwrap(), 0.0);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn published_row_is_consistent_to_two_decimals() {
        let rounded = (3.61f64.sqrt() * 100.0).round() / 100.0;
        assert_eq!(rounded, 1.90);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(mse(&[], &[]), Err(Error::Configuration(_))));
        assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(Error::Configuration(_))));
        assert!(matches!(rmse(&[f64::NAN], &[1.0]), Err(Error::Configuration(_))));
    }

    #[test]
    fn rmse_squares_to_mse() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let n = rng.random_range(1..50);
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let r = rmse(&p, &a).unwrap();
            assert!((r * r - mse(&p, &a).unwrap()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn metric_properties(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..40),
            k in -5.0f64..5.0,
        ) {
            let (p, a): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let (m, e, r) = (mse(&p, &a).unwrap(), mae(&p, &a).unwrap(), rmse(&p, &a).unwrap());
            prop_assert!(m >= 0.0 && e >= 0.0 && r >= 0.0);
            prop_assert!(e <= r + 1e-12 * (1.0 + r));
            prop_assert_eq!(m, mse(&a, &p).unwrap());
            prop_assert_eq!(e, mae(&a, &p).unwrap());
            let mut rev_p = p.clone();
            let mut rev_a = a.clone();
            rev_p.reverse();
            rev_a.reverse();
            prop_assert!((mse(&rev_p, &rev_a).unwrap() - m).abs() <= 1e-12 * (1.0 + m));
            let kp: Vec<f64> = p.iter().map(|v| v * k).collect();
            let ka: Vec<f64> = a.iter().map(|v| v * k).collect();
            prop_assert!((mse(&kp, &ka).unwrap() - k * k * m).abs() <= 1e-9 * (1.0 + k * k * m));
            prop_assert!((mae(&kp, &ka).unwrap() - k.abs() * e).abs() <= 1e-9 * (1.0 + k.abs() * e));
            prop_assert!((rmse(&kp, &ka).unwrap() - k.abs() * r).abs() <= 1e-9 * (1.0 + k.abs() * r));
        }
    }

    #[test]
    fn report_rows_and_best() {
        let actual = [1.0, 2.0, 3.0];
        let good = [1.0, 2.0, 3.1];
        let bad = [0.0, 2.5, 3.5];
        let r = build_report("test", &[("arima", &bad, &actual), ("lstm", &bad, &actual), ("hybrid", &good, &actual)]).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[2].model, "hybrid");
        assert_eq!(r.best, Best::Model("hybrid".into()));
        let single = build_report("test", &[("arima", &good, &actual)]).unwrap();
        assert_eq!(single.rows.len(), 1);
        assert_eq!(single.best, Best::Model("arima".into()));
        let tied = build_report("test", &[("arima", &good, &actual), ("hybrid", &good, &actual)]).unwrap();
        assert_eq!(tied.best, Best::Tie);
        assert!(build_report("test", &[("arima", &[], &[])]).is_err());
    }

    #[test]
    fn mixed_and_failed_rows() {
        let actual = [0.0, 0.0, 0.0, 0.0];
        // a: one large miss (higher mse, lower mae); b: uniform misses
        let a = [2.0, 0.0, 0.0, 0.0];
        let b = [0.9, 0.9, 0.9, 0.9];
        let r = build_report("test", &[("arima", &a, &actual), ("hybrid", &b, &actual)]).unwrap();
        assert_eq!(r.best, Best::Mixed);
        let rows = vec![
            MetricsRow::from_predictions("arima", &a, &actual).unwrap(),
            MetricsRow::failed("lstm", "diverged"),
        ];
        let r = MetricsReport::new("test", rows);
        assert!(!r.all_ok());
        assert_eq!(r.best, Best::Model("arima".into()));
        assert_eq!(r.row("lstm").unwrap().values(), None);
    }
}
