//! JSON reports and CSV plot data, with readers for each.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use navcast_core::{AdfResult, Best, CorrelogramPoint, MetricsReport, OrderSearchReport, RowStatus, TrainReport};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::ingest::DATE_FORMAT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsJson {
    pub segment: String,
    pub rows: Vec<MetricsRowJson>,
    pub best: String,
}

/// Metric values are `null` for a failed model, with the reason in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRowJson {
    pub model: String,
    pub mse: Option<f64>,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<&MetricsReport> for MetricsJson {
    fn from(r: &MetricsReport) -> Self {
        let rows = r
            .rows
            .iter()
            .map(|row| match &row.status {
                RowStatus::Ok { mse, mae, rmse } => MetricsRowJson {
                    model: row.model.clone(),
                    mse: Some(*mse),
                    mae: Some(*mae),
                    rmse: Some(*rmse),
                    n: row.n,
                    error: None,
                },
                RowStatus::Failed(reason) => MetricsRowJson {
                    model: row.model.clone(),
                    mse: None,
                    mae: None,
                    rmse: None,
                    n: row.n,
                    error: Some(reason.clone()),
                },
            })
            .collect();
        Self {
            segment: r.segment.clone(),
            rows,
            best: match &r.best {
                Best::Model(m) => m.clone(),
                other => other.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValuesJson {
    #[serde(rename = "1%")]
    pub one_pct: f64,
    #[serde(rename = "5%")]
    pub five_pct: f64,
    #[serde(rename = "10%")]
    pub ten_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfEntryJson {
    pub d: usize,
    pub statistic: Option<f64>,
    pub lag_used: Option<usize>,
    pub nobs: Option<usize>,
    pub critical_values: Option<CriticalValuesJson>,
    pub stationary_5pct: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AdfEntryJson {
    pub fn new(d: usize, result: std::result::Result<&AdfResult, String>) -> Self {
        match result {
            Ok(r) => Self {
                d,
                statistic: Some(r.statistic),
                lag_used: Some(r.lag_used),
                nobs: Some(r.nobs),
                critical_values: Some(CriticalValuesJson {
                    one_pct: r.critical_values.one_pct,
                    five_pct: r.critical_values.five_pct,
                    ten_pct: r.critical_values.ten_pct,
                }),
                stationary_5pct: Some(r.is_stationary_5pct),
                error: None,
            },
            Err(e) => Self {
                d,
                statistic: None,
                lag_used: None,
                nobs: None,
                critical_values: None,
                stationary_5pct: None,
                error: Some(e),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfJson {
    pub series: String,
    pub n: usize,
    pub results: Vec<AdfEntryJson>,
    /// Smallest differencing order judged stationary at 5%.
    pub first_stationary_d: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateJson {
    pub order: [usize; 3],
    pub aic: Option<f64>,
    pub converged: bool,
    pub near_unit_root: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSearchJson {
    pub chosen: [usize; 3],
    pub adf: Vec<AdfEntryJson>,
    pub candidates: Vec<CandidateJson>,
}

impl From<&OrderSearchReport> for OrderSearchJson {
    fn from(r: &OrderSearchReport) -> Self {
        Self {
            chosen: [r.chosen.p, r.chosen.d, r.chosen.q],
            adf: r.adf.iter().enumerate().map(|(d, a)| AdfEntryJson::new(d, Ok(a))).collect(),
            candidates: r
                .candidates
                .iter()
                .map(|c| CandidateJson {
                    order: [c.order.p, c.order.d, c.order.q],
                    aic: c.aic.is_finite().then_some(c.aic),
                    converged: c.converged,
                    near_unit_root: c.near_unit_root,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainJson {
    pub model: String,
    pub loss_history: Vec<f64>,
    pub val_history: Vec<f64>,
    pub best_val_epoch: Option<usize>,
    pub best_val_mse: Option<f64>,
}

impl TrainJson {
    pub fn new(model: &str, r: &TrainReport) -> Self {
        Self {
            model: model.into(),
            loss_history: r.loss_history.clone(),
            val_history: r.val_history.clone(),
            best_val_epoch: r.best_val.map(|b| b.0),
            best_val_mse: r.best_val.map(|b| b.1),
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::format(path, e.to_string())
}

pub fn write_correlogram_csv(path: &Path, points: &[CorrelogramPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["lag", "value", "confidence_bound"]).map_err(|e| csv_error(path, e))?;
    for p in points {
        w.write_record([p.lag.to_string(), p.value.to_string(), p.confidence_bound.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_correlogram_csv(path: &Path) -> Result<Vec<CorrelogramPoint>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = || CliError::format(path, format!("malformed row {:?}", rec));
        out.push(CorrelogramPoint {
            lag: rec.get(0).and_then(|v| v.parse().ok()).ok_or_else(bad)?,
            value: rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?,
            confidence_bound: rec.get(2).and_then(|v| v.parse().ok()).ok_or_else(bad)?,
        });
    }
    Ok(out)
}

/// One row of `diff.csv`: a level and its first difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub date: String,
    pub nav: f64,
    pub diff1: f64,
}

pub fn write_diff_csv(path: &Path, dates: &[NaiveDate], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for t in 1..values.len() {
        w.serialize(DiffRow {
            date: dates[t].format(DATE_FORMAT).to_string(),
            nav: values[t],
            diff1: values[t] - values[t - 1],
        })
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_diff_csv(path: &Path) -> Result<Vec<DiffRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| csv_error(path, e))
}

pub const PREDICTION_COLUMNS: [&str; 5] = ["date", "actual", "arima", "lstm", "hybrid"];

/// One test day; a model column is `None` when that model failed.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub date: NaiveDate,
    pub actual: f64,
    pub arima: Option<f64>,
    pub lstm: Option<f64>,
    pub hybrid: Option<f64>,
}

pub fn write_predictions_csv(path: &Path, rows: &[PredictionRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(PREDICTION_COLUMNS).map_err(|e| csv_error(path, e))?;
    let cell = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for r in rows {
        w.write_record([
            r.date.format(DATE_FORMAT).to_string(),
            r.actual.to_string(),
            cell(r.arima),
            cell(r.lstm),
            cell(r.hybrid),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_predictions_csv(path: &Path) -> Result<Vec<PredictionRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = r.headers().map_err(|e| csv_error(path, e))?;
    if headers.iter().ne(PREDICTION_COLUMNS) {
        return Err(CliError::format(path, "unexpected predictions header"));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = || CliError::format(path, format!("malformed row {:?}", rec));
        let opt = |i: usize| -> Result<Option<f64>> {
            match rec.get(i) {
                Some("") => Ok(None),
                Some(v) => v.parse().map(Some).map_err(|_| bad()),
                None => Err(bad()),
            }
        };
        out.push(PredictionRow {
            date: rec
                .get(0)
                .and_then(|d| NaiveDate::parse_from_str(d, DATE_FORMAT).ok())
                .ok_or_else(bad)?,
            actual: opt(1)?.ok_or_else(bad)?,
            arima: opt(2)?,
            lstm: opt(3)?,
            hybrid: opt(4)?,
        });
    }
    Ok(out)
}

/// `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        format!("{:.*}", (5 - magnitude).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

/// Aligned text table of a metrics report.
pub fn metrics_table(r: &MetricsReport) -> String {
    let mut out = format!("{:<8} {:>12} {:>12} {:>12} {:>6}\n", "model", "MSE", "MAE", "RMSE", "n");
    for row in &r.rows {
        match &row.status {
            RowStatus::Ok { mse, mae, rmse } => out.push_str(&format!(
                "{:<8} {:>12} {:>12} {:>12} {:>6}\n",
                row.model,
                sig6(*mse),
                sig6(*mae),
                sig6(*rmse),
                row.n
            )),
            RowStatus::Failed(reason) => out.push_str(&format!("{:<8} failed: {reason}\n", row.model)),
        }
    }
    out.push_str(&format!("best: {}\n", MetricsJson::from(r).best));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use navcast_core::{build_report, MetricsRow};

    #[test]
    fn significant_digits() {
        assert_eq!(sig6(3.61), "3.61000");
        assert_eq!(sig6(0.0144), "0.0144000");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1.234567e-7), "1.23457e-7");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn metrics_json_schema() {
        let actual = [1.0, 2.0];
        let r = build_report("test", &[("arima", &[1.0, 2.5], &actual), ("hybrid", &[1.0, 2.0], &actual)]).unwrap();
        let v = serde_json::to_value(MetricsJson::from(&r)).unwrap();
        assert_eq!(v["segment"], "test");
        assert_eq!(v["best"], "hybrid");
        let row = v["rows"][0].as_object().unwrap();
        let mut keys: Vec<&str> = row.keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(keys, ["mae", "model", "mse", "n", "rmse"]);
        assert_eq!(row["mse"], 0.125);
        assert_eq!(row["n"], 2);
        let failed = MetricsReport::new("test", vec![MetricsRow::failed("lstm", "diverged")]);
        let v = serde_json::to_value(MetricsJson::from(&failed)).unwrap();
        assert!(v["rows"][0]["mse"].is_null());
        assert_eq!(v["rows"][0]["error"], "diverged");
        assert!(metrics_table(&failed).contains("failed: diverged"));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        let d = NaiveDate::from_ymd_opt(2021, 7, 30).unwrap();
        let rows = vec![
            PredictionRow { date: d, actual: 1.0 / 3.0, arima: Some(0.1), lstm: None, hybrid: Some(-2e-9) },
            PredictionRow { date: d.succ_opt().unwrap(), actual: 2.0, arima: Some(2.1), lstm: Some(1.9), hybrid: Some(2.0) },
        ];
        write_predictions_csv(&p, &rows).unwrap();
        assert!(fs::read_to_string(&p).unwrap().starts_with("date,actual,arima,lstm,hybrid\n2021-07-30,"));
        assert_eq!(read_predictions_csv(&p).unwrap(), rows);

        let c = dir.path().join("acf.csv");
        let pts = vec![CorrelogramPoint { lag: 1, value: -0.25, confidence_bound: 0.196 }];
        write_correlogram_csv(&c, &pts).unwrap();
        assert_eq!(read_correlogram_csv(&c).unwrap(), pts);

        let f = dir.path().join("diff.csv");
        write_diff_csv(&f, &[d, d.succ_opt().unwrap()], &[1.0, 1.25]).unwrap();
        let back = read_diff_csv(&f).unwrap();
        assert_eq!(back, vec![DiffRow { date: "2021-07-31".into(), nav: 1.25, diff1: 0.25 }]);

        let j = dir.path().join("m.json");
        let m = MetricsJson { segment: "test".into(), rows: vec![], best: "tie".into() };
        write_json(&j, &m).unwrap();
        assert_eq!(read_json::<MetricsJson>(&j).unwrap(), m);
    }
}
