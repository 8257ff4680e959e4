//! Command-line definitions and command implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use navcast_core::{
    acf, adf_test, compare_models, difference, fit_hybrid, pacf, split, AdfResult, ArimaModel, ArimaOrder,
    Comparison, EvalConfig, EvalRun, ModelKind, OrderChoice, RefitPolicy, SplitSpec, TimeSeries, TrainConfig,
};

use crate::error::{CliError, Result};
use crate::ingest::{read_nav_csv, write_nav_csv};
use crate::model_io::{arima_to_string, hybrid_to_string, level_lstm_to_string};
use crate::report::{
    metrics_table, write_correlogram_csv, write_diff_csv, write_json, write_predictions_csv, write_text, AdfEntryJson,
    AdfJson, MetricsJson, OrderSearchJson, PredictionRow, TrainJson,
};
use crate::synth::{generate, SynthKind, SynthParams};

/// Largest differencing order examined by `analyze`.
const MAX_ANALYZE_D: usize = 2;
const MAX_CORRELOGRAM_LAG: usize = 40;

#[derive(Debug, Parser)]
#[command(name = "navcast", version, about = "ARIMA, LSTM and ARIMA-LSTM forecasting of fund NAV series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationarity tests, correlograms and differenced series.
    Analyze(DataArgs),
    /// Select and fit the ARIMA model on the training segment.
    FitArima(FitArgs),
    /// Fit the ARIMA model and its residual LSTM on the training segment.
    FitHybrid(FitArgs),
    /// Rolling one-step evaluation of ARIMA, LSTM and hybrid on the test segment.
    Compare(CompareArgs),
    /// Write a seeded synthetic NAV series.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with header `date,nav`.
    #[arg(long)]
    pub input: PathBuf,
    /// Train, validation and test sizes; defaults to 900,100,260 scaled to the series length.
    #[arg(long, value_parser = parse_split)]
    pub split: Option<SplitSpec>,
    /// Output directory.
    #[arg(long, default_value = "navcast-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `auto` or an explicit `p,d,q`.
    #[arg(long, default_value = "auto", value_parser = parse_order)]
    pub order: OrderChoice,
    #[arg(long, default_value_t = 0.005)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    /// Input window length of the LSTMs.
    #[arg(long = "window-m", default_value_t = 20)]
    pub window_m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl FitArgs {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            epochs: self.epochs,
            batch_size: self.batch,
            layers: self.layers,
            hidden_dim: self.hidden,
            window: self.window_m,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Rolling history length used for each prediction.
    #[arg(long = "window-L", default_value_t = 120)]
    pub window_l: usize,
    /// `none` fits once; `arima` re-estimates ARIMA coefficients on every window.
    #[arg(long, default_value = "none", value_parser = parse_refit)]
    pub refit: RefitPolicy,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// random-walk, ar1 or linear-plus-sine.
    #[arg(long, value_parser = SynthKind::from_str)]
    pub kind: SynthKind,
    #[arg(long, default_value_t = 1260)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Starting level (walks) or mean (ar1).
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub drift: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub period: Option<f64>,
    /// Destination CSV file.
    #[arg(long, default_value = "synthetic.csv")]
    pub out: PathBuf,
}

impl SynthArgs {
    pub fn params(&self) -> SynthParams {
        let d = SynthParams::default();
        SynthParams {
            level: self.level.unwrap_or(d.level),
            sigma: self.sigma.unwrap_or(d.sigma),
            drift: self.drift.unwrap_or(d.drift),
            phi: self.phi.unwrap_or(d.phi),
            amplitude: self.amplitude.unwrap_or(d.amplitude),
            period: self.period.unwrap_or(d.period),
        }
    }
}

fn parse_list(s: &str, n: usize, what: &str) -> std::result::Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("{what} needs {n} comma-separated integers"));
    }
    parts
        .iter()
        .map(|p| p.parse().map_err(|_| format!("`{p}` is not a non-negative integer")))
        .collect()
}

pub fn parse_split(s: &str) -> std::result::Result<SplitSpec, String> {
    let v = parse_list(s, 3, "split")?;
    SplitSpec::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

pub fn parse_order(s: &str) -> std::result::Result<OrderChoice, String> {
    if s == "auto" {
        return Ok(OrderChoice::default());
    }
    let v = parse_list(s, 3, "order")?;
    Ok(OrderChoice::Fixed(ArimaOrder::new(v[0], v[1], v[2])))
}

pub fn parse_refit(s: &str) -> std::result::Result<RefitPolicy, String> {
    match s {
        "none" => Ok(RefitPolicy::None),
        "arima" => Ok(RefitPolicy::Arima),
        _ => Err("expected `none` or `arima`".into()),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::FitArima(a) => fit_arima_cmd(&a),
        Command::FitHybrid(a) => fit_hybrid_cmd(&a),
        Command::Compare(a) => compare(&a),
        Command::Synth(a) => synth(&a),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn resolve_split(series: &TimeSeries, requested: Option<SplitSpec>) -> Result<SplitSpec> {
    let n = series.len();
    let spec = match requested {
        Some(s) => s,
        None => SplitSpec::proportional(n).map_err(|e| CliError::Usage(e.to_string()))?,
    };
    if spec.total() > n {
        return Err(CliError::Usage(format!(
            "split {},{},{} needs {} observations but the series has {n}",
            spec.train,
            spec.val,
            spec.test,
            spec.total()
        )));
    }
    Ok(spec)
}

fn train_val(series: &TimeSeries, spec: SplitSpec) -> Result<(TimeSeries, TimeSeries)> {
    let (train, val, _) = split(&series.slice(0..spec.total()), spec).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((train, val))
}

pub fn analyze(args: &DataArgs) -> Result<()> {
    let series = read_nav_csv(&args.input)?;
    create_dir(&args.out)?;
    let values = series.values();
    let mut entries = Vec::new();
    let mut first_stationary = None;
    let mut results: Vec<Option<AdfResult>> = Vec::new();
    for d in 0..=MAX_ANALYZE_D {
        let outcome = difference(values, d).and_then(|w| adf_test(&w.values, None));
        match &outcome {
            Ok(r) => {
                if r.is_stationary_5pct && first_stationary.is_none() {
                    first_stationary = Some(d);
                }
                entries.push(AdfEntryJson::new(d, Ok(r)));
            }
            Err(e) => entries.push(AdfEntryJson::new(d, Err(e.to_string()))),
        }
        results.push(outcome.ok());
    }
    if results.iter().all(Option::is_none) {
        let e = difference(values, 0).and_then(|w| adf_test(&w.values, None)).unwrap_err();
        return Err(CliError::Analysis(e));
    }
    write_json(
        &args.out.join("adf.json"),
        &AdfJson {
            series: series.name().into(),
            n: series.len(),
            results: entries,
            first_stationary_d: first_stationary,
        },
    )?;

    let d = first_stationary.unwrap_or(1);
    let w = difference(values, d).map_err(CliError::Analysis)?;
    let max_lag = MAX_CORRELOGRAM_LAG.min(w.values.len().saturating_sub(1) / 2);
    let acf_points = acf(&w.values, max_lag).map_err(CliError::Analysis)?;
    let pacf_points = pacf(&w.values, max_lag).map_err(CliError::Analysis)?;
    write_correlogram_csv(&args.out.join("acf.csv"), &acf_points)?;
    write_correlogram_csv(&args.out.join("pacf.csv"), &pacf_points)?;
    write_diff_csv(&args.out.join("diff.csv"), series.dates(), values)?;

    println!("series {} ({} observations)", series.name(), series.len());
    for (d, r) in results.iter().enumerate() {
        match r {
            Some(r) => println!(
                "d={d}: ADF {:.4} (lag {}, 5% critical {:.2}) -> {}",
                r.statistic,
                r.lag_used,
                r.critical_values.five_pct,
                if r.is_stationary_5pct { "stationary" } else { "non-stationary" }
            ),
            None => println!("d={d}: not testable"),
        }
    }
    match first_stationary {
        Some(d) => println!("correlograms of the d={d} series written to {}", args.out.display()),
        None => println!("no order up to d={MAX_ANALYZE_D} is stationary; correlograms use d=1"),
    }
    Ok(())
}

fn print_arima(model: &ArimaModel) {
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ");
    println!("ARIMA{}: intercept {:.6}, ar [{}], ma [{}], sigma2 {:.6e}", model.order, model.intercept, fmt(&model.ar), fmt(&model.ma), model.sigma2);
    if let Ok(aic) = navcast_core::aic(model) {
        println!("AIC {aic:.4}");
    }
}

pub fn fit_arima_cmd(args: &FitArgs) -> Result<()> {
    let series = read_nav_csv(&args.data.input)?;
    let spec = resolve_split(&series, args.data.split)?;
    let (train, _) = train_val(&series, spec)?;
    let (model, report) = args.order.fit(train.values()).map_err(CliError::from_fit)?;
    let models = args.data.out.join("models");
    create_dir(&models)?;
    write_text(&models.join("arima.txt"), &arima_to_string(&model))?;
    if let Some(r) = &report {
        write_json(&args.data.out.join("order_search.json"), &OrderSearchJson::from(r))?;
    }
    print_arima(&model);
    Ok(())
}

pub fn fit_hybrid_cmd(args: &FitArgs) -> Result<()> {
    let series = read_nav_csv(&args.data.input)?;
    let spec = resolve_split(&series, args.data.split)?;
    let (train, val) = train_val(&series, spec)?;
    let cfg = args.train_config();
    let fit = fit_hybrid(train.values(), val.values(), &args.order, &cfg).map_err(CliError::from_fit)?;
    let models = args.data.out.join("models");
    create_dir(&models)?;
    write_text(&models.join("arima.txt"), &arima_to_string(&fit.model.arima))?;
    write_text(&models.join("hybrid.txt"), &hybrid_to_string(&fit.model))?;
    if let Some(r) = &fit.order_report {
        write_json(&args.data.out.join("order_search.json"), &OrderSearchJson::from(r))?;
    }
    write_json(&args.data.out.join("train_hybrid.json"), &TrainJson::new("hybrid", &fit.train_report))?;
    print_arima(&fit.model.arima);
    let r = &fit.train_report;
    println!("residual LSTM: final training loss {:.6e}", r.final_loss().unwrap_or(f64::NAN));
    if let Some((epoch, loss)) = r.best_val {
        println!("best validation loss {loss:.6e} at epoch {}", epoch + 1);
    }
    Ok(())
}

fn column(run: &navcast_core::Result<EvalRun>, i: usize) -> Option<f64> {
    run.as_ref().ok().map(|r| r.predictions[i])
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let series = read_nav_csv(&args.fit.data.input)?;
    let spec = resolve_split(&series, args.fit.data.split)?;
    let cfg = EvalConfig {
        order: args.fit.order,
        train: args.fit.train_config(),
        window_l: args.window_l,
        refit: args.refit,
    };
    let cmp = compare_models(&series, &spec, &cfg).map_err(CliError::from_fit)?;
    let out = &args.fit.data.out;
    let models = out.join("models");
    create_dir(&models)?;
    write_comparison(out, &series, &spec, &cmp)?;
    print!("{}", metrics_table(&cmp.report));
    let failures: Vec<String> = ModelKind::ALL
        .iter()
        .filter_map(|&k| cmp.run(k).as_ref().err().map(|e| format!("{}: {e}", k.name())))
        .collect();
    match cmp.hybrid.as_ref().err().or(cmp.lstm.as_ref().err()).or(cmp.arima.as_ref().err()) {
        None => Ok(()),
        Some(e) => {
            eprintln!("failed models: {}", failures.join("; "));
            Err(CliError::from_fit(e.clone()))
        }
    }
}

fn write_comparison(out: &Path, series: &TimeSeries, spec: &SplitSpec, cmp: &Comparison) -> Result<()> {
    let start = spec.test_start();
    let actual = &series.values()[start..spec.total()];
    let rows: Vec<PredictionRow> = (0..spec.test)
        .map(|i| PredictionRow {
            date: series.dates()[start + i],
            actual: actual[i],
            arima: column(&cmp.arima, i),
            lstm: column(&cmp.lstm, i),
            hybrid: column(&cmp.hybrid, i),
        })
        .collect();
    write_predictions_csv(&out.join("predictions.csv"), &rows)?;
    write_json(&out.join("metrics.json"), &MetricsJson::from(&cmp.report))?;
    let models = out.join("models");
    if let Ok(run) = &cmp.arima {
        if let navcast_core::FittedModel::Arima(m) = &run.model {
            write_text(&models.join("arima.txt"), &arima_to_string(m))?;
        }
        if let Some(r) = &run.order_report {
            write_json(&out.join("order_search.json"), &OrderSearchJson::from(r))?;
        }
    }
    if let Ok(run) = &cmp.lstm {
        if let navcast_core::FittedModel::Lstm(m) = &run.model {
            write_text(&models.join("lstm.txt"), &level_lstm_to_string(m))?;
        }
        if let Some(r) = &run.train_report {
            write_json(&out.join("train_lstm.json"), &TrainJson::new("lstm", r))?;
        }
    }
    if let Ok(run) = &cmp.hybrid {
        if let navcast_core::FittedModel::Hybrid(m) = &run.model {
            write_text(&models.join("hybrid.txt"), &hybrid_to_string(m))?;
        }
        if let Some(r) = &run.train_report {
            write_json(&out.join("train_hybrid.json"), &TrainJson::new("hybrid", r))?;
        }
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let series = generate(args.kind, args.n, &args.params(), args.seed)?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_nav_csv(&args.out, &series)?;
    println!("wrote {} {} observations to {}", series.len(), args.kind, args.out.display());
    Ok(())
}
