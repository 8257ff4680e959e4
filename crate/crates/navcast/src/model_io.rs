//! Versioned plain-text model files.
//!
//! Each file starts with a `navcast-<kind> <version>` line followed by
//! `key value...` lines; reals are written with 17 significant digits so a
//! written model reads back bit for bit.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use navcast_core::arima::ar_is_stationary;
use navcast_core::{ArimaModel, ArimaOrder, HybridModel, LevelLstmModel, LstmCellParams, LstmNetwork, OutputHead, ScaleParams};

use crate::error::{CliError, Result};

const VERSION: u32 = 1;

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn reals(xs: &[f64]) -> String {
    xs.iter().map(|&x| real(x)).collect::<Vec<_>>().join(" ")
}

fn line(out: &mut String, key: &str, value: impl AsRef<str>) {
    let value = value.as_ref();
    if value.is_empty() {
        let _ = writeln!(out, "{key}");
    } else {
        let _ = writeln!(out, "{key} {value}");
    }
}

pub fn arima_to_string(model: &ArimaModel) -> String {
    let mut out = format!("navcast-arima {VERSION}\n");
    write_arima_body(&mut out, model);
    out
}

fn write_arima_body(out: &mut String, m: &ArimaModel) {
    let ArimaOrder { p, d, q } = m.order;
    line(out, "order", format!("{p} {d} {q}"));
    line(out, "intercept", real(m.intercept));
    line(out, "center", real(m.center));
    line(out, "sigma2", real(m.sigma2));
    line(out, "n_obs", m.n_obs.to_string());
    line(out, "ar", reals(&m.ar));
    line(out, "ma", reals(&m.ma));
    line(out, "residuals", reals(&m.in_sample_residuals));
}

fn write_scale(out: &mut String, key: &str, s: &ScaleParams) {
    line(out, key, reals(&[s.min, s.max, s.target_lo, s.target_hi]));
}

fn write_network(out: &mut String, net: &LstmNetwork) {
    line(
        out,
        "dims",
        format!("{} {} {}", net.input_dim(), net.hidden_dim(), net.layers.len()),
    );
    for (l, cell) in net.layers.iter().enumerate() {
        let k = cell.concat_dim();
        line(out, &format!("layer {l} weights"), format!("{} {k}", 4 * cell.hidden_dim));
        for row in cell.weights.chunks(k) {
            let _ = writeln!(out, "{}", reals(row));
        }
        line(out, &format!("layer {l} bias"), reals(&cell.bias));
    }
    line(out, "head weights", reals(&net.head.weights));
    line(out, "head bias", real(net.head.bias));
}

pub fn level_lstm_to_string(model: &LevelLstmModel) -> String {
    let mut out = format!("navcast-lstm {VERSION}\n");
    line(&mut out, "window", model.window_m.to_string());
    write_scale(&mut out, "scale", &model.scale);
    write_network(&mut out, &model.net);
    out
}

pub fn hybrid_to_string(model: &HybridModel) -> String {
    let mut out = format!("navcast-hybrid {VERSION}\n");
    write_arima_body(&mut out, &model.arima);
    line(&mut out, "window", model.window_m.to_string());
    write_scale(&mut out, "scale", &model.residual_scale);
    write_network(&mut out, &model.residual_net);
    out
}

/// Line-oriented reader over a model document.
struct Doc<'a> {
    path: &'a Path,
    lines: VecDeque<(usize, &'a str)>,
}

impl<'a> Doc<'a> {
    fn new(path: &'a Path, text: &'a str, kind: &str) -> Result<Self> {
        let mut lines: VecDeque<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let expected = format!("navcast-{kind} {VERSION}");
        match lines.pop_front() {
            Some((_, first)) if first == expected => Ok(Self { path, lines }),
            Some((_, first)) => Err(CliError::format(path, format!("expected `{expected}`, found `{first}`"))),
            None => Err(CliError::format(path, "empty model file")),
        }
    }

    fn err(&self, line: usize, message: impl std::fmt::Display) -> CliError {
        CliError::format(self.path, format!("line {line}: {message}"))
    }

    /// Tokens after `key` on the next line.
    fn field(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, l) = self
            .lines
            .pop_front()
            .ok_or_else(|| CliError::format(self.path, format!("missing `{key}`")))?;
        let rest = l
            .strip_prefix(key)
            .filter(|r| r.is_empty() || r.starts_with(' '))
            .ok_or_else(|| self.err(n, format!("expected `{key}`")))?;
        Ok((n, rest.split_whitespace().collect()))
    }

    fn parse<T: std::str::FromStr>(&self, n: usize, tok: &str) -> Result<T> {
        tok.parse().map_err(|_| self.err(n, format!("cannot parse `{tok}`")))
    }

    fn reals(&mut self, key: &str, count: Option<usize>) -> Result<Vec<f64>> {
        let (n, toks) = self.field(key)?;
        if let Some(c) = count {
            if toks.len() != c {
                return Err(self.err(n, format!("`{key}` needs {c} values, found {}", toks.len())));
            }
        }
        toks.iter().map(|t| self.parse(n, t)).collect()
    }

    fn ints(&mut self, key: &str, count: usize) -> Result<Vec<usize>> {
        let (n, toks) = self.field(key)?;
        if toks.len() != count {
            return Err(self.err(n, format!("`{key}` needs {count} integers, found {}", toks.len())));
        }
        toks.iter().map(|t| self.parse(n, t)).collect()
    }

    fn row(&mut self, width: usize) -> Result<Vec<f64>> {
        let (n, l) = self
            .lines
            .pop_front()
            .ok_or_else(|| CliError::format(self.path, "truncated weight matrix"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != width {
            return Err(self.err(n, format!("expected {width} weights, found {}", toks.len())));
        }
        toks.iter().map(|t| self.parse(n, t)).collect()
    }

    fn finish(&self) -> Result<()> {
        match self.lines.front() {
            Some((n, l)) => Err(self.err(*n, format!("unexpected `{l}`"))),
            None => Ok(()),
        }
    }

    fn arima_body(&mut self) -> Result<ArimaModel> {
        let o = self.ints("order", 3)?;
        let order = ArimaOrder::new(o[0], o[1], o[2]);
        let intercept = self.reals("intercept", Some(1))?[0];
        let center = self.reals("center", Some(1))?[0];
        let sigma2 = self.reals("sigma2", Some(1))?[0];
        let n_obs = self.ints("n_obs", 1)?[0];
        let ar = self.reals("ar", Some(order.p))?;
        let ma = self.reals("ma", Some(order.q))?;
        let in_sample_residuals = self.reals("residuals", None)?;
        Ok(ArimaModel {
            order,
            ar_stationary: ar_is_stationary(&ar),
            ar,
            ma,
            intercept,
            center,
            sigma2,
            in_sample_residuals,
            n_obs,
        })
    }

    fn scale(&mut self) -> Result<ScaleParams> {
        let v = self.reals("scale", Some(4))?;
        ScaleParams::new(v[0], v[1], v[2], v[3]).map_err(|e| CliError::format(self.path, e.to_string()))
    }

    fn network(&mut self) -> Result<LstmNetwork> {
        let dims = self.ints("dims", 3)?;
        let (input, hidden, layers) = (dims[0], dims[1], dims[2]);
        let mut net = LstmNetwork::zeros(input, hidden, layers).map_err(|e| CliError::format(self.path, e.to_string()))?;
        for l in 0..layers {
            let cell: &LstmCellParams = &net.layers[l];
            let (rows, k) = (4 * cell.hidden_dim, cell.concat_dim());
            let shape = self.ints(&format!("layer {l} weights"), 2)?;
            if shape != [rows, k] {
                return Err(CliError::format(self.path, format!("layer {l} must be {rows} x {k}")));
            }
            let mut weights = Vec::with_capacity(rows * k);
            for _ in 0..rows {
                weights.extend(self.row(k)?);
            }
            let bias = self.reals(&format!("layer {l} bias"), Some(rows))?;
            net.layers[l].weights = weights;
            net.layers[l].bias = bias;
        }
        net.head = OutputHead {
            weights: self.reals("head weights", Some(hidden))?,
            bias: self.reals("head bias", Some(1))?[0],
        };
        net.validate().map_err(|e| CliError::format(self.path, e.to_string()))?;
        Ok(net)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn parse_arima(path: &Path, text: &str) -> Result<ArimaModel> {
    let mut doc = Doc::new(path, text, "arima")?;
    let m = doc.arima_body()?;
    doc.finish()?;
    Ok(m)
}

pub fn parse_level_lstm(path: &Path, text: &str) -> Result<LevelLstmModel> {
    let mut doc = Doc::new(path, text, "lstm")?;
    let window_m = doc.ints("window", 1)?[0];
    let scale = doc.scale()?;
    let net = doc.network()?;
    doc.finish()?;
    Ok(LevelLstmModel { net, scale, window_m })
}

pub fn parse_hybrid(path: &Path, text: &str) -> Result<HybridModel> {
    let mut doc = Doc::new(path, text, "hybrid")?;
    let arima = doc.arima_body()?;
    let window_m = doc.ints("window", 1)?[0];
    let residual_scale = doc.scale()?;
    let residual_net = doc.network()?;
    doc.finish()?;
    Ok(HybridModel {
        arima,
        residual_net,
        residual_scale,
        window_m,
    })
}

pub fn read_arima(path: &Path) -> Result<ArimaModel> {
    parse_arima(path, &read(path)?)
}

pub fn read_level_lstm(path: &Path) -> Result<LevelLstmModel> {
    parse_level_lstm(path, &read(path)?)
}

pub fn read_hybrid(path: &Path) -> Result<HybridModel> {
    parse_hybrid(path, &read(path)?)
}
