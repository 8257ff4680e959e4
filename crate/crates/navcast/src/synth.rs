//! Seeded synthetic NAV series used as test fixtures and benchmarks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use navcast_core::TimeSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{CliError, Result};

pub const MIN_LENGTH: usize = 30;
const AR_BURN_IN: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    RandomWalk,
    Ar1,
    LinearPlusSine,
}

impl FromStr for SynthKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-walk" => Ok(SynthKind::RandomWalk),
            "ar1" => Ok(SynthKind::Ar1),
            "linear-plus-sine" => Ok(SynthKind::LinearPlusSine),
            other => Err(CliError::Usage(format!(
                "unknown series kind `{other}` (expected random-walk, ar1 or linear-plus-sine)"
            ))),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::RandomWalk => "random-walk",
            SynthKind::Ar1 => "ar1",
            SynthKind::LinearPlusSine => "linear-plus-sine",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// First value (random walks) or process mean (ar1).
    pub level: f64,
    /// Innovation standard deviation.
    pub sigma: f64,
    /// Per-step drift of the random walk.
    pub drift: f64,
    pub phi: f64,
    pub amplitude: f64,
    pub period: f64,
}

impl Default for SynthParams {
    /// The linear-plus-sine benchmark regime.
    fn default() -> Self {
        Self {
            level: 3.0,
            sigma: 0.001,
            drift: 0.0,
            phi: 0.6,
            amplitude: 0.5,
            period: 50.0,
        }
    }
}

/// Weekday dates starting at the first weekday on or after 2015-01-05.
pub fn business_days(n: usize) -> Vec<NaiveDate> {
    let mut day = NaiveDate::from_ymd_opt(2015, 1, 5).expect("valid literal date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(day);
        }
        day = day + Days::new(1);
    }
    out
}

pub fn generate(kind: SynthKind, n: usize, params: &SynthParams, seed: u64) -> Result<TimeSeries> {
    if n < MIN_LENGTH {
        return Err(CliError::Usage(format!("synthetic series need at least {MIN_LENGTH} points, got {n}")));
    }
    let p = params;
    let finite = [p.level, p.sigma, p.drift, p.phi, p.amplitude, p.period].iter().all(|v| v.is_finite());
    if !finite || p.sigma < 0.0 {
        return Err(CliError::Usage("synthetic parameters must be finite with sigma >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, p.sigma).expect("sigma validated");
    let walk = |rng: &mut ChaCha8Rng| {
        let mut level = p.level;
        (0..n)
            .map(|t| {
                if t > 0 {
                    level += p.drift + noise.sample(rng);
                }
                level
            })
            .collect::<Vec<f64>>()
    };
    let values = match kind {
        SynthKind::RandomWalk => walk(&mut rng),
        SynthKind::LinearPlusSine => {
            if p.period <= 0.0 {
                return Err(CliError::Usage("period must be positive".into()));
            }
            let base = walk(&mut rng);
            base.iter()
                .enumerate()
                .map(|(t, b)| b + p.amplitude * (2.0 * PI * t as f64 / p.period).sin())
                .collect()
        }
        SynthKind::Ar1 => {
            if p.phi.abs() >= 1.0 {
                return Err(CliError::Usage(format!("ar1 needs |phi| < 1, got {}", p.phi)));
            }
            let mut x = 0.0;
            for _ in 0..AR_BURN_IN {
                x = p.phi * x + noise.sample(&mut rng);
            }
            (0..n)
                .map(|_| {
                    x = p.phi * x + noise.sample(&mut rng);
                    p.level + x
                })
                .collect()
        }
    };
    if let Some(t) = values.iter().position(|v| *v <= 0.0) {
        return Err(CliError::Usage(format!(
            "synthetic NAV reached {} at index {t}; raise the level or lower sigma",
            values[t]
        )));
    }
    TimeSeries::new(kind.to_string(), business_days(n), values).map_err(|e| CliError::Usage(e.to_string()))
}
