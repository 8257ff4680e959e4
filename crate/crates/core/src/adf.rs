//! Augmented Dickey–Fuller unit-root test, constant and no trend.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::math::{floor, ln, powf};

/// Asymptotic critical values for the constant-only regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValues {
    pub one_pct: f64,
    pub five_pct: f64,
    pub ten_pct: f64,
}

impl CriticalValues {
    pub const CONSTANT_ONLY: CriticalValues = CriticalValues {
        one_pct: -3.43,
        five_pct: -2.86,
        ten_pct: -2.57,
    };

    /// Looks up a level among 0.01, 0.05 and 0.10.
    pub fn get(&self, level: f64) -> Option<f64> {
        [(0.01, self.one_pct), (0.05, self.five_pct), (0.10, self.ten_pct)]
            .into_iter()
            .find(|(l, _)| (l - level).abs() < 1e-12)
            .map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfResult {
    /// t-ratio of the lagged level coefficient.
    pub statistic: f64,
    pub lag_used: usize,
    pub nobs: usize,
    pub critical_values: CriticalValues,
    pub is_stationary_5pct: bool,
}

pub const MIN_ADF_LENGTH: usize = 20;

/// Schwert's rule `floor(12 (n/100)^(1/4))`.
pub fn default_max_lag(n: usize) -> usize {
    floor(12.0 * powf(n as f64 / 100.0, 0.25)) as usize
}

/// Regression `dy_t = c + gamma y_{t-1} + sum_i beta_i dy_{t-i} + e_t`; the lag
/// order minimizes AIC over `0..=max_lag` on a common sample, then the chosen
/// lag is refit on its full sample.
pub fn adf_test(values: &[f64], max_lag: Option<usize>) -> Result<AdfResult> {
    let n = values.len();
    if n < MIN_ADF_LENGTH {
        return Err(Error::degenerate(format!(
            "ADF test needs at least {MIN_ADF_LENGTH} observations, got {n}"
        )));
    }
    let dy: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    // keep at least ~ (lags + 2) * 2 + 10 rows in the common sample
    let cap = (n.saturating_sub(12)) / 3;
    let max_lag = max_lag.unwrap_or_else(|| default_max_lag(n)).min(cap);

    let mut best: Option<(f64, usize)> = None;
    for k in 0..=max_lag {
        let fit = regress(values, &dy, k, max_lag + 1)?;
        let nobs = fit.nobs() as f64;
        let aic = nobs * ln(fit.rss / nobs) + 2.0 * (k + 2) as f64;
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, k));
        }
    }
    let (_, lag) = best.expect("at least lag 0 evaluated");
    let fit = regress(values, &dy, lag, lag + 1)?;
    let statistic = fit.coef[1] / fit.std_error(1);
    if !statistic.is_finite() {
        return Err(Error::numerical("ADF statistic is not finite"));
    }
    let critical_values = CriticalValues::CONSTANT_ONLY;
    Ok(AdfResult {
        statistic,
        lag_used: lag,
        nobs: fit.nobs(),
        critical_values,
        is_stationary_5pct: statistic < critical_values.five_pct,
    })
}

/// OLS of `dy[j-1]` (difference ending at `values[j]`) on
/// `[1, values[j-1], dy[j-2], .., dy[j-1-lags]]` for `j >= first`.
fn regress(values: &[f64], dy: &[f64], lags: usize, first: usize) -> Result<crate::linalg::OlsFit> {
    let n = values.len();
    let ncols = lags + 2;
    let rows = n - first;
    let mut design = Vec::with_capacity(rows * ncols);
    let mut y = Vec::with_capacity(rows);
    for j in first..n {
        design.push(1.0);
        design.push(values[j - 1]);
        for i in 1..=lags {
            design.push(dy[j - 1 - i]);
        }
        y.push(dy[j - 1]);
    }
    ols(&design, ncols, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn walk(n: usize, seed: u64) -> Vec<f64> {
        noise(n, seed)
            .into_iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect()
    }

    #[test]
    fn critical_values_ordered() {
        let c = CriticalValues::CONSTANT_ONLY;
        assert!(c.one_pct < c.five_pct && c.five_pct < c.ten_pct);
        assert_eq!(c.get(0.05), Some(-2.86));
        assert_eq!(c.get(0.2), None);
    }

    #[test]
    fn schwert_bound() {
        assert_eq!(default_max_lag(100), 12);
        assert_eq!(default_max_lag(1000), 21);
    }

    #[test]
    fn verdict_consistent_with_statistic() {
        for seed in 0..5 {
            let r = adf_test(&walk(300, seed), None).unwrap();
            assert_eq!(r.is_stationary_5pct, r.statistic < r.critical_values.five_pct);
        }
    }

    #[test]
    fn white_noise_is_stationary_random_walk_is_not() {
        let mut wn = 0;
        let mut rw = 0;
        for seed in 0..20 {
            wn += adf_test(&noise(1000, seed), None).unwrap().is_stationary_5pct as usize;
            rw += !adf_test(&walk(1000, 100 + seed), None).unwrap().is_stationary_5pct as usize;
        }
        assert!(wn >= 19, "{wn}/20");
        assert!(rw >= 17, "{rw}/20");
    }

    #[test]
    fn differenced_walk_is_stationary() {
        let w = walk(1000, 5);
        let d: Vec<f64> = w.windows(2).map(|p| p[1] - p[0]).collect();
        assert!(adf_test(&d, None).unwrap().is_stationary_5pct);
    }

    #[test]
    fn mean_reversion_keeps_stationary_verdict() {
        // appending a strongly mean-reverting AR(1) segment never flips a stationary verdict
        for seed in 0..5 {
            let base = noise(400, 40 + seed);
            let before = adf_test(&base, None).unwrap();
            assert!(before.is_stationary_5pct);
            let mut rng = ChaCha8Rng::seed_from_u64(90 + seed);
            let mut extended = base.clone();
            let mut x = *base.last().unwrap();
            for _ in 0..200 {
                let e: f64 = StandardNormal.sample(&mut rng);
                x = 0.2 * x + e;
                extended.push(x);
            }
            assert!(adf_test(&extended, None).unwrap().is_stationary_5pct);
        }
    }

    #[test]
    fn short_and_constant_input() {
        assert!(matches!(adf_test(&[1.0; 10], None), Err(Error::DegenerateInput(_))));
        assert!(adf_test(&[3.0; 50], None).is_err());
    }
}
