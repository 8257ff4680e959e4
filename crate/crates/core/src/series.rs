//! Univariate series, differencing and chronological splits.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

/// Ordered, dated, finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::config(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::degenerate("empty series"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::degenerate(format!("non-finite value at index {i}")));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::config(format!(
                "dates not strictly increasing at index {}: {} then {}",
                i + 1,
                dates[i],
                dates[i + 1]
            )));
        }
        Ok(Self {
            name: name.into(),
            dates,
            values,
        })
    }

    /// Builds a series stamped with consecutive calendar days from `start`.
    pub fn from_values_starting(
        name: impl Into<String>,
        start: NaiveDate,
        values: Vec<f64>,
    ) -> Result<Self> {
        let dates = (0..values.len() as u64)
            .map(|i| {
                start
                    .checked_add_days(Days::new(i))
                    .ok_or_else(|| Error::config("date range overflow"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, dates, values)
    }

    /// Consecutive daily stamps from 2000-01-01.
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid literal date");
        Self::from_values_starting(name, start, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn slice(&self, range: Range<usize>) -> TimeSeries {
        TimeSeries {
            name: self.name.clone(),
            dates: self.dates[range.clone()].to_vec(),
            values: self.values[range].to_vec(),
        }
    }
}

/// Read access to an observation sequence.
///
/// Evaluation code reads history only through this trait and announces the
/// first index it is *not* allowed to see before each read phase, so a
/// wrapper can audit look-ahead.
pub trait Observations {
    fn len(&self) -> usize;

    fn value(&self, index: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Some(end)`: subsequent reads should stay below `end`.
    /// `None`: the reader is done predicting and may inspect realized values.
    fn declare_horizon(&self, _end: Option<usize>) {}

    fn read_range(&self, range: Range<usize>) -> Vec<f64> {
        range.map(|i| self.value(i)).collect()
    }
}

impl Observations for TimeSeries {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn value(&self, index: usize) -> f64 {
        self.values[index]
    }
}

impl Observations for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }

    fn value(&self, index: usize) -> f64 {
        self[index]
    }
}

impl Observations for Vec<f64> {
    fn len(&self) -> usize {
        Vec::len(self)
    }

    fn value(&self, index: usize) -> f64 {
        self[index]
    }
}

/// A `d`-times differenced series plus the leading source values needed to undo it.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferencedSeries {
    pub values: Vec<f64>,
    pub order_d: usize,
    pub anchors: Vec<f64>,
}

pub fn difference(values: &[f64], d: usize) -> Result<DifferencedSeries> {
    if values.len() <= d {
        return Err(Error::degenerate(format!(
            "cannot difference {} values {d} times",
            values.len()
        )));
    }
    let mut current = values.to_vec();
    for _ in 0..d {
        current = current.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(DifferencedSeries {
        values: current,
        order_d: d,
        anchors: values[..d].to_vec(),
    })
}

/// Exact left inverse of [`difference`].
pub fn integrate(diff: &DifferencedSeries) -> Result<Vec<f64>> {
    let d = diff.order_d;
    if diff.anchors.len() != d {
        return Err(Error::InvalidState(format!(
            "order {d} needs {d} anchors, found {}",
            diff.anchors.len()
        )));
    }
    // heads[k] = first element of the k-th difference of the anchors
    let mut heads = Vec::with_capacity(d);
    let mut level = diff.anchors.clone();
    for _ in 0..d {
        heads.push(level[0]);
        level = level.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let mut current = diff.values.clone();
    for head in heads.into_iter().rev() {
        let mut next = Vec::with_capacity(current.len() + 1);
        let mut acc = head;
        next.push(acc);
        for v in &current {
            acc += v;
            next.push(acc);
        }
        current = next;
    }
    Ok(current)
}

/// Train / validation / test lengths of a chronological split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitSpec {
    /// 900 / 100 / 260 of a 1260-day series.
    pub const REFERENCE: SplitSpec = SplitSpec {
        train: 900,
        val: 100,
        test: 260,
    };

    pub fn new(train: usize, val: usize, test: usize) -> Result<Self> {
        if train == 0 || val == 0 || test == 0 {
            return Err(Error::config(format!(
                "split lengths must be positive, got {train},{val},{test}"
            )));
        }
        Ok(Self { train, val, test })
    }

    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }

    pub fn test_start(&self) -> usize {
        self.train + self.val
    }

    /// Rescales the reference 900:100:260 ratio to `n` points using the
    /// largest-remainder rule so the parts sum to `n` exactly.
    pub fn proportional(n: usize) -> Result<Self> {
        let r = Self::REFERENCE;
        let parts = [r.train, r.val, r.test];
        let total = r.total();
        let mut floors = [0usize; 3];
        let mut rems = [(0usize, 0usize); 3];
        for (i, &p) in parts.iter().enumerate() {
            let scaled = p * n;
            floors[i] = scaled / total;
            rems[i] = (scaled % total, i);
        }
        let mut left = n - floors.iter().sum::<usize>();
        // largest remainder first; earlier segment wins ties
        rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in rems.iter() {
            if left == 0 {
                break;
            }
            floors[i] += 1;
            left -= 1;
        }
        Self::new(floors[0], floors[1], floors[2])
    }
}

/// Splits into contiguous (train, validation, test) segments.
pub fn split(series: &TimeSeries, spec: SplitSpec) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    if spec.total() != series.len() {
        return Err(Error::config(format!(
            "split {}+{}+{} = {} does not match series length {}",
            spec.train,
            spec.val,
            spec.test,
            spec.total(),
            series.len()
        )));
    }
    let a = spec.train;
    let b = a + spec.val;
    Ok((
        series.slice(0..a),
        series.slice(a..b),
        series.slice(b..series.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn first_and_second_differences() {
        assert_eq!(difference(&[1.0, 1.0, 1.0, 1.0], 1).unwrap().values, vec![0.0; 3]);
        assert_eq!(difference(&[1.0, 2.0, 4.0, 7.0], 1).unwrap().values, vec![1.0, 2.0, 3.0]);
        let d2 = difference(&[1.0, 2.0, 4.0, 7.0], 2).unwrap();
        assert_eq!(d2.values, vec![1.0, 1.0]);
        assert_eq!(d2.anchors, vec![1.0, 2.0]);
    }

    #[test]
    fn difference_rejects_short_input() {
        assert!(matches!(difference(&[1.0, 2.0], 2), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn integrate_examples() {
        let d = DifferencedSeries { values: vec![0.0; 3], order_d: 1, anchors: vec![1.0] };
        assert_eq!(integrate(&d).unwrap(), vec![1.0; 4]);
        let d = DifferencedSeries { values: vec![1.0, 2.0, 3.0], order_d: 1, anchors: vec![1.0] };
        assert_eq!(integrate(&d).unwrap(), vec![1.0, 2.0, 4.0, 7.0]);
        let d = DifferencedSeries { values: vec![1.0, 1.0], order_d: 2, anchors: vec![1.0, 2.0] };
        assert_eq!(integrate(&d).unwrap(), vec![1.0, 2.0, 4.0, 7.0]);
    }

    #[test]
    fn integrate_missing_anchors() {
        let d = DifferencedSeries { values: vec![1.0], order_d: 2, anchors: vec![1.0] };
        assert!(matches!(integrate(&d), Err(Error::InvalidState(_))));
    }

    #[test]
    fn zero_order_difference_is_identity() {
        let d = difference(&[3.0, 1.0], 0).unwrap();
        assert_eq!(d.values, vec![3.0, 1.0]);
        assert_eq!(integrate(&d).unwrap(), vec![3.0, 1.0]);
    }

    #[test]
    fn reference_split_sizes() {
        let s = TimeSeries::from_values("x", (0..1260).map(|i| i as f64).collect()).unwrap();
        let (tr, va, te) = split(&s, SplitSpec::REFERENCE).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (900, 100, 260));
        assert_eq!(SplitSpec::proportional(1260).unwrap(), SplitSpec::REFERENCE);
    }

    #[test]
    fn small_split_and_mismatch() {
        let s = TimeSeries::from_values("x", (0..10).map(|i| i as f64).collect()).unwrap();
        let (_, _, te) = split(&s, SplitSpec::new(8, 1, 1).unwrap()).unwrap();
        assert_eq!(te.values(), &[9.0]);
        let err = split(&s, SplitSpec::new(5, 5, 5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn series_validation() {
        assert!(TimeSeries::from_values("x", vec![1.0, f64::NAN]).is_err());
        let d = NaiveDate::from_ymd_opt(2021, 7, 30).unwrap();
        assert!(TimeSeries::new("x", vec![d, d], vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new("x", vec![d], vec![1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn difference_round_trip(values in proptest::collection::vec(-1e3f64..1e3, 5..60), d in 0usize..=3) {
            let diff = difference(&values, d).unwrap();
            prop_assert_eq!(diff.values.len(), values.len() - d);
            let back = integrate(&diff).unwrap();
            for (a, b) in back.iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }

        #[test]
        fn proportional_split_partitions(n in 20usize..5000) {
            let s = SplitSpec::proportional(n).unwrap();
            prop_assert_eq!(s.total(), n);
            let exact = [900.0, 100.0, 260.0].map(|p| p * n as f64 / 1260.0);
            for (got, want) in [s.train, s.val, s.test].iter().zip(exact) {
                prop_assert!((*got as f64 - want).abs() < 1.0);
            }
        }

        #[test]
        fn split_is_partition(n in 3usize..200, a in 1usize..100, b in 1usize..100) {
            prop_assume!(a + b < n);
            let s = TimeSeries::from_values("x", (0..n).map(|i| i as f64).collect()).unwrap();
            let spec = SplitSpec::new(a, b, n - a - b).unwrap();
            let (x, y, z) = split(&s, spec).unwrap();
            let joined: Vec<f64> = x.values().iter().chain(y.values()).chain(z.values()).copied().collect();
            prop_assert_eq!(joined.as_slice(), s.values());
        }
    }
}
