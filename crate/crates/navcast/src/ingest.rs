//! `date,nav` CSV files.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use navcast_core::TimeSeries;

use crate::error::{CliError, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Reads a `date,nav` file into a chronologically sorted series.
pub fn read_nav_csv(path: &Path) -> Result<TimeSeries> {
    let fail = |message: String| CliError::Ingest {
        path: path.to_path_buf(),
        message,
    };
    let file = File::open(path).map_err(|e| fail(format!("cannot open: {e}")))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| fail(format!("line 1: {e}")))?.clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "nav" {
        return Err(fail(format!("line 1: expected header `date,nav`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows: Vec<(NaiveDate, f64, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            fail(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(fail(format!("line {line}: expected 2 fields, found {}", record.len())));
        }
        let date = NaiveDate::parse_from_str(&record[0], DATE_FORMAT)
            .map_err(|e| fail(format!("line {line}: invalid date `{}`: {e}", &record[0])))?;
        let nav: f64 = record[1]
            .parse()
            .map_err(|_| fail(format!("line {line}: invalid nav `{}`", &record[1])))?;
        if !(nav.is_finite() && nav > 0.0) {
            return Err(fail(format!("line {line}: nav must be positive, got {nav}")));
        }
        rows.push((date, nav, line));
    }
    if rows.is_empty() {
        return Err(fail("no observations".into()));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        let (a, b) = (w[0].2.min(w[1].2), w[0].2.max(w[1].2));
        return Err(fail(format!("line {b}: duplicate date {} (first seen on line {a})", w[0].0)));
    }
    let name = path.file_stem().map_or_else(|| "series".into(), |s| s.to_string_lossy().into_owned());
    let (dates, values) = rows.into_iter().map(|(d, v, _)| (d, v)).unzip();
    TimeSeries::new(name, dates, values).map_err(|e| fail(e.to_string()))
}

/// Writes `series` as a `date,nav` file with round-trip precision.
pub fn write_nav_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut out = String::from("date,nav\n");
    for (d, v) in series.dates().iter().zip(series.values()) {
        out.push_str(&format!("{},{v}\n", d.format(DATE_FORMAT)));
    }
    File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
        let path = dir.path().join("nav.csv");
        std::fs::write(&path, text).unwrap();
        path
    }

    fn message(e: CliError) -> String {
        assert_eq!(e.exit_code(), CliError::EXIT_INGEST);
        e.to_string()
    }

    #[test]
    fn reads_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let s = read_nav_csv(&write(&dir, "date,nav\n2021-07-30,1.25\n2021-07-29,1.5\n")).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.values(), &[1.5, 1.25]);
        assert_eq!(s.name(), "nav");
    }

    #[test]
    fn reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let e = read_nav_csv(&write(&dir, "date,nav\n2021-07-30,abc\n")).unwrap_err();
        assert!(message(e).contains("line 2"));
        let e = read_nav_csv(&write(&dir, "date,nav\n2021-07-29,1\n2021-07-30,-1\n")).unwrap_err();
        assert!(message(e).contains("line 3"));
        let e = read_nav_csv(&write(&dir, "date,nav\n2021-07-29,1\n2021/07/30,1\n")).unwrap_err();
        assert!(message(e).contains("line 3"));
        let e = read_nav_csv(&write(&dir, "date,nav\n2021-07-29,1\n2021-07-30\n")).unwrap_err();
        assert!(message(e).contains("line 3"));
    }

    #[test]
    fn rejects_duplicates_header_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let e = read_nav_csv(&write(&dir, "date,nav\n2021-07-29,1\n2021-07-30,2\n2021-07-29,3\n")).unwrap_err();
        let m = message(e);
        assert!(m.contains("duplicate date 2021-07-29") && m.contains("line 4"), "{m}");
        assert!(message(read_nav_csv(&write(&dir, "day,value\n2021-07-29,1\n")).unwrap_err()).contains("header"));
        assert!(message(read_nav_csv(&write(&dir, "date,nav\n")).unwrap_err()).contains("no observations"));
        assert!(message(read_nav_csv(&write(&dir, "")).unwrap_err()).contains("header"));
        assert!(message(read_nav_csv(&dir.path().join("missing.csv")).unwrap_err()).contains("cannot open"));
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = TimeSeries::from_values("x", vec![1.0 / 3.0, 2.5, 1e-7, 123456.789]).unwrap();
        let path = dir.path().join("x.csv");
        write_nav_csv(&path, &s).unwrap();
        let back = read_nav_csv(&path).unwrap();
        assert_eq!(back.values(), s.values());
        assert_eq!(back.dates(), s.dates());
    }
}
