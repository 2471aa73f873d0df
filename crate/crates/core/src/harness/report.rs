use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::value::RawValue;

use super::{Suite, SuiteReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "text" => Ok(Self::Text),
            _ => Err(Error::InvalidArgument("format must be json, csv or text")),
        }
    }
}

/// Six significant digits in scientific notation.
fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

fn raw(x: f64) -> Result<Box<RawValue>> {
    Ok(RawValue::from_string(sci(x))?)
}

#[derive(Serialize)]
struct JsonCheck<'a> {
    suite: Suite,
    name: &'a str,
    max_residual: Box<RawValue>,
    tolerance: Box<RawValue>,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    suite: Suite,
    seed: u64,
    samples: usize,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<Box<RawValue>>,
    checks: Vec<JsonCheck<'a>>,
}

fn to_json(r: &SuiteReport) -> Result<Vec<u8>> {
    let checks = r
        .checks
        .iter()
        .map(|c| {
            Ok(JsonCheck {
                suite: c.suite,
                name: &c.name,
                max_residual: raw(c.max_residual)?,
                tolerance: raw(c.tolerance)?,
                pass: c.pass,
                error: c.error.as_deref(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = JsonReport {
        suite: r.suite,
        seed: r.seed,
        samples: r.samples,
        pass: r.pass,
        wall_time_ms: r.wall_time_ms.map(raw).transpose()?,
        checks,
    };
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}

fn to_csv(r: &SuiteReport) -> String {
    let mut out = String::from("suite,check,max_residual,tolerance,pass\n");
    for c in &r.checks {
        let _ = writeln!(out, "{},{},{},{},{}", c.suite, c.name, sci(c.max_residual), sci(c.tolerance), c.pass);
    }
    out
}

fn to_text(r: &SuiteReport) -> String {
    let width = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "suite {}  seed {}  samples {}", r.suite, r.seed, r.samples);
    let _ = writeln!(out, "{:<19} {:<width$} {:>12} {:>12}  result", "suite", "check", "residual", "tolerance");
    for c in &r.checks {
        let verdict = match (&c.error, c.pass) {
            (Some(e), _) => format!("ERROR ({e})"),
            (None, true) => "ok".to_owned(),
            (None, false) => "FAIL".to_owned(),
        };
        let _ = writeln!(
            out,
            "{:<19} {:<width$} {:>12} {:>12}  {verdict}",
            c.suite.name(),
            c.name,
            sci(c.max_residual),
            sci(c.tolerance)
        );
    }
    let failed = r.failures().count();
    let _ = writeln!(out, "{} of {} checks passed", r.checks.len() - failed, r.checks.len());
    if let Some(ms) = r.wall_time_ms {
        let _ = writeln!(out, "wall time {ms:.1} ms");
    }
    out
}

pub fn emit_report(r: &SuiteReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => to_json(r),
        ReportFormat::Csv => Ok(to_csv(r).into_bytes()),
        ReportFormat::Text => Ok(to_text(r).into_bytes()),
    }
}

/// Parses a JSON report as produced by [`emit_report`].
pub fn parse_report(bytes: &[u8]) -> Result<SuiteReport> {
    Ok(serde_json::from_slice(bytes)?)
}

pub fn write_report(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::CheckOutcome;

    fn report(checks: Vec<CheckOutcome>) -> SuiteReport {
        SuiteReport { suite: Suite::GSpace, seed: 9, samples: 3, pass: checks.iter().all(|c| c.pass), wall_time_ms: None, checks }
    }

    fn outcome(name: &str, r: f64, pass: bool) -> CheckOutcome {
        CheckOutcome { suite: Suite::GSpace, name: name.into(), max_residual: r, tolerance: 1e-6, pass, error: None }
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(sci(1.234567891e-9), "1.23457e-9");
        assert_eq!(sci(0.0), "0.00000e0");
        assert!(serde_json::from_str::<f64>(&sci(f64::MAX)).unwrap().is_finite());
    }

    #[test]
    fn json_keys_in_order() {
        let s = String::from_utf8(emit_report(&report(vec![outcome("a", 1e-9, true)]), ReportFormat::Json).unwrap()).unwrap();
        let pos: Vec<usize> = ["\"suite\"", "\"seed\"", "\"samples\"", "\"pass\"", "\"checks\""].iter().map(|k| s.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(s.contains("\"max_residual\": 1.00000e-9"));
        assert!(!s.contains("error"));
        assert!(!s.contains("wall_time_ms"));
    }

    #[test]
    fn text_marks_failures() {
        let s = String::from_utf8(emit_report(&report(vec![outcome("a", 1.0, false)]), ReportFormat::Text).unwrap()).unwrap();
        assert!(s.contains("FAIL"));
        assert!(s.contains("0 of 1 checks passed"));
    }
}
