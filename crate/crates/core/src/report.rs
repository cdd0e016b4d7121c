//! Run reports and their human, structured (JSON) and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Bumped whenever a field of the structured output changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            verdict: Verdict::from_bool(ok),
            residual: None,
            values: BTreeMap::new(),
            detail: None,
        }
    }

    /// Passes iff `residual ≤ tolerance`.
    pub fn residual(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            residual: Some(residual),
            ..Check::new(name, residual <= tolerance)
        }
    }

    pub fn value(mut self, key: &str, v: impl Serialize) -> Self {
        self.values.insert(
            key.to_owned(),
            serde_json::to_value(v).unwrap_or(Value::Null),
        );
        self
    }

    /// Records a residual without affecting the verdict.
    pub fn residual_value(mut self, r: f64) -> Self {
        self.residual = Some(r);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            verdict: Verdict::Pass,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        if !check.passed() {
            self.verdict = Verdict::Fail;
        }
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    /// 0 iff every check passed.
    pub fn exit_status(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Structured,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human" => Ok(Format::Human),
            "structured" | "json" => Ok(Format::Structured),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Argument(format!(
                "unknown format `{other}` (expected human, structured or csv)"
            ))),
        }
    }
}

fn flat_values(values: &BTreeMap<String, Value>) -> String {
    values
        .iter()
        .map(|(k, v)| match v {
            Value::String(s) => format!("{k}={s}"),
            other => format!("{k}={other}"),
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub fn emit_report(report: &RunReport, format: Format) -> Result<String> {
    match format {
        Format::Structured => {
            let mut s = serde_json::to_string(report)?;
            s.push('\n');
            Ok(s)
        }
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "# {}", report.command);
            for c in &report.checks {
                let mark = if c.passed() { "PASS" } else { "FAIL" };
                let _ = write!(out, "[{mark}] {}", c.name);
                if let Some(r) = c.residual {
                    let _ = write!(out, "  residual={r:e}");
                }
                if !c.values.is_empty() {
                    let _ = write!(out, "  {}", flat_values(&c.values).replace(';', "  "));
                }
                out.push('\n');
                if let Some(d) = &c.detail {
                    let _ = writeln!(out, "       {d}");
                }
            }
            let _ = writeln!(
                out,
                "-- {} checks, {} failed; exit status {}",
                report.checks.len(),
                report.failures(),
                report.exit_status()
            );
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Parse(e.to_string());
            w.write_record(["name", "verdict", "residual", "values", "detail"])
                .map_err(csv_err)?;
            for c in &report.checks {
                w.write_record([
                    c.name.as_str(),
                    c.verdict.as_str(),
                    &c.residual.map(|r| r.to_string()).unwrap_or_default(),
                    &flat_values(&c.values),
                    c.detail.as_deref().unwrap_or(""),
                ])
                .map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(ok: bool) -> RunReport {
        let mut r = RunReport::new("demo sample");
        r.push(Check::residual("first", 0.0, 1e-12).value("p", 0.5));
        r.push(Check::new("second", ok).detail("the second check"));
        r
    }

    #[test]
    fn structured_is_parseable_and_stable() {
        let s = emit_report(&sample(true), Format::Structured).unwrap();
        assert!(s.contains("\"verdict\":\"pass\""));
        assert!(s.contains("\"schema_version\":1"));
        let back: RunReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sample(true));
    }

    #[test]
    fn human_footer_reports_exit_status() {
        let s = emit_report(&sample(false), Format::Human).unwrap();
        assert!(s.contains("[FAIL] second"));
        assert!(s.trim_end().ends_with("1 failed; exit status 1"));
        assert_eq!(sample(false).exit_status(), 1);
        assert_eq!(sample(true).exit_status(), 0);
    }

    #[test]
    fn csv_has_header_then_one_row_per_check() {
        let s = emit_report(&sample(true), Format::Csv).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "name,verdict,residual,values,detail");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("first,pass,0,p=0.5"));
    }

    #[test]
    fn unknown_format_is_a_usage_error() {
        assert!("yaml".parse::<Format>().is_err());
    }
}
