//! Machine-readable reports.

use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use spectral_intervals::analysis::{Check, CheckStatus};
use spectral_intervals::spectrum::SpectralPoint;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub lambda: f64,
    pub dimension: usize,
    pub constant: bool,
    pub det_residual: f64,
    pub eig_residual: f64,
}

impl From<&SpectralPoint> for SpectrumRow {
    fn from(p: &SpectralPoint) -> Self {
        SpectrumRow {
            lambda: p.lambda,
            dimension: p.dimension,
            constant: p.constant,
            det_residual: p.det_residual,
            eig_residual: p.eig_residual,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub class: &'static str,
    pub exit_code: i32,
    pub message: String,
    /// Predicted bound reported by a guard.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// What a command produces before it is wrapped into a report.
#[derive(Debug, Default)]
pub struct Outcome {
    pub verdicts: Vec<Check>,
    pub spectrum: Vec<SpectrumRow>,
    pub result: Value,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub args: Vec<String>,
    pub inputs_digest: String,
    /// `pass` when no verdict failed, `fail` otherwise, `error` on abort.
    pub status: &'static str,
    pub verdicts: Vec<Check>,
    pub result: Value,
    pub spectrum: Vec<SpectrumRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, args: Vec<String>, inputs_digest: String) -> Self {
        Report {
            command: command.to_string(),
            args,
            inputs_digest,
            status: "pass",
            verdicts: Vec::new(),
            spectrum: Vec::new(),
            result: Value::Null,
            error: None,
            timing: Timing { elapsed_ms: 0.0 },
        }
    }

    /// Moves the outcome in and returns its CSV rendering, if any.
    pub fn fill(&mut self, out: Outcome) -> Option<String> {
        self.status = if out.verdicts.iter().any(|c| c.status == CheckStatus::Fail) { "fail" } else { "pass" };
        self.verdicts = out.verdicts;
        self.spectrum = out.spectrum;
        self.result = out.result;
        out.csv
    }

    pub fn fail(&mut self, e: &CliError) {
        self.status = "error";
        let estimate = match e {
            CliError::Core(spectral_intervals::Error::GuardExceeded { estimate, .. }) => Some(*estimate),
            _ => None,
        };
        self.error = Some(ErrorInfo { class: e.class(), exit_code: e.exit_code(), message: e.to_string(), estimate });
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.timing.elapsed_ms = elapsed.as_secs_f64() * 1e3;
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }
}

/// Renders rows as CSV with a header line.
pub fn csv_table<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r.as_ref()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn checks_csv(checks: &[Check]) -> String {
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            let status = serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            vec![c.name.to_string(), status, c.detail.clone()]
        })
        .collect();
    csv_table(&["name", "status", "detail"], &rows)
}
