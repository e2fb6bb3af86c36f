//! Check reports and convergence-slope fits.

use std::time::Duration;

use serde::Serialize;

/// What an entry contributes to the overall verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `pass` iff `residual <= tolerance`.
    Bound,
    /// `pass` iff `residual >= tolerance`; used for negative controls.
    AtLeast,
    /// Recorded for reference only; always passes.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub kind: CheckKind,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckEntry {
    pub fn bound(id: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckEntry {
            id: id.into(),
            kind: CheckKind::Bound,
            residual,
            tolerance,
            pass: residual <= tolerance,
            detail: None,
        }
    }

    pub fn at_least(id: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckEntry {
            id: id.into(),
            kind: CheckKind::AtLeast,
            residual,
            tolerance,
            pass: residual >= tolerance,
            detail: None,
        }
    }

    pub fn info(id: impl Into<String>, residual: f64) -> Self {
        CheckEntry {
            id: id.into(),
            kind: CheckKind::Info,
            residual,
            tolerance: f64::NAN,
            pass: true,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// A log-log fit of residuals against grid sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeEntry {
    pub id: String,
    pub n_steps: Vec<usize>,
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl SlopeEntry {
    /// Fits `residual ~ C N^-slope` and checks `|slope - expected| <= tolerance`.
    pub fn fit(
        id: impl Into<String>,
        n_steps: &[usize],
        residuals: &[f64],
        expected: f64,
        tolerance: f64,
    ) -> Self {
        let slope = fit_slope(n_steps, residuals);
        SlopeEntry {
            id: id.into(),
            n_steps: n_steps.to_vec(),
            residuals: residuals.to_vec(),
            slope,
            expected,
            tolerance,
            pass: (slope - expected).abs() <= tolerance,
        }
    }
}

/// Least-squares slope of `-log r` against `log N`. Returns NaN with fewer
/// than two usable points.
pub fn fit_slope(n_steps: &[usize], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = n_steps
        .iter()
        .zip(residuals)
        .filter(|(n, r)| **n > 0 && **r > 0.0 && r.is_finite())
        .map(|(n, r)| ((*n as f64).ln(), -r.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// The outcome of one suite. The wall time is kept out of the JSON so that
/// reports are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub fixture: String,
    pub seed: u64,
    pub n_steps: usize,
    pub pass: bool,
    pub entries: Vec<CheckEntry>,
    pub slopes: Vec<SlopeEntry>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    pub fn new(
        suite: impl Into<String>,
        fixture: impl Into<String>,
        seed: u64,
        n_steps: usize,
    ) -> Self {
        Report {
            suite: suite.into(),
            fixture: fixture.into(),
            seed,
            n_steps,
            pass: true,
            entries: vec![],
            slopes: vec![],
            wall_time: Duration::ZERO,
        }
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.pass &= entry.pass;
        self.entries.push(entry);
    }

    pub fn push_slope(&mut self, slope: SlopeEntry) {
        self.pass &= slope.pass;
        self.slopes.push(slope);
    }

    pub fn entry(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn slope(&self, id: &str) -> Option<&SlopeEntry> {
        self.slopes.iter().find(|e| e.id == id)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| !e.pass)
            .map(|e| e.id.as_str())
            .chain(
                self.slopes
                    .iter()
                    .filter(|s| !s.pass)
                    .map(|s| s.id.as_str()),
            )
            .collect()
    }

    /// Pretty JSON with fields in declaration order. Non-finite numbers
    /// become `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
