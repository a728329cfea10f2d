//! Machine-readable tables of residual checks.

use serde::{Deserialize, Serialize};

pub const AXIOM_REPORT_SCHEMA: &str = "torus-bundle/axiom-report/v1";

/// One checked identity. `anchor` is the identity in formula form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub skipped: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub rows: Vec<CheckRow>,
}

impl AxiomReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a residual that must stay below `tolerance`.
    pub fn push(&mut self, check: &str, anchor: &str, residual: f64, tolerance: f64) {
        self.rows.push(CheckRow {
            check: check.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            pass: residual < tolerance,
            skipped: false,
        });
    }

    /// Records a check whose expected outcome is a violation: it passes when
    /// the residual exceeds `tolerance`.
    pub fn push_violation(&mut self, check: &str, anchor: &str, residual: f64, tolerance: f64) {
        self.rows.push(CheckRow {
            check: check.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            pass: residual > tolerance,
            skipped: false,
        });
    }

    /// Records a check with no columns to evaluate on (empty interior).
    pub fn skip(&mut self, check: &str, anchor: &str, tolerance: f64) {
        self.rows.push(CheckRow {
            check: check.into(),
            anchor: anchor.into(),
            residual: 0.0,
            tolerance,
            pass: true,
            skipped: true,
        });
    }

    /// Pushes `residual` if present, else a skipped row.
    pub fn push_opt(&mut self, check: &str, anchor: &str, residual: Option<f64>, tolerance: f64) {
        match residual {
            Some(r) => self.push(check, anchor, r, tolerance),
            None => self.skip(check, anchor, tolerance),
        }
    }

    pub fn extend(&mut self, other: AxiomReport) {
        self.rows.extend(other.rows);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn row(&self, check: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.check == check)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": AXIOM_REPORT_SCHEMA,
            "pass": self.all_pass(),
            "rows": self.rows,
        })
    }
}
