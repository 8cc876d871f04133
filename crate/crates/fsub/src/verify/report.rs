//! Report types, JSON and the per-sample CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::sample::SampleKind;
use super::{Tolerances, ToleranceClass};
use crate::metric::DiffMode;
use crate::zoo::Flags;

pub const SCHEMA: &str = "fsub-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// No sample applied, or the check does not apply to the fixture.
    Skipped,
    /// Reported only.
    Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub kind: SampleKind,
    pub drawn: usize,
    pub rejected: usize,
    pub degenerate: usize,
    /// Samples that hit the rejection limit.
    pub abandoned: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstSample {
    pub index: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub id: String,
    pub anchor: String,
    pub kind: SampleKind,
    pub class: ToleranceClass,
    pub tolerance: f64,
    pub count: usize,
    pub skipped: usize,
    pub errors: usize,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub worst: Option<WorstSample>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_error: Option<String>,
}

/// A fixture-level check that is not sampled pointwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub id: String,
    pub anchor: String,
    pub class: ToleranceClass,
    pub tolerance: f64,
    pub trials: usize,
    pub max: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub fixture: String,
    pub seed: u64,
    pub samples: usize,
    pub profile: DiffMode,
    pub tolerances: Tolerances,
    pub flags: Flags,
    pub sampling: Vec<SampleStats>,
    pub definition_invariants: Vec<GlobalResult>,
    pub identities: Vec<IdentityResult>,
    pub global: Vec<GlobalResult>,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Report> {
        serde_json::from_str(s)
    }

    pub fn identity(&self, id: &str) -> Option<&IdentityResult> {
        self.identities.iter().find(|r| r.id == id)
    }

    pub fn global(&self, id: &str) -> Option<&GlobalResult> {
        self.global.iter().find(|r| r.id == id)
    }

    /// Failed identity and global ids.
    pub fn failures(&self) -> Vec<&str> {
        self.identities
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| r.id.as_str())
            .chain(
                self.global
                    .iter()
                    .filter(|r| r.status == Status::Fail)
                    .map(|r| r.id.as_str()),
            )
            .collect()
    }
}

/// One residual of one identity at one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub identity: &'static str,
    pub kind: SampleKind,
    pub sample: usize,
    pub residual: f64,
}

pub fn write_csv<W: Write>(rows: &[CsvRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "identity,kind,sample,residual")?;
    for r in rows {
        let kind = match r.kind {
            SampleKind::Any => "any",
            SampleKind::Vertical => "vertical",
            SampleKind::Horizontal => "horizontal",
        };
        writeln!(w, "{},{},{},{:e}", r.identity, kind, r.sample, r.residual)?;
    }
    Ok(())
}
