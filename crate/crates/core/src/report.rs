//! Machine-readable fit reports and their tabular rendering.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circle::CircleFitResult;
use crate::error::{IoError, Result};
use crate::io::{read_json_file, write_json_file};
use crate::sweep::{FitOutcome, SampleSummary, SweepDataset, SweepKind};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    /// SHA-256 of the canonical configuration, excluding output location and
    /// worker count.
    pub config_hash: String,
    /// Seconds since the Unix epoch; honours `SOURCE_DATE_EPOCH`.
    pub generated_unix: u64,
}

/// Circle fit of one trace, with the operating point it was taken at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFit {
    pub p_app_dbm: f64,
    pub temperature_k: f64,
    pub photon_number: f64,
    pub circle: CircleFitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorReport {
    pub sample_id: String,
    pub resonator_id: String,
    pub traces: Vec<TraceFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<SweepDataset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub sample_id: String,
    pub resonator_id: String,
    /// `circle` or `sweep`.
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub sweep: SweepKind,
    pub resonators: Vec<ResonatorReport>,
    pub samples: Vec<SampleSummary>,
    pub failures: Vec<FailureRecord>,
}

impl FitReport {
    pub fn all_converged(&self) -> bool {
        self.failures.is_empty()
            && self
                .resonators
                .iter()
                .all(|r| r.fit.as_ref().is_some_and(|f| f.converged()))
    }

    /// Pretty JSON with a trailing newline; the on-disk form.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        check_finite(self).map_err(|message| IoError::Schema {
            path: path.into(),
            message,
        })?;
        Ok(write_json_file(path, self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let report: FitReport = read_json_file(path)?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(IoError::Schema {
                path: path.into(),
                message: format!(
                    "report schema version {} unsupported (expected {REPORT_SCHEMA_VERSION})",
                    report.schema_version
                ),
            }
            .into());
        }
        Ok(report)
    }
}

/// Non-finite floats serialize as JSON null and would not load back.
fn check_finite(report: &FitReport) -> std::result::Result<(), String> {
    fn walk(v: &serde_json::Value, path: &mut String) -> std::result::Result<(), String> {
        match v {
            serde_json::Value::Null => Err(format!("non-finite value at {path}")),
            serde_json::Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    let len = path.len();
                    let _ = write!(path, "[{i}]");
                    walk(item, path)?;
                    path.truncate(len);
                }
                Ok(())
            }
            serde_json::Value::Object(map) => {
                for (k, item) in map {
                    let len = path.len();
                    let _ = write!(path, ".{k}");
                    walk(item, path)?;
                    path.truncate(len);
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
    let value = serde_json::to_value(report).map_err(|e| e.to_string())?;
    walk(&value, &mut String::from("$"))
}

fn scaled(value: f64, scale: f64) -> String {
    format!("{:.2}", value / scale)
}

fn pm(mean: f64, std: f64, scale: f64) -> String {
    format!("{} ± {}", scaled(mean, scale), scaled(std, scale))
}

/// Summary table with one row per sample. Loss tangents in units of 10⁻⁶,
/// quality factors in units of 10⁶. A trailing `*` marks samples where some
/// resonator's loss was still falling at the highest measured power.
pub fn emit_table(report: &FitReport) -> String {
    let header = [
        "Sample ID",
        "Fδ_TLS (×10⁻⁶)",
        "Q_i,max LP (×10⁶)",
        "Q̄_i LP (×10⁶)",
        "Q̄_i HP (×10⁶)",
    ];
    let rows: Vec<[String; 5]> = report
        .samples
        .iter()
        .map(|s| {
            let flag = if s.not_saturated.iter().any(|b| *b) {
                " *"
            } else {
                ""
            };
            [
                s.sample_id.clone(),
                pm(s.f_delta_tls0.mean, s.f_delta_tls0.std, 1e-6),
                scaled(s.q_i_lp_max, 1e6),
                pm(s.q_i_lp.mean, s.q_i_lp.std, 1e6),
                format!("{}{flag}", pm(s.q_i_hp.mean, s.q_i_hp.std, 1e6)),
            ]
        })
        .collect();
    let width = |k: usize| {
        rows.iter()
            .map(|r| r[k].chars().count())
            .chain(std::iter::once(header[k].chars().count()))
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..5).map(width).collect();
    let mut out = String::new();
    let line = |cells: &[&str], out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&header, &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(
        &rule.iter().map(String::as_str).collect::<Vec<_>>(),
        &mut out,
    );
    for r in &rows {
        line(&r.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
    }
    if rows.iter().any(|r| r[4].ends_with('*')) {
        out.push_str("* loss not saturated at the highest measured photon number\n");
    }
    out
}
