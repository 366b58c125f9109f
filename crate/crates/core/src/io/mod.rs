//! Trace ingestion and emission.
//!
//! Supported inputs:
//! - delimited text (`.csv`, `.tsv`, `.txt`) with a `frequency_hz,re_s21,im_s21` header,
//! - Touchstone two-port files (`.s2p`) in RI, MA or DB format,
//! - the native JSON trace archive (`.json`).
//!
//! Text and Touchstone files take their measurement context from a sidecar
//! `<file>.meta.json` when present, falling back to caller-supplied defaults.
//! Power is dBm at the resonator input, after all attenuation.

pub mod text;
pub mod touchstone;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use text::{read_text_trace, write_text_trace};
pub use touchstone::{read_touchstone, write_touchstone, DataFormat, FrequencyUnit};

use crate::circle::ResonanceTrace;
use crate::error::IoError;
use crate::physics::MeasurementContext;

pub const ARCHIVE_FORMAT: &str = "resloss-trace-archive";
pub const ARCHIVE_VERSION: u32 = 1;
pub const SIDECAR_SUFFIX: &str = ".meta.json";

/// Samples accumulated by a parser, validated as they arrive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTrace {
    pub freqs: Vec<f64>,
    pub s21: Vec<Complex64>,
}

impl RawTrace {
    pub(crate) fn push(
        &mut self,
        path: &Path,
        line: usize,
        f: f64,
        z: Complex64,
    ) -> Result<(), IoError> {
        if !f.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
            return Err(IoError::NanSample {
                path: path.into(),
                line,
            });
        }
        if let Some(&last) = self.freqs.last() {
            if f <= last {
                return Err(IoError::NonMonotoneFrequency {
                    path: path.into(),
                    line,
                });
            }
        }
        self.freqs.push(f);
        self.s21.push(z);
        Ok(())
    }
}

/// Measurement metadata carried next to a trace file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_app_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonator_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_id: Option<String>,
}

impl TraceMetadata {
    /// Fields of `self`, with gaps filled from `fallback`.
    pub fn or(&self, fallback: &TraceMetadata) -> TraceMetadata {
        TraceMetadata {
            p_app_dbm: self.p_app_dbm.or(fallback.p_app_dbm),
            temperature_k: self.temperature_k.or(fallback.temperature_k),
            resonator_id: self
                .resonator_id
                .clone()
                .or_else(|| fallback.resonator_id.clone()),
            sample_id: self
                .sample_id
                .clone()
                .or_else(|| fallback.sample_id.clone()),
        }
    }
}

/// A trace with the identifiers used to group it into sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTrace {
    pub sample_id: String,
    pub resonator_id: String,
    pub trace: ResonanceTrace,
}

/// Native archive of labeled traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceArchive {
    pub format: String,
    pub version: u32,
    pub traces: Vec<LabeledTrace>,
}

impl TraceArchive {
    pub fn new(traces: Vec<LabeledTrace>) -> Self {
        Self {
            format: ARCHIVE_FORMAT.into(),
            version: ARCHIVE_VERSION,
            traces,
        }
    }
}

/// Recognized trace file kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Text,
    Touchstone,
    Archive,
}

impl TraceFormat {
    pub fn detect(path: &Path) -> Result<Self, IoError> {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.ends_with(SIDECAR_SUFFIX) {
            return Err(IoError::UnknownFormat { path: path.into() });
        }
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("csv" | "tsv" | "txt") => Ok(TraceFormat::Text),
            Some("s2p") => Ok(TraceFormat::Touchstone),
            Some("json") => Ok(TraceFormat::Archive),
            _ => Err(IoError::UnknownFormat { path: path.into() }),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(SIDECAR_SUFFIX);
    PathBuf::from(name)
}

fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| IoError::os(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let data = fs::read(path).map_err(|e| IoError::os(path, e))?;
    serde_json::from_slice(&data).map_err(|e| IoError::Parse {
        path: path.into(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| IoError::Schema {
        path: path.into(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| IoError::os(path, e))
}

pub fn read_sidecar(path: &Path) -> Result<Option<TraceMetadata>, IoError> {
    let side = sidecar_path(path);
    if side.exists() {
        read_json(&side).map(Some)
    } else {
        Ok(None)
    }
}

pub fn write_sidecar(path: &Path, meta: &TraceMetadata) -> Result<(), IoError> {
    write_json(&sidecar_path(path), meta)
}

fn default_ids(path: &Path) -> TraceMetadata {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string);
    let parent = path
        .parent()
        .and_then(|p| p.file_name())
        .and_then(|s| s.to_str())
        .map(str::to_string);
    TraceMetadata {
        resonator_id: stem,
        sample_id: parent,
        ..Default::default()
    }
}

fn label(path: &Path, raw: RawTrace, meta: TraceMetadata) -> Result<LabeledTrace, IoError> {
    let schema = |message: String| IoError::Schema {
        path: path.into(),
        message,
    };
    let p_dbm = meta
        .p_app_dbm
        .ok_or_else(|| schema("no applied power (sidecar p_app_dbm or default)".into()))?;
    let temp = meta
        .temperature_k
        .ok_or_else(|| schema("no temperature (sidecar temperature_k or default)".into()))?;
    let context = MeasurementContext::from_dbm(p_dbm, temp).map_err(|e| schema(e.to_string()))?;
    let trace =
        ResonanceTrace::new(raw.freqs, raw.s21, context).map_err(|e| schema(e.to_string()))?;
    Ok(LabeledTrace {
        sample_id: meta.sample_id.unwrap_or_else(|| "sample".into()),
        resonator_id: meta.resonator_id.unwrap_or_else(|| "resonator".into()),
        trace,
    })
}

/// Reads one trace file. `defaults` fills metadata missing from the sidecar.
pub fn ingest_trace_file(
    path: &Path,
    defaults: &TraceMetadata,
) -> Result<Vec<LabeledTrace>, IoError> {
    let format = TraceFormat::detect(path)?;
    if format == TraceFormat::Archive {
        return read_archive(path).map(|a| a.traces);
    }
    let raw = match format {
        TraceFormat::Text => read_text_trace(path, open(path)?)?,
        TraceFormat::Touchstone => read_touchstone(path, open(path)?)?,
        TraceFormat::Archive => unreachable!(),
    };
    let meta = read_sidecar(path)?
        .unwrap_or_default()
        .or(defaults)
        .or(&default_ids(path));
    Ok(vec![label(path, raw, meta)?])
}

pub fn read_archive(path: &Path) -> Result<TraceArchive, IoError> {
    let archive: TraceArchive = read_json(path)?;
    if archive.format != ARCHIVE_FORMAT {
        return Err(IoError::Schema {
            path: path.into(),
            message: format!("format `{}` is not a trace archive", archive.format),
        });
    }
    if archive.version != ARCHIVE_VERSION {
        return Err(IoError::Schema {
            path: path.into(),
            message: format!(
                "archive version {} unsupported (expected {ARCHIVE_VERSION})",
                archive.version
            ),
        });
    }
    for t in &archive.traces {
        t.trace.validate().map_err(|e| IoError::Schema {
            path: path.into(),
            message: e.to_string(),
        })?;
    }
    Ok(archive)
}

pub fn write_archive(path: &Path, archive: &TraceArchive) -> Result<(), IoError> {
    write_json(path, archive)
}

/// Writes a labeled trace as text plus sidecar.
pub fn write_text_with_sidecar(path: &Path, trace: &LabeledTrace) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::os(path, e))?;
    let mut w = BufWriter::new(file);
    write_text_trace(&mut w, &trace.trace.freqs, &trace.trace.s21)
        .and_then(|_| w.flush())
        .map_err(|e| IoError::os(path, e))?;
    write_sidecar(
        path,
        &TraceMetadata {
            p_app_dbm: Some(trace.trace.context.p_app_dbm()),
            temperature_k: Some(trace.trace.context.temperature),
            resonator_id: Some(trace.resonator_id.clone()),
            sample_id: Some(trace.sample_id.clone()),
        },
    )
}

/// Expands glob patterns (or plain paths) into a sorted, de-duplicated list
/// of trace files. Sidecars are skipped.
pub fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>, IoError> {
    let mut out = Vec::new();
    for pattern in patterns {
        let paths = glob::glob(pattern).map_err(|e| IoError::Schema {
            path: pattern.into(),
            message: format!("bad glob: {e}"),
        })?;
        for entry in paths {
            let p = entry.map_err(|e| IoError::os(e.path().to_path_buf(), e.into()))?;
            let is_sidecar = p.to_str().is_some_and(|s| s.ends_with(SIDECAR_SUFFIX));
            if p.is_file() && !is_sidecar {
                out.push(p);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

pub(crate) fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_json(path, value)
}

pub(crate) fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    read_json(path)
}
