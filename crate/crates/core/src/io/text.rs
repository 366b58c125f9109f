//! Delimited text traces with a `frequency_hz,re_s21,im_s21` header.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::RawTrace;
use crate::error::IoError;

pub const COLUMNS: [&str; 3] = ["frequency_hz", "re_s21", "im_s21"];

fn delimiter_for(path: &Path, head: &str) -> u8 {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("tsv") => b'\t',
        Some("csv") => b',',
        _ => {
            let header = head
                .lines()
                .find(|l| !l.trim_start().starts_with('#'))
                .unwrap_or("");
            if header.contains('\t') && !header.contains(',') {
                b'\t'
            } else {
                b','
            }
        }
    }
}

/// Parses delimited text from `reader`; `path` is used for messages and
/// delimiter selection.
pub fn read_text_trace(path: &Path, mut reader: impl Read) -> Result<RawTrace, IoError> {
    let mut content = String::new();
    reader
        .read_to_string(&mut content)
        .map_err(|e| IoError::os(path, e))?;
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter_for(path, &content))
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(content.as_bytes());

    let headers = csv.headers().map_err(|e| IoError::Parse {
        path: path.into(),
        line: 1,
        message: e.to_string(),
    })?;
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| IoError::Schema {
                path: path.into(),
                message: format!(
                    "missing column `{name}` (header must name {})",
                    COLUMNS.join(", ")
                ),
            })
    };
    let idx = [col(COLUMNS[0])?, col(COLUMNS[1])?, col(COLUMNS[2])?];

    let mut trace = RawTrace::default();
    for record in csv.records() {
        let record = record.map_err(|e| IoError::Parse {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut values = [0.0; 3];
        for (v, &i) in values.iter_mut().zip(&idx) {
            let field = record.get(i).unwrap_or("");
            *v = field.parse::<f64>().map_err(|_| IoError::Parse {
                path: path.into(),
                line,
                message: format!("`{field}` is not a number"),
            })?;
        }
        trace.push(path, line, values[0], Complex64::new(values[1], values[2]))?;
    }
    Ok(trace)
}

/// Writes a trace as comma-separated text with full round-trip precision.
pub fn write_text_trace(
    mut out: impl Write,
    freqs: &[f64],
    s21: &[Complex64],
) -> std::io::Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    for (f, z) in freqs.iter().zip(s21) {
        writeln!(out, "{f:e},{:e},{:e}", z.re, z.im)?;
    }
    Ok(())
}
