//! Touchstone version 1 two-port files. Only S21 is kept.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::RawTrace;
use crate::error::IoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFormat {
    /// Real and imaginary parts.
    RI,
    /// Linear magnitude and angle in degrees.
    MA,
    /// Magnitude in dB and angle in degrees.
    DB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn scale(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }
}

impl fmt::Display for FrequencyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::KHz => "KHZ",
            FrequencyUnit::MHz => "MHZ",
            FrequencyUnit::GHz => "GHZ",
        })
    }
}

impl FromStr for FrequencyUnit {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_uppercase().as_str() {
            "HZ" => Ok(FrequencyUnit::Hz),
            "KHZ" => Ok(FrequencyUnit::KHz),
            "MHZ" => Ok(FrequencyUnit::MHz),
            "GHZ" => Ok(FrequencyUnit::GHz),
            _ => Err(()),
        }
    }
}

/// Parsed `#` option line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionLine {
    pub unit: FrequencyUnit,
    pub format: DataFormat,
    pub reference_ohms: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        Self {
            unit: FrequencyUnit::GHz,
            format: DataFormat::MA,
            reference_ohms: 50.0,
        }
    }
}

fn parse_option_line(path: &Path, line_no: usize, text: &str) -> Result<OptionLine, IoError> {
    let mut opts = OptionLine::default();
    let err = |message: String| IoError::Parse {
        path: path.into(),
        line: line_no,
        message,
    };
    let mut tokens = text.split_whitespace();
    while let Some(tok) = tokens.next() {
        let upper = tok.to_ascii_uppercase();
        match upper.as_str() {
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(err(format!(
                    "parameter type {tok} is not supported; only S"
                )))
            }
            "RI" => opts.format = DataFormat::RI,
            "MA" => opts.format = DataFormat::MA,
            "DB" => opts.format = DataFormat::DB,
            "R" => {
                let r = tokens
                    .next()
                    .ok_or_else(|| err("missing reference impedance".into()))?;
                opts.reference_ohms = r
                    .parse()
                    .map_err(|_| err(format!("bad reference impedance `{r}`")))?;
            }
            _ => {
                opts.unit = upper
                    .parse()
                    .map_err(|_| err(format!("unrecognized option `{tok}`")))?;
            }
        }
    }
    Ok(opts)
}

fn to_complex(format: DataFormat, a: f64, b: f64) -> Complex64 {
    match format {
        DataFormat::RI => Complex64::new(a, b),
        DataFormat::MA => Complex64::from_polar(a, b * PI / 180.0),
        DataFormat::DB => Complex64::from_polar(10f64.powf(a / 20.0), b * PI / 180.0),
    }
}

fn from_complex(format: DataFormat, z: Complex64) -> (f64, f64) {
    match format {
        DataFormat::RI => (z.re, z.im),
        DataFormat::MA => (z.norm(), z.arg() * 180.0 / PI),
        DataFormat::DB => (20.0 * z.norm().log10(), z.arg() * 180.0 / PI),
    }
}

/// Parses a two-port Touchstone file and returns its S21 column.
pub fn read_touchstone(path: &Path, mut reader: impl Read) -> Result<RawTrace, IoError> {
    let mut content = String::new();
    reader
        .read_to_string(&mut content)
        .map_err(|e| IoError::os(path, e))?;
    let mut opts: Option<OptionLine> = None;
    let mut trace = RawTrace::default();
    // Two-port records hold nine numbers and may wrap across lines.
    let mut pending: Vec<f64> = Vec::with_capacity(9);
    let mut record_line = 0;

    for (i, raw) in content.lines().enumerate() {
        let line_no = i + 1;
        let text = raw.split('!').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            if opts.is_none() {
                opts = Some(parse_option_line(path, line_no, rest)?);
            }
            continue;
        }
        if text.starts_with('[') {
            return Err(IoError::Schema {
                path: path.into(),
                message: format!("line {line_no}: Touchstone 2.0 keywords are not supported"),
            });
        }
        let format = opts.unwrap_or_default();
        for tok in text.split_whitespace() {
            if pending.is_empty() {
                record_line = line_no;
            }
            let v: f64 = tok.parse().map_err(|_| IoError::Parse {
                path: path.into(),
                line: line_no,
                message: format!("`{tok}` is not a number"),
            })?;
            pending.push(v);
            if pending.len() == 9 {
                let f = pending[0] * format.unit.scale();
                let s21 = to_complex(format.format, pending[3], pending[4]);
                trace.push(path, record_line, f, s21)?;
                pending.clear();
            }
        }
    }
    if !pending.is_empty() {
        return Err(IoError::Parse {
            path: path.into(),
            line: record_line,
            message: format!("incomplete two-port record ({} of 9 values)", pending.len()),
        });
    }
    Ok(trace)
}

/// Writes S21 as a two-port Touchstone file. S11, S12 and S22 are written as
/// zero reflection / zero reverse transmission.
pub fn write_touchstone(
    mut out: impl Write,
    freqs: &[f64],
    s21: &[Complex64],
    unit: FrequencyUnit,
    format: DataFormat,
) -> std::io::Result<()> {
    writeln!(out, "! S21 trace")?;
    writeln!(out, "# {unit} S {format:?} R 50")?;
    let zero = from_complex(format, Complex64::new(0.0, 0.0));
    let zero = if format == DataFormat::DB {
        (-300.0, 0.0)
    } else {
        zero
    };
    for (f, z) in freqs.iter().zip(s21) {
        let (a, b) = from_complex(format, *z);
        writeln!(
            out,
            "{:e} {:e} {:e} {a:e} {b:e} {:e} {:e} {:e} {:e}",
            f / unit.scale(),
            zero.0,
            zero.1,
            zero.0,
            zero.1,
            zero.0,
            zero.1
        )?;
    }
    Ok(())
}
