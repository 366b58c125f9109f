use std::path::PathBuf;

use thiserror::Error;

/// Invalid input to a physical formula.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("temperature must be strictly positive; use the zero-temperature limit instead")]
    ZeroTemperature,
    #[error("beta must lie in (0, 1], got {0}")]
    BetaOutOfRange(f64),
}

/// Failure while extracting resonance parameters from an S21 trace.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleFitError {
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("degenerate point set: {0}")]
    Degenerate(String),
    #[error("cable delay search did not converge (best estimate {best_delay:e} s)")]
    DelayNotConverged { best_delay: f64 },
    #[error("phase fit did not converge after {iterations} iterations (rms residual {rms_residual:e} rad)")]
    PhaseFitNotConverged {
        iterations: usize,
        rms_residual: f64,
    },
    #[error("no resonance found: {0}")]
    NoResonance(String),
    #[error(
        "fitted resonance {f_r:e} Hz lies outside the measured span [{f_min:e}, {f_max:e}] Hz"
    )]
    EdgeClipped { f_r: f64, f_min: f64, f_max: f64 },
    #[error(
        "negative internal quality factor (1/Q_i = {inverse_qi:e}); likely an overcoupled misfit"
    )]
    NegativeQi { inverse_qi: f64 },
}

/// Failure while regressing loss models onto a sweep dataset.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepFitError {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error(
        "power sweep spans {decades:.2} decades of photon number; at least {required} required"
    )]
    InsufficientCoverage { decades: f64, required: f64 },
    #[error("{points} points cannot constrain {free} free parameters (need at least {required})")]
    TooFewPoints {
        points: usize,
        free: usize,
        required: usize,
    },
    #[error("parameters not identifiable: {0}")]
    NotIdentifiable(String),
    #[error("fit did not converge: {0}")]
    NotConverged(String),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

/// Failure in forward synthesis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid forward parameters: {0}")]
    InvalidParams(String),
    #[error("frequency grid [{f_min:e}, {f_max:e}] Hz does not span the resonance at {f_r:e} Hz")]
    GridDoesNotSpan { f_r: f64, f_min: f64, f_max: f64 },
    #[error("photon-number fixed point failed to converge at {p_app_dbm} dBm")]
    FixedPointNotConverged { p_app_dbm: f64 },
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

/// Failure reading or writing files.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: unknown trace format")]
    UnknownFormat { path: PathBuf },
    #[error("{path}:{line}: frequency not strictly increasing")]
    NonMonotoneFrequency { path: PathBuf, line: usize },
    #[error("{path}:{line}: non-finite sample")]
    NanSample { path: PathBuf, line: usize },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Os {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IoError {
    pub(crate) fn os(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Os {
            path: path.into(),
            source,
        }
    }

    /// Stable numeric code for each failure class.
    pub fn code(&self) -> &'static str {
        match self {
            IoError::UnknownFormat { .. } => "E-FORMAT",
            IoError::NonMonotoneFrequency { .. } => "E-MONOTONE",
            IoError::NanSample { .. } => "E-NAN",
            IoError::Parse { .. } => "E-PARSE",
            IoError::Schema { .. } => "E-SCHEMA",
            IoError::Os { .. } => "E-IO",
        }
    }
}

/// Top-level error for batch runs and the command-line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    CircleFit(#[from] CircleFitError),
    #[error(transparent)]
    SweepFit(#[from] SweepFitError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("{failed} of {total} resonator fits failed")]
    FitFailures { failed: usize, total: usize },
}

impl Error {
    /// Process exit code: 1 validation, 2 fit failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Physics(_) | Error::Synth(_) => 1,
            Error::Io(IoError::Os { .. }) => 3,
            Error::Io(_) => 1,
            Error::CircleFit(_) | Error::SweepFit(_) | Error::FitFailures { .. } => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
