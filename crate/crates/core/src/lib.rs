//! Loss characterization of superconducting microwave resonators.
//!
//! - [`circle`]: resonance parameters from complex S21 traces.
//! - [`physics`]: TLS, quasiparticle and residual loss models.
//! - [`sweep`]: regression of the loss models onto Q_i sweeps.
//! - [`synth`]: forward simulation of traces and sweeps.
//! - [`io`], [`report`], [`batch`]: file formats, reports and the batch pipeline.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod circle;
pub mod constants;
pub mod error;
pub mod io;
pub mod optimize;
pub mod physics;
pub mod report;
pub mod sweep;
pub mod synth;

pub use error::{Error, Result};
