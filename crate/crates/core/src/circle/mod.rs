//! Notch-port resonance extraction with the diameter-corrected circle fit.
//!
//! Pipeline: remove the cable delay, fit a circle to the corrected data, fit
//! the phase of the origin-centred circle versus frequency, locate the
//! off-resonant point diametrically opposite the resonance, normalize by it,
//! and read |Q_c| and the mismatch angle φ off the normalized circle. These
//! geometric estimates seed a joint least-squares fit of the full model to
//! the raw samples. The internal quality factor then follows from
//! `1/Q_i = 1/Q_l − cos(φ)/|Q_c|`.

pub mod algebraic;
pub mod delay;
pub mod phase;
pub mod refine;

use std::f64::consts::{FRAC_PI_2, PI};

use log::{debug, warn};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use algebraic::{fit_circle, Circle};
pub use delay::remove_cable_delay;
pub use phase::{fit_phase, PhaseFit};
pub use refine::{refine, NotchModel, Refined};

use crate::error::CircleFitError;
use crate::physics::MeasurementContext;

/// Minimum number of samples in a trace.
pub const MIN_TRACE_POINTS: usize = 32;

/// Resonance minima this close to either edge trigger a warning.
pub const EDGE_WARNING_POINTS: usize = 5;

/// One complex S21 sweep around a resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceTrace {
    /// Strictly increasing frequency grid, Hz.
    pub freqs: Vec<f64>,
    pub s21: Vec<Complex64>,
    pub context: MeasurementContext,
}

impl ResonanceTrace {
    pub fn new(
        freqs: Vec<f64>,
        s21: Vec<Complex64>,
        context: MeasurementContext,
    ) -> Result<Self, CircleFitError> {
        let trace = Self {
            freqs,
            s21,
            context,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<(), CircleFitError> {
        let n = self.freqs.len();
        if n != self.s21.len() {
            return Err(CircleFitError::InvalidTrace(format!(
                "{} frequencies but {} samples",
                n,
                self.s21.len()
            )));
        }
        if n < MIN_TRACE_POINTS {
            return Err(CircleFitError::InvalidTrace(format!(
                "{n} points; at least {MIN_TRACE_POINTS} required"
            )));
        }
        if let Some(i) = self.freqs.iter().position(|f| !f.is_finite() || *f <= 0.0) {
            return Err(CircleFitError::InvalidTrace(format!(
                "frequency {i} is not a positive finite number"
            )));
        }
        if let Some(i) = self.freqs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(CircleFitError::InvalidTrace(format!(
                "frequency grid not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(i) = self
            .s21
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(CircleFitError::InvalidTrace(format!(
                "sample {i} is not finite"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn f_min(&self) -> f64 {
        self.freqs[0]
    }

    pub fn f_max(&self) -> f64 {
        self.freqs[self.freqs.len() - 1]
    }

    /// Index of the smallest |S21|.
    pub fn min_magnitude_index(&self) -> usize {
        let mut best = 0;
        for (i, z) in self.s21.iter().enumerate() {
            if z.norm_sqr() < self.s21[best].norm_sqr() {
                best = i;
            }
        }
        best
    }
}

/// One-sigma uncertainties of the extracted parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CircleFitSigma {
    pub f_r: f64,
    pub q_l: f64,
    pub q_c_mag: f64,
    pub phi: f64,
    pub q_i: f64,
}

/// Parameters extracted from one resonance trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleFitResult {
    /// Resonance frequency, Hz.
    pub f_r: f64,
    pub q_l: f64,
    /// |Q_c|.
    pub q_c_mag: f64,
    /// Impedance-mismatch angle φ, rad.
    pub phi: f64,
    /// Diameter-corrected internal quality factor.
    pub q_i: f64,
    /// Cable delay τ, s.
    pub env_delay: f64,
    pub env_amp: f64,
    /// Global phase α, rad.
    pub env_phase: f64,
    pub sigma: CircleFitSigma,
    /// RMS geometric residual of the normalized circle.
    pub circle_rms: f64,
    /// Set when the |S21| minimum sits within a few points of a grid edge.
    pub edge_warning: bool,
}

impl CircleFitResult {
    /// `1/Q_l − 1/|Q_c|`: the estimate that ignores the mismatch rotation.
    pub fn uncorrected_inverse_qi(&self) -> f64 {
        1.0 / self.q_l - 1.0 / self.q_c_mag
    }

    /// Complex coupling quality factor `|Q_c| e^{−iφ}`.
    pub fn q_c_complex(&self) -> Complex64 {
        Complex64::from_polar(self.q_c_mag, -self.phi)
    }
}

/// Noise-free notch-port response for fitted parameters, used for residual
/// bootstrapping.
fn model_response(fit: &CircleFitResult, f: f64) -> Complex64 {
    let x = (f - fit.f_r) / fit.f_r;
    let env = Complex64::from_polar(fit.env_amp, fit.env_phase - 2.0 * PI * f * fit.env_delay);
    let res = Complex64::from_polar(fit.q_l / fit.q_c_mag, fit.phi)
        / Complex64::new(1.0, 2.0 * fit.q_l * x);
    env * (Complex64::new(1.0, 0.0) - res)
}

/// Extracts resonance parameters from a notch-port S21 trace.
pub fn extract_quality_factors(trace: &ResonanceTrace) -> Result<CircleFitResult, CircleFitError> {
    trace.validate()?;
    let n = trace.len();
    let min_idx = trace.min_magnitude_index();
    let edge_warning = min_idx < EDGE_WARNING_POINTS || min_idx >= n - EDGE_WARNING_POINTS;
    if edge_warning {
        warn!(
            "resonance minimum at index {min_idx} of {n} is close to the edge of the span; results may be biased"
        );
    }

    let (corrected, tau) = remove_cable_delay(trace)?;
    let circle = fit_circle(&corrected.s21)?;
    let rms = circle.rms_residual(&corrected.s21);
    if circle.radius <= rms {
        return Err(CircleFitError::NoResonance(format!(
            "circle radius {:e} does not exceed the residual scatter {:e}",
            circle.radius, rms
        )));
    }

    let centered: Vec<Complex64> = corrected.s21.iter().map(|z| z - circle.center).collect();
    let phase = fit_phase(&corrected.freqs, &centered).map_err(|e| match e {
        CircleFitError::PhaseFitNotConverged { .. } => CircleFitError::NoResonance(e.to_string()),
        other => other,
    })?;
    // Off-resonant point: diametrically opposite the on-resonance point.
    let off_resonant = circle.center + Complex64::from_polar(circle.radius, phase.theta0 + PI);
    let env_amp = off_resonant.norm();
    let center_norm = circle.center / off_resonant;
    let radius_norm = circle.radius / env_amp;
    let q_l = phase.q_l;
    let q_c_mag = q_l / (2.0 * radius_norm);
    let phi = (Complex64::new(1.0, 0.0) - center_norm).arg();

    // Propagate phase-fit covariance and circle scatter (correlations ignored).
    let sigma_r_norm = rms / env_amp / (n as f64).sqrt();
    let rel_ql = phase.sigma_q_l / q_l;
    let rel_r = sigma_r_norm / radius_norm;
    let sigma_q_c = q_c_mag * (rel_ql * rel_ql + rel_r * rel_r).sqrt();
    let sigma_phi = rel_r.hypot(phase.sigma_theta0);
    let geometric = NotchModel {
        f_r: phase.f_r,
        q_l,
        q_c_mag,
        phi,
        env_amp,
        env_phase: off_resonant.arg(),
        env_delay: tau,
    };
    let geometric_sigma = |m: &NotchModel| {
        let d_ql = phase.sigma_q_l / (m.q_l * m.q_l);
        let d_qc = m.phi.cos() * sigma_q_c / (m.q_c_mag * m.q_c_mag);
        let d_phi = m.phi.sin() * sigma_phi / m.q_c_mag;
        let inv_qi = 1.0 / m.q_l - m.phi.cos() / m.q_c_mag;
        [
            phase.sigma_f_r,
            phase.sigma_q_l,
            sigma_q_c,
            sigma_phi,
            (d_ql * d_ql + d_qc * d_qc + d_phi * d_phi).sqrt() / (inv_qi * inv_qi),
        ]
    };
    let (model, sigma) = match refine(&trace.freqs, &trace.s21, &geometric) {
        Some(r) => (r.model, r.sigma),
        None => {
            debug!("joint refinement did not converge; keeping circle-geometry estimates");
            (geometric, geometric_sigma(&geometric))
        }
    };

    if model.f_r < trace.f_min() || model.f_r > trace.f_max() {
        return Err(CircleFitError::EdgeClipped {
            f_r: model.f_r,
            f_min: trace.f_min(),
            f_max: trace.f_max(),
        });
    }
    if model.phi.abs() >= FRAC_PI_2 {
        return Err(CircleFitError::NoResonance(format!(
            "mismatch angle {} outside (−π/2, π/2)",
            model.phi
        )));
    }
    let inverse_qi = 1.0 / model.q_l - model.phi.cos() / model.q_c_mag;
    if !(inverse_qi > 0.0) {
        return Err(CircleFitError::NegativeQi { inverse_qi });
    }

    Ok(CircleFitResult {
        f_r: model.f_r,
        q_l: model.q_l,
        q_c_mag: model.q_c_mag,
        phi: model.phi,
        q_i: 1.0 / inverse_qi,
        env_delay: model.env_delay,
        env_amp: model.env_amp,
        env_phase: model.env_phase,
        sigma: CircleFitSigma {
            f_r: sigma[0],
            q_l: sigma[1],
            q_c_mag: sigma[2],
            phi: sigma[3],
            q_i: sigma[4],
        },
        circle_rms: rms / env_amp,
        edge_warning,
    })
}

/// Residual-bootstrap uncertainties: refits `resamples` traces built from the
/// fitted model plus resampled complex residuals, and returns the standard
/// deviation of each parameter. Much slower than the analytic estimate.
pub fn bootstrap_sigma(
    trace: &ResonanceTrace,
    fit: &CircleFitResult,
    resamples: usize,
    seed: u64,
) -> Result<CircleFitSigma, CircleFitError> {
    use rand::Rng;

    let model: Vec<Complex64> = trace
        .freqs
        .iter()
        .map(|&f| model_response(fit, f))
        .collect();
    let residuals: Vec<Complex64> = trace.s21.iter().zip(&model).map(|(z, m)| z - m).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut samples: Vec<[f64; 5]> = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let s21 = model
            .iter()
            .map(|m| m + residuals[rng.random_range(0..residuals.len())])
            .collect();
        let resampled = ResonanceTrace {
            freqs: trace.freqs.clone(),
            s21,
            context: trace.context,
        };
        if let Ok(r) = extract_quality_factors(&resampled) {
            samples.push([r.f_r, r.q_l, r.q_c_mag, r.phi, r.q_i]);
        }
    }
    if samples.len() < 2 {
        return Err(CircleFitError::NoResonance(
            "bootstrap refits failed".into(),
        ));
    }
    let m = samples.len() as f64;
    let sd = |k: usize| {
        let mean = samples.iter().map(|s| s[k]).sum::<f64>() / m;
        (samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    };
    Ok(CircleFitSigma {
        f_r: sd(0),
        q_l: sd(1),
        q_c_mag: sd(2),
        phi: sd(3),
        q_i: sd(4),
    })
}
