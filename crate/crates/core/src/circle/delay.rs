//! Cable-delay removal.
//!
//! The electrical delay τ winds the resonance circle into a spiral. We pick
//! τ̂ to make the corrected data as circular as possible: the objective is the
//! RMS geometric residual of an algebraic circle fit to `S21(f)·e^{2πifτ}`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::algebraic::fit_circle;
use super::ResonanceTrace;
use crate::error::CircleFitError;
use crate::optimize::golden_section;

const SCAN_POINTS: usize = 81;

/// Unwraps a phase sequence so consecutive samples differ by less than π.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(phase.len());
    let mut offset: f64 = 0.0;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d = p + offset - out[i - 1];
            if d > std::f64::consts::PI {
                offset -= TAU * ((d - std::f64::consts::PI) / TAU).ceil();
            } else if d < -std::f64::consts::PI {
                offset += TAU * ((-d - std::f64::consts::PI) / TAU).ceil();
            }
        }
        out.push(p + offset);
    }
    out
}

/// Group delay from the phase slope of the outer 10% of the trace on each
/// side, fitted with a common slope and separate intercepts.
pub fn estimate_delay_from_edges(freqs: &[f64], s21: &[Complex64]) -> f64 {
    let n = freqs.len();
    let k = (n / 10).max(3).min(n / 2);
    let phase = unwrap_phase(&s21.iter().map(|z| z.arg()).collect::<Vec<_>>());
    let f_ref = freqs[0];
    let segment = |range: std::ops::Range<usize>| {
        let len = range.len() as f64;
        let fm = range.clone().map(|i| freqs[i] - f_ref).sum::<f64>() / len;
        let pm = range.clone().map(|i| phase[i]).sum::<f64>() / len;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        for i in range {
            let dx = freqs[i] - f_ref - fm;
            sxy += dx * (phase[i] - pm);
            sxx += dx * dx;
        }
        (sxy, sxx)
    };
    let (a_xy, a_xx) = segment(0..k);
    let (b_xy, b_xx) = segment(n - k..n);
    let slope = (a_xy + b_xy) / (a_xx + b_xx);
    -slope / TAU
}

/// Multiplies every sample by `e^{2πifτ}`.
pub fn apply_delay_correction(
    freqs: &[f64],
    s21: &[Complex64],
    tau: f64,
    out: &mut Vec<Complex64>,
) {
    out.clear();
    out.extend(
        freqs
            .iter()
            .zip(s21)
            .map(|(&f, &z)| z * Complex64::from_polar(1.0, TAU * f * tau)),
    );
}

fn circularity(freqs: &[f64], s21: &[Complex64], tau: f64, buf: &mut Vec<Complex64>) -> f64 {
    apply_delay_correction(freqs, s21, tau, buf);
    match fit_circle(buf) {
        Ok(c) => c.rms_residual(buf),
        Err(_) => f64::INFINITY,
    }
}

/// Estimates and removes the cable delay. Returns the corrected trace and τ̂.
pub fn remove_cable_delay(trace: &ResonanceTrace) -> Result<(ResonanceTrace, f64), CircleFitError> {
    let freqs = &trace.freqs;
    let s21 = &trace.s21;
    let span = freqs[freqs.len() - 1] - freqs[0];
    let mut buf = Vec::with_capacity(s21.len());

    let tau0 = estimate_delay_from_edges(freqs, s21);
    // Delay that rotates the phase by one radian across the span.
    let unit = 1.0 / (TAU * span);
    let half_width = 4.0 * tau0.abs() + unit;

    let mut objective = |tau: f64| circularity(freqs, s21, tau, &mut buf);

    // Coarse scan of the bracket, refined by golden section around the best node.
    let step = 2.0 * half_width / (SCAN_POINTS - 1) as f64;
    let mut best = (tau0, objective(tau0));
    for k in 0..SCAN_POINTS {
        let tau = tau0 - half_width + k as f64 * step;
        let v = objective(tau);
        if v < best.1 {
            best = (tau, v);
        }
    }
    let (wide_tau, wide_val, _) =
        golden_section(&mut objective, best.0 - step, best.0 + step, 1e-15, 400);

    // Narrow search around the edge estimate; small resonance circles have a
    // basin much narrower than the scan spacing.
    let local = 0.05 * unit;
    let (near_tau, near_val, _) =
        golden_section(&mut objective, tau0 - local, tau0 + local, 1e-15, 400);

    let (tau, value) = if near_val < wide_val {
        (near_tau, near_val)
    } else {
        (wide_tau, wide_val)
    };
    if !value.is_finite() {
        return Err(CircleFitError::DelayNotConverged { best_delay: tau });
    }
    apply_delay_correction(freqs, s21, tau, &mut buf);
    let corrected = ResonanceTrace {
        freqs: freqs.clone(),
        s21: buf,
        context: trace.context,
    };
    Ok((corrected, tau))
}
