//! Phase-versus-frequency fit of the origin-centred resonance circle:
//! `θ(f) = θ₀ + 2·arctan(2Q_l(1 − f/f_r))`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::delay::unwrap_phase;
use crate::error::CircleFitError;
use crate::optimize::{covariance_from_normal, LeastSquaresProblem, LevenbergMarquardt};

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFit {
    pub f_r: f64,
    pub q_l: f64,
    pub theta0: f64,
    pub sigma_f_r: f64,
    pub sigma_q_l: f64,
    pub sigma_theta0: f64,
    pub rms_residual: f64,
    pub iterations: usize,
}

fn wrap(angle: f64) -> f64 {
    (angle + PI).rem_euclid(TAU) - PI
}

/// Residuals in terms of `x = f/f_c − 1`, with parameters
/// `[θ₀, Q_l, ν]` and `f_r = f_c(1 + ν)`.
struct PhaseProblem<'a> {
    x: &'a [f64],
    theta: &'a [f64],
}

impl PhaseProblem<'_> {
    fn argument(p: &[f64], x: f64) -> f64 {
        2.0 * p[1] * (p[2] - x) / (1.0 + p[2])
    }
}

impl LeastSquaresProblem for PhaseProblem<'_> {
    fn num_params(&self) -> usize {
        3
    }
    fn num_residuals(&self) -> usize {
        self.x.len()
    }
    fn residuals(&self, p: &[f64], out: &mut [f64]) -> bool {
        if !(p[1] > 0.0) || !(p[2] > -1.0) {
            return false;
        }
        for (i, (&x, &th)) in self.x.iter().zip(self.theta).enumerate() {
            out[i] = wrap(th - p[0] - 2.0 * Self::argument(p, x).atan());
        }
        true
    }
    fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let one_nu = 1.0 + p[2];
        for (i, &x) in self.x.iter().enumerate() {
            let u = Self::argument(p, x);
            let g = 2.0 / (1.0 + u * u);
            jac[(i, 0)] = -1.0;
            jac[(i, 1)] = -g * 2.0 * (p[2] - x) / one_nu;
            jac[(i, 2)] = -g * 2.0 * p[1] * (1.0 + x) / (one_nu * one_nu);
        }
        true
    }
}

/// Linear interpolation of the first frequency where `theta` crosses `level`.
fn crossing(freqs: &[f64], theta: &[f64], level: f64) -> Option<f64> {
    for i in 1..theta.len() {
        let (a, b) = (theta[i - 1] - level, theta[i] - level);
        if a == 0.0 {
            return Some(freqs[i - 1]);
        }
        if a * b < 0.0 {
            let t = a / (a - b);
            return Some(freqs[i - 1] + t * (freqs[i] - freqs[i - 1]));
        }
    }
    None
}

/// Fits the resonance phase response of origin-centred circle points.
pub fn fit_phase(freqs: &[f64], centered: &[Complex64]) -> Result<PhaseFit, CircleFitError> {
    let n = freqs.len();
    if n < 8 || centered.len() != n {
        return Err(CircleFitError::InvalidTrace(
            "phase fit needs at least 8 matched samples".into(),
        ));
    }
    let theta = unwrap_phase(&centered.iter().map(|z| z.arg()).collect::<Vec<_>>());
    let f_lo = freqs[0];
    let f_hi = freqs[n - 1];
    let f_c = 0.5 * (f_lo + f_hi);

    let theta0_guess = 0.5 * (theta[0] + theta[n - 1]);
    // Phase falls through θ₀ at resonance; θ₀ ± π/2 marks the half-width points.
    let fr_guess = crossing(freqs, &theta, theta0_guess).unwrap_or(f_c);
    let ql_guess = match (
        crossing(freqs, &theta, theta0_guess + FRAC_PI_2),
        crossing(freqs, &theta, theta0_guess - FRAC_PI_2),
    ) {
        (Some(a), Some(b)) if b > a => fr_guess / (b - a),
        _ => 4.0 * fr_guess / (f_hi - f_lo),
    };

    let x: Vec<f64> = freqs.iter().map(|f| (f - f_c) / f_c).collect();
    let problem = PhaseProblem {
        x: &x,
        theta: &theta,
    };
    let start = [theta0_guess, ql_guess, (fr_guess - f_c) / f_c];
    let report = LevenbergMarquardt::default().minimize(&problem, &start);

    let rms = (2.0 * report.cost / n as f64).sqrt();
    if !report.termination.converged() {
        return Err(CircleFitError::PhaseFitNotConverged {
            iterations: report.iterations,
            rms_residual: rms,
        });
    }
    let p = &report.params;
    let dof = (n - 3) as f64;
    let variance = 2.0 * report.cost / dof;
    let cov = covariance_from_normal(&report.normal_matrix) * variance;
    let sd = |i: usize| cov[(i, i)].max(0.0).sqrt();

    Ok(PhaseFit {
        f_r: f_c * (1.0 + p[2]),
        q_l: p[1],
        theta0: wrap(p[0]),
        sigma_f_r: f_c * sd(2),
        sigma_q_l: sd(1),
        sigma_theta0: sd(0),
        rms_residual: rms,
        iterations: report.iterations,
    })
}
