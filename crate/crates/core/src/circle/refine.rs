//! Joint least-squares refinement of the full notch-port model against the
//! raw complex trace.
//!
//! The circle-geometry estimates are unbiased but statistically weak in the
//! cable delay: for small mismatch angles a delay error warps the circle into
//! another circle to first order. Fitting all seven parameters at once to the
//! complex samples pins the delay through the frequency dependence and
//! tightens Q_l and Q_i accordingly.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::optimize::{covariance_from_normal, LeastSquaresProblem, LevenbergMarquardt};

/// Model parameters in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotchModel {
    pub f_r: f64,
    pub q_l: f64,
    pub q_c_mag: f64,
    pub phi: f64,
    pub env_amp: f64,
    pub env_phase: f64,
    pub env_delay: f64,
}

#[derive(Debug, Clone)]
pub struct Refined {
    pub model: NotchModel,
    /// Standard errors of f_r, Q_l, |Q_c|, φ and Q_i, scaled by the residual variance.
    pub sigma: [f64; 5],
}

fn wrap(angle: f64) -> f64 {
    (angle + PI).rem_euclid(TAU) - PI
}

/// Internal coordinates:
/// `[ν, ln Q_l, ln(Q_l/|Q_c|), φ, ln a, α', 2πτ·span]` with
/// `f_r = f₀(1 + ν/Q₀)` and the phase referenced to `f₀`.
struct FullModel<'a> {
    freqs: &'a [f64],
    s21: &'a [Complex64],
    f_ref: f64,
    q_ref: f64,
    span: f64,
}

impl FullModel<'_> {
    fn unpack(&self, u: &[f64]) -> NotchModel {
        let q_l = u[1].exp();
        let tau = u[6] / (TAU * self.span);
        NotchModel {
            f_r: self.f_ref * (1.0 + u[0] / self.q_ref),
            q_l,
            q_c_mag: q_l / u[2].exp(),
            phi: u[3],
            env_amp: u[4].exp(),
            env_phase: wrap(u[5] + TAU * self.f_ref * tau),
            env_delay: tau,
        }
    }

    fn pack(&self, m: &NotchModel) -> [f64; 7] {
        [
            (m.f_r / self.f_ref - 1.0) * self.q_ref,
            m.q_l.ln(),
            (m.q_l / m.q_c_mag).ln(),
            m.phi,
            m.env_amp.ln(),
            wrap(m.env_phase - TAU * self.f_ref * m.env_delay),
            TAU * self.span * m.env_delay,
        ]
    }

    /// Environment factor, resonance term D and its denominator w at sample `i`.
    fn terms(&self, u: &[f64], i: usize) -> (Complex64, Complex64, Complex64, f64) {
        let f = self.freqs[i];
        let f_r = self.f_ref * (1.0 + u[0] / self.q_ref);
        let q_l = u[1].exp();
        let x = f / f_r - 1.0;
        let env = Complex64::from_polar(u[4].exp(), u[5] - u[6] * (f - self.f_ref) / self.span);
        let w = Complex64::new(1.0, 2.0 * q_l * x);
        let d = Complex64::from_polar(u[2].exp(), u[3]) / w;
        (env, d, w, f_r)
    }
}

impl LeastSquaresProblem for FullModel<'_> {
    fn num_params(&self) -> usize {
        7
    }

    fn num_residuals(&self) -> usize {
        2 * self.freqs.len()
    }

    fn residuals(&self, u: &[f64], out: &mut [f64]) -> bool {
        if u.iter().any(|v| !v.is_finite()) {
            return false;
        }
        for i in 0..self.freqs.len() {
            let (env, d, _, _) = self.terms(u, i);
            let r = env * (1.0 - d) - self.s21[i];
            out[2 * i] = r.re;
            out[2 * i + 1] = r.im;
        }
        true
    }

    fn jacobian(&self, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let q_l = u[1].exp();
        for i in 0..self.freqs.len() {
            let f = self.freqs[i];
            let (env, d, w, f_r) = self.terms(u, i);
            let m = env * (1.0 - d);
            let ed_w = env * d / w;
            let i1 = Complex64::i();
            let cols = [
                ed_w * i1 * 2.0 * q_l * (-f / (f_r * f_r)) * (self.f_ref / self.q_ref),
                ed_w * i1 * 2.0 * q_l * (f / f_r - 1.0),
                -env * d,
                -env * d * i1,
                m,
                i1 * m,
                -i1 * m * (f - self.f_ref) / self.span,
            ];
            for (k, c) in cols.iter().enumerate() {
                jac[(2 * i, k)] = c.re;
                jac[(2 * i + 1, k)] = c.im;
            }
        }
        true
    }
}

/// Refines `start` against the raw samples. Returns `None` if the optimizer
/// does not converge or leaves the physical domain.
pub fn refine(freqs: &[f64], s21: &[Complex64], start: &NotchModel) -> Option<Refined> {
    let span = freqs[freqs.len() - 1] - freqs[0];
    let problem = FullModel {
        freqs,
        s21,
        f_ref: start.f_r,
        q_ref: start.q_l,
        span,
    };
    let u0 = problem.pack(start);
    let report = LevenbergMarquardt::default().minimize(&problem, &u0);
    if !report.termination.converged() {
        return None;
    }
    let model = problem.unpack(&report.params);
    if !(model.q_l > 0.0
        && model.q_c_mag > 0.0
        && model.phi.abs() < PI / 2.0
        && model.f_r.is_finite())
    {
        return None;
    }

    let dof = (problem.num_residuals() - 7).max(1) as f64;
    let s2 = 2.0 * report.cost / dof;
    let cov = covariance_from_normal(&report.normal_matrix) * s2;
    let var = |g: &[f64; 7]| -> f64 {
        let mut v = 0.0;
        for a in 0..7 {
            for b in 0..7 {
                v += g[a] * cov[(a, b)] * g[b];
            }
        }
        v.max(0.0)
    };
    let (q_l, q_c, phi) = (model.q_l, model.q_c_mag, model.phi);
    let inv_qi = 1.0 / q_l - phi.cos() / q_c;
    let g_inv_qi = [
        0.0,
        -inv_qi,
        -phi.cos() / q_c,
        phi.sin() / q_c,
        0.0,
        0.0,
        0.0,
    ];
    let q_i_sigma = if inv_qi > 0.0 {
        var(&g_inv_qi).sqrt() / (inv_qi * inv_qi)
    } else {
        f64::INFINITY
    };
    let sigma = [
        var(&[problem.f_ref / problem.q_ref, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).sqrt(),
        q_l * var(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).sqrt(),
        q_c * var(&[0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).sqrt(),
        var(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).sqrt(),
        q_i_sigma,
    ];
    Some(Refined { model, sigma })
}
