//! Algebraic (Pratt) circle fit.
//!
//! Minimizes `AᵀMA` subject to `AᵀBA = 1` where `M` is the moment matrix of
//! the lifted points `(x²+y², x, y, 1)` and `B` encodes `B²+C²−4AD`. The
//! solution is the generalized eigenvector with the smallest non-negative
//! eigenvalue. Points are centred and scaled before forming moments.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::CircleFitError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    /// Root-mean-square geometric distance of `points` from the circle.
    pub fn rms_residual(&self, points: &[Complex64]) -> f64 {
        let ss: f64 = points
            .iter()
            .map(|z| {
                let d = (z - self.center).norm() - self.radius;
                d * d
            })
            .sum();
        (ss / points.len() as f64).sqrt()
    }
}

fn pratt_constraint() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, -2.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        -2.0, 0.0, 0.0, 0.0,
    )
}

fn pratt_constraint_inverse() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, -0.5, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        -0.5, 0.0, 0.0, 0.0,
    )
}

fn null_vector(m: &Matrix4<f64>) -> Vector4<f64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (mut idx, mut smallest) = (0, f64::INFINITY);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s < smallest {
            smallest = s;
            idx = i;
        }
    }
    v_t.row(idx).transpose()
}

/// Fits a circle to complex points.
pub fn fit_circle(points: &[Complex64]) -> Result<Circle, CircleFitError> {
    if points.len() < 3 {
        return Err(CircleFitError::Degenerate(format!(
            "{} points; need at least 3",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(CircleFitError::Degenerate("non-finite point".into()));
    }
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Complex64>() / n;
    let scale = (points
        .iter()
        .map(|z| (z - centroid).norm_sqr())
        .sum::<f64>()
        / n)
        .sqrt();
    if !(scale > 0.0) {
        return Err(CircleFitError::Degenerate("all points coincide".into()));
    }

    let mut moments = Matrix4::<f64>::zeros();
    for z in points {
        let u = (z - centroid) / scale;
        let lifted = Vector4::new(u.norm_sqr(), u.re, u.im, 1.0);
        moments += lifted * lifted.transpose();
    }
    moments /= n;

    let b = pratt_constraint();
    let eigenvalues = (pratt_constraint_inverse() * moments).complex_eigenvalues();
    let tiny = 1e-12 * moments.norm();

    let mut best: Option<(f64, Vector4<f64>)> = None;
    for ev in eigenvalues.iter() {
        if ev.im.abs() > 1e-8 * ev.norm().max(1.0) {
            continue;
        }
        let eta = ev.re;
        if eta < -tiny {
            continue;
        }
        let a = null_vector(&(moments - b * eta));
        let norm = (a.transpose() * b * a)[(0, 0)];
        if norm <= 0.0 {
            continue;
        }
        if best.as_ref().is_none_or(|(e, _)| eta < *e) {
            best = Some((eta, a));
        }
    }
    let (_, coef) =
        best.ok_or_else(|| CircleFitError::Degenerate("no admissible eigenvalue".into()))?;

    let (a, bx, cy, d) = (coef[0], coef[1], coef[2], coef[3]);
    let linear = (bx * bx + cy * cy).sqrt();
    if a.abs() <= 1e-10 * linear {
        return Err(CircleFitError::Degenerate("points are collinear".into()));
    }
    let center_u = Complex64::new(-bx / (2.0 * a), -cy / (2.0 * a));
    let disc = bx * bx + cy * cy - 4.0 * a * d;
    if !(disc > 0.0) {
        return Err(CircleFitError::Degenerate("imaginary radius".into()));
    }
    let radius_u = disc.sqrt() / (2.0 * a.abs());
    Ok(Circle {
        center: centroid + center_u * scale,
        radius: radius_u * scale,
    })
}
