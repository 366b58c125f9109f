//! Small dense optimizers: Levenberg–Marquardt for nonlinear least squares
//! and golden-section search for bracketed scalar minimization.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// A nonlinear least-squares problem `min ½ Σ r_i(p)²`.
pub trait LeastSquaresProblem {
    fn num_params(&self) -> usize;
    fn num_residuals(&self) -> usize;

    /// Writes residuals for `params` into `out`. Returns `false` when the
    /// parameters are outside the model's domain.
    fn residuals(&self, params: &[f64], out: &mut [f64]) -> bool;

    /// Writes the `num_residuals × num_params` Jacobian. The default uses
    /// central differences.
    fn jacobian(&self, params: &[f64], jac: &mut DMatrix<f64>) -> bool {
        finite_difference_jacobian(self, params, jac)
    }
}

/// Central-difference Jacobian of `problem` at `params`.
pub fn finite_difference_jacobian<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    params: &[f64],
    jac: &mut DMatrix<f64>,
) -> bool {
    let m = problem.num_residuals();
    let mut p = params.to_vec();
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    for j in 0..params.len() {
        let h = f64::EPSILON.cbrt() * params[j].abs().max(1.0);
        p[j] = params[j] + h;
        if !problem.residuals(&p, &mut plus) {
            return false;
        }
        p[j] = params[j] - h;
        if !problem.residuals(&p, &mut minus) {
            return false;
        }
        p[j] = params[j];
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Relative parameter step fell below the step tolerance.
    StepTolerance,
    /// Relative cost reduction fell below the cost tolerance.
    CostTolerance,
    /// Scaled gradient fell below the gradient tolerance.
    GradientTolerance,
    /// No downhill step could be found at any damping.
    Stalled,
    MaxIterations,
    /// Residuals or Jacobian became non-finite at the starting point.
    InvalidStart,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(
            self,
            Termination::StepTolerance
                | Termination::CostTolerance
                | Termination::GradientTolerance
        )
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    /// ½ Σ r².
    pub cost: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// max_j |g_j| / (‖J_j‖ ‖r‖), the scaled gradient at the solution.
    pub gradient_norm: f64,
    /// JᵀJ at the solution.
    pub normal_matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct LevenbergMarquardt {
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub cost_tolerance: f64,
    pub gradient_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LevenbergMarquardt {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-10,
            cost_tolerance: 1e-15,
            gradient_tolerance: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

fn scaled_gradient(jac: &DMatrix<f64>, grad: &DVector<f64>, r_norm: f64) -> f64 {
    if r_norm == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for j in 0..jac.ncols() {
        let col = jac.column(j).norm();
        if col > 0.0 {
            worst = worst.max(grad[j].abs() / (col * r_norm));
        }
    }
    worst
}

impl LevenbergMarquardt {
    pub fn minimize<P: LeastSquaresProblem + ?Sized>(
        &self,
        problem: &P,
        start: &[f64],
    ) -> LmReport {
        let n = problem.num_params();
        let m = problem.num_residuals();
        let mut params = start.to_vec();
        let mut r = vec![0.0; m];
        let mut jac = DMatrix::zeros(m, n);

        let invalid = |params: Vec<f64>, r: Vec<f64>| LmReport {
            params,
            residuals: r,
            cost: f64::INFINITY,
            iterations: 0,
            termination: Termination::InvalidStart,
            gradient_norm: f64::INFINITY,
            normal_matrix: DMatrix::zeros(n, n),
        };

        if !problem.residuals(&params, &mut r) || r.iter().any(|v| !v.is_finite()) {
            return invalid(params, r);
        }
        let mut cost = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
        let mut damping = self.initial_damping;
        let mut trial = vec![0.0; n];
        let mut trial_r = vec![0.0; m];
        let mut iterations = 0;
        let mut termination = Termination::MaxIterations;

        while iterations < self.max_iterations {
            if !problem.jacobian(&params, &mut jac) || jac.iter().any(|v| !v.is_finite()) {
                if iterations == 0 {
                    return invalid(params, r);
                }
                termination = Termination::Stalled;
                break;
            }
            let rv = DVector::from_column_slice(&r);
            let grad = jac.tr_mul(&rv);
            let jtj = jac.tr_mul(&jac);
            if scaled_gradient(&jac, &grad, rv.norm()) < self.gradient_tolerance {
                termination = Termination::GradientTolerance;
                break;
            }
            iterations += 1;

            let mut accepted = false;
            while damping < 1e20 {
                let mut lhs = jtj.clone();
                for j in 0..n {
                    let d = jtj[(j, j)].max(1e-300);
                    lhs[(j, j)] += damping * d;
                }
                let step = match lhs.cholesky() {
                    Some(ch) => ch.solve(&(-&grad)),
                    None => {
                        damping *= 10.0;
                        continue;
                    }
                };
                for j in 0..n {
                    trial[j] = params[j] + step[j];
                }
                let ok = problem.residuals(&trial, &mut trial_r)
                    && trial_r.iter().all(|v| v.is_finite());
                let trial_cost = if ok {
                    0.5 * trial_r.iter().map(|v| v * v).sum::<f64>()
                } else {
                    f64::INFINITY
                };
                if trial_cost <= cost {
                    let reduction = cost - trial_cost;
                    let step_norm = step.norm();
                    let param_norm = params.iter().map(|v| v * v).sum::<f64>().sqrt();
                    params.copy_from_slice(&trial);
                    r.copy_from_slice(&trial_r);
                    let prev = cost;
                    cost = trial_cost;
                    damping = (damping / 10.0).max(1e-15);
                    accepted = true;
                    if step_norm <= self.step_tolerance * (param_norm + self.step_tolerance) {
                        termination = Termination::StepTolerance;
                    } else if reduction <= self.cost_tolerance * prev {
                        termination = Termination::CostTolerance;
                    }
                    break;
                }
                damping *= 10.0;
            }
            if !accepted {
                termination = Termination::Stalled;
                break;
            }
            if termination != Termination::MaxIterations {
                break;
            }
        }

        let gradient_norm = if problem.jacobian(&params, &mut jac) {
            let rv = DVector::from_column_slice(&r);
            scaled_gradient(&jac, &jac.tr_mul(&rv), rv.norm())
        } else {
            f64::NAN
        };
        if termination == Termination::Stalled && gradient_norm < 1e-8 {
            // Could not improve further because the cost is already at its
            // floating-point floor.
            termination = Termination::CostTolerance;
        }
        LmReport {
            params,
            residuals: r,
            cost,
            iterations,
            termination,
            gradient_norm,
            normal_matrix: jac.tr_mul(&jac),
        }
    }
}

/// Symmetric (pseudo-)inverse of a normal matrix, used for covariances.
pub fn covariance_from_normal(normal: &DMatrix<f64>) -> DMatrix<f64> {
    let n = normal.nrows();
    // Jacobi scaling keeps badly scaled parameters from losing precision.
    let scale: Vec<f64> = (0..n)
        .map(|j| {
            let d = normal[(j, j)];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| normal[(i, j)] * scale[i] * scale[j]);
    let inv = match scaled.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => scaled
            .pseudo_inverse(1e-14)
            .unwrap_or_else(|_| DMatrix::from_element(n, n, f64::NAN)),
    };
    let cov = DMatrix::from_fn(n, n, |i, j| inv[(i, j)] * scale[i] * scale[j]);
    // Enforce exact symmetry.
    DMatrix::from_fn(n, n, |i, j| 0.5 * (cov[(i, j)] + cov[(j, i)]))
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(x, f(x))`. Stops when the bracket shrinks below
/// `tol · (|x| + tol)` or after `max_iter` iterations.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64, bool) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol * (mid.abs() + tol) {
            return if f1 <= f2 {
                (x1, f1, true)
            } else {
                (x2, f2, true)
            };
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1, false)
    } else {
        (x2, f2, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl LeastSquaresProblem for Rosenbrock {
        fn num_params(&self) -> usize {
            2
        }
        fn num_residuals(&self) -> usize {
            2
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) -> bool {
            out[0] = 10.0 * (p[1] - p[0] * p[0]);
            out[1] = 1.0 - p[0];
            true
        }
    }

    /// y = a·exp(−b·x) with an analytic Jacobian.
    struct ExpDecay {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem for ExpDecay {
        fn num_params(&self) -> usize {
            2
        }
        fn num_residuals(&self) -> usize {
            self.x.len()
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) -> bool {
            for (i, (&x, &y)) in self.x.iter().zip(&self.y).enumerate() {
                out[i] = p[0] * (-p[1] * x).exp() - y;
            }
            true
        }
        fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>) -> bool {
            for (i, &x) in self.x.iter().enumerate() {
                let e = (-p[1] * x).exp();
                jac[(i, 0)] = e;
                jac[(i, 1)] = -p[0] * x * e;
            }
            true
        }
    }

    #[test]
    fn rosenbrock_converges() {
        let report = LevenbergMarquardt::default().minimize(&Rosenbrock, &[-1.2, 1.0]);
        assert!(report.termination.converged(), "{:?}", report.termination);
        assert!((report.params[0] - 1.0).abs() < 1e-8);
        assert!((report.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn exponential_fit_and_jacobian_check() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let y = x.iter().map(|x| 3.0 * (-0.7 * x).exp()).collect();
        let problem = ExpDecay { x, y };
        let report = LevenbergMarquardt::default().minimize(&problem, &[1.0, 0.1]);
        assert!(report.termination.converged());
        assert!((report.params[0] - 3.0).abs() < 1e-9);
        assert!((report.params[1] - 0.7).abs() < 1e-9);

        let p = [2.0, 0.4];
        let mut analytic = DMatrix::zeros(20, 2);
        let mut numeric = DMatrix::zeros(20, 2);
        problem.jacobian(&p, &mut analytic);
        finite_difference_jacobian(&problem, &p, &mut numeric);
        assert!((analytic - numeric).amax() < 1e-8);
    }

    #[test]
    fn invalid_start_is_reported() {
        struct Nan;
        impl LeastSquaresProblem for Nan {
            fn num_params(&self) -> usize {
                1
            }
            fn num_residuals(&self) -> usize {
                1
            }
            fn residuals(&self, _: &[f64], out: &mut [f64]) -> bool {
                out[0] = f64::NAN;
                true
            }
        }
        let report = LevenbergMarquardt::default().minimize(&Nan, &[0.0]);
        assert_eq!(report.termination, Termination::InvalidStart);
    }

    #[test]
    fn covariance_inverts_normal_matrix() {
        let normal = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let cov = covariance_from_normal(&normal);
        let id = &normal * &cov;
        assert!((id - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn golden_section_finds_minimum() {
        let (x, fx, ok) = golden_section(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-12, 500);
        assert!(ok);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
        // V-shaped objectives are located to the bracket tolerance.
        let (x, _, _) = golden_section(|x| (x - 1.5e-8).abs(), 0.0, 1e-7, 1e-14, 500);
        assert!((x - 1.5e-8).abs() < 1e-20);
    }
}
