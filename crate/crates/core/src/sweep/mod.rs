//! Regression of the loss models onto Q_i sweeps.
//!
//! Fits run in loss space (1/Q_i) with weights `σ_{1/Q_i} = σ_{Q_i}/Q_i²`.
//! Positivity is enforced by fitting `ln` of Fδ⁰_TLS, n_c, δ⁰_QP and δ_other;
//! β goes through a logistic map onto (0, 1). Model values always come from
//! [`crate::physics`].

pub mod summary;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::{POWER_SWEEP_TEMPERATURE, TANTALUM_TC};
use crate::error::SweepFitError;
use crate::optimize::{
    covariance_from_normal, LeastSquaresProblem, LevenbergMarquardt, Termination,
};
use crate::physics::{self, LossModelParams};

pub use summary::{
    box_stats, high_power_qi, low_power_qi, mean_std, quartiles, summarize_sample, BoxStats,
    MeanStd, SampleSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    PowerSweep,
    TemperatureSweep,
}

/// One Q_i measurement. `x` is ⟨n⟩ for power sweeps and T (kelvin) for
/// temperature sweeps; `branch` indexes [`SweepDataset::fixed_n`] for the latter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub q_i: f64,
    pub sigma_qi: f64,
    #[serde(default)]
    pub branch: usize,
}

/// Q_i measurements of one resonator under one treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDataset {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
    /// Bath temperature of a power sweep, K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_temperature: Option<f64>,
    /// Photon number of each temperature-sweep branch.
    #[serde(default)]
    pub fixed_n: Vec<f64>,
    pub f0: f64,
    pub t_c: f64,
}

impl SweepDataset {
    /// Power sweep at the standard 25.7 mK base temperature and T_C = 4.4 K.
    pub fn power_sweep(points: Vec<SweepPoint>, f0: f64) -> Self {
        Self {
            kind: SweepKind::PowerSweep,
            points,
            fixed_temperature: Some(POWER_SWEEP_TEMPERATURE),
            fixed_n: Vec::new(),
            f0,
            t_c: TANTALUM_TC,
        }
    }

    pub fn temperature_sweep(points: Vec<SweepPoint>, fixed_n: Vec<f64>, f0: f64) -> Self {
        Self {
            kind: SweepKind::TemperatureSweep,
            points,
            fixed_temperature: None,
            fixed_n,
            f0,
            t_c: TANTALUM_TC,
        }
    }

    pub fn validate(&self) -> Result<(), SweepFitError> {
        let bad = |m: String| Err(SweepFitError::InvalidDataset(m));
        if self.points.is_empty() {
            return bad("no points".into());
        }
        if !(self.f0 > 0.0 && self.f0.is_finite()) || !(self.t_c > 0.0 && self.t_c.is_finite()) {
            return bad("f0 and t_c must be positive".into());
        }
        for (i, p) in self.points.iter().enumerate() {
            if !(p.x > 0.0 && p.x.is_finite()) {
                return bad(format!("point {i}: x = {} is not strictly positive", p.x));
            }
            if !(p.q_i > 0.0 && p.q_i.is_finite()) {
                return bad(format!(
                    "point {i}: q_i = {} is not strictly positive",
                    p.q_i
                ));
            }
            if !(p.sigma_qi > 0.0 && p.sigma_qi.is_finite()) {
                return bad(format!(
                    "point {i}: sigma_qi = {} is not strictly positive",
                    p.sigma_qi
                ));
            }
        }
        match self.kind {
            SweepKind::PowerSweep => match self.fixed_temperature {
                Some(t) if t > 0.0 && t.is_finite() => {}
                _ => return bad("power sweep needs a positive fixed temperature".into()),
            },
            SweepKind::TemperatureSweep => {
                if self.fixed_n.iter().any(|n| !(*n >= 0.0 && n.is_finite())) {
                    return bad("branch photon numbers must be finite and non-negative".into());
                }
                if let Some(p) = self.points.iter().find(|p| p.branch >= self.fixed_n.len()) {
                    return bad(format!("branch index {} has no photon number", p.branch));
                }
            }
        }
        Ok(())
    }

    /// Photon number and temperature at point `i`.
    pub fn operating_point(&self, i: usize) -> (f64, f64) {
        let p = &self.points[i];
        match self.kind {
            SweepKind::PowerSweep => (
                p.x,
                self.fixed_temperature.unwrap_or(POWER_SWEEP_TEMPERATURE),
            ),
            SweepKind::TemperatureSweep => (self.fixed_n[p.branch], p.x),
        }
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.x), hi.max(p.x))
            })
    }

    /// Distinct branch photon numbers that actually carry points.
    pub fn distinct_branches(&self) -> usize {
        let mut used: Vec<f64> = self.points.iter().map(|p| self.fixed_n[p.branch]).collect();
        used.sort_by(f64::total_cmp);
        used.dedup();
        used.len()
    }
}

/// Free parameters of the loss model, in fit-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossParam {
    FDeltaTls0,
    NC,
    Beta,
    DeltaQp0,
    DeltaOther,
}

impl LossParam {
    pub const ALL: [LossParam; 5] = [
        LossParam::FDeltaTls0,
        LossParam::NC,
        LossParam::Beta,
        LossParam::DeltaQp0,
        LossParam::DeltaOther,
    ];

    pub fn get(self, p: &LossModelParams) -> f64 {
        match self {
            LossParam::FDeltaTls0 => p.f_delta_tls0,
            LossParam::NC => p.n_c,
            LossParam::Beta => p.beta,
            LossParam::DeltaQp0 => p.delta_qp0,
            LossParam::DeltaOther => p.delta_other,
        }
    }

    fn set(self, p: &mut LossModelParams, v: f64) {
        match self {
            LossParam::FDeltaTls0 => p.f_delta_tls0 = v,
            LossParam::NC => p.n_c = v,
            LossParam::Beta => p.beta = v,
            LossParam::DeltaQp0 => p.delta_qp0 = v,
            LossParam::DeltaOther => p.delta_other = v,
        }
    }

    fn to_internal(self, v: f64) -> f64 {
        match self {
            LossParam::Beta => {
                let b = v.clamp(1e-9, 1.0 - 1e-9);
                (b / (1.0 - b)).ln()
            }
            _ => v.max(1e-300).ln(),
        }
    }

    fn natural(self, u: f64) -> f64 {
        match self {
            LossParam::Beta => 1.0 / (1.0 + (-u).exp()),
            _ => u.exp(),
        }
    }
}

/// Which parameters float, where the frozen ones sit, and optimizer limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub free: Vec<LossParam>,
    /// Values for frozen parameters and optional starting values for free ones.
    /// Only fields named in `free` are overridden by the automatic initializer
    /// unless `use_initial` is set.
    pub fixed: FixedValues,
    pub use_initial: bool,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    /// Minimum decades of ⟨n⟩ a power sweep must span.
    pub min_decades: f64,
    /// Minimum points per free parameter.
    pub min_points_per_param: usize,
    /// Freeze β at `fixed.beta` when the data is too short to float it but
    /// long enough for the remaining parameters.
    #[serde(default)]
    pub auto_freeze_beta: bool,
}

/// Values of frozen (or initial) parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedValues {
    pub f_delta_tls0: f64,
    pub n_c: f64,
    pub beta: f64,
    pub delta_qp0: f64,
    pub delta_other: f64,
}

impl Default for FixedValues {
    fn default() -> Self {
        Self {
            f_delta_tls0: 1e-6,
            n_c: 10.0,
            beta: 0.5,
            delta_qp0: 0.0,
            delta_other: 1e-7,
        }
    }
}

impl FitOptions {
    /// Power sweep: Fδ⁰_TLS, n_c, β, δ_other free; δ⁰_QP frozen at zero.
    pub fn power_sweep() -> Self {
        Self {
            free: vec![
                LossParam::FDeltaTls0,
                LossParam::NC,
                LossParam::Beta,
                LossParam::DeltaOther,
            ],
            fixed: FixedValues::default(),
            use_initial: false,
            max_iterations: 200,
            step_tolerance: 1e-10,
            min_decades: 3.0,
            min_points_per_param: 5,
            auto_freeze_beta: true,
        }
    }

    /// Temperature sweep: all five loss parameters free.
    pub fn temperature_sweep() -> Self {
        Self {
            free: LossParam::ALL.to_vec(),
            auto_freeze_beta: false,
            ..Self::power_sweep()
        }
    }

    pub fn with_frozen(mut self, param: LossParam, value: f64) -> Self {
        self.free.retain(|p| *p != param);
        match param {
            LossParam::FDeltaTls0 => self.fixed.f_delta_tls0 = value,
            LossParam::NC => self.fixed.n_c = value,
            LossParam::Beta => self.fixed.beta = value,
            LossParam::DeltaQp0 => self.fixed.delta_qp0 = value,
            LossParam::DeltaOther => self.fixed.delta_other = value,
        }
        self
    }

    fn is_free(&self, p: LossParam) -> bool {
        self.free.contains(&p)
    }
}

/// Result of one sweep regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub kind: SweepKind,
    pub params: LossModelParams,
    /// Free parameters, in the order used by `covariance` and `sigma`.
    pub free: Vec<LossParam>,
    /// Covariance of the free parameters in natural units, `(JᵀWJ)⁻¹`.
    pub covariance: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub reduced_chi_square: f64,
    /// Normalized residuals `(model − data)/σ` in loss space, in input order.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    pub gradient_norm: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// Largest photon number in the data (max over branches for temperature sweeps).
    pub n_max: f64,
    /// Fixed bath temperature for power sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// Set when β was frozen automatically for lack of points.
    #[serde(default)]
    pub beta_auto_frozen: bool,
}

impl FitOutcome {
    pub fn converged(&self) -> bool {
        self.termination.converged()
    }

    /// One-sigma uncertainty of `param`, or zero if it was frozen.
    pub fn sigma_of(&self, param: LossParam) -> f64 {
        self.free
            .iter()
            .position(|p| *p == param)
            .map_or(0.0, |i| self.sigma[i])
    }

    /// Fitted Q_i(⟨n⟩, T).
    pub fn model_qi(&self, n: f64, temperature: f64) -> Result<f64, SweepFitError> {
        Ok(physics::internal_q(n, temperature, &self.params)?)
    }

    /// Logarithmic slope `−d ln(1/Q_i) / d ln⟨n⟩` at the highest measured
    /// photon number. Zero once TLS loss has fully saturated.
    pub fn high_power_log_slope(&self) -> f64 {
        let t = self.temperature.unwrap_or(POWER_SWEEP_TEMPERATURE);
        let n = self.n_max;
        let p = &self.params;
        match (
            physics::delta_tls(n, t, p),
            physics::total_inverse_qi(n, t, p),
        ) {
            (Ok(tls), Ok(total)) if total > 0.0 => p.beta * (tls / total) * n / (n + p.n_c),
            _ => f64::NAN,
        }
    }
}

/// Log-slope above which a power sweep counts as not yet saturated at its
/// highest photon number.
pub const SATURATION_SLOPE_THRESHOLD: f64 = 0.05;

struct LossProblem<'a> {
    data: &'a SweepDataset,
    base: LossModelParams,
    free: &'a [LossParam],
    /// (n, T, 1/Q_i, σ_{1/Q_i}) per point.
    rows: Vec<(f64, f64, f64, f64)>,
}

impl<'a> LossProblem<'a> {
    fn new(data: &'a SweepDataset, base: LossModelParams, free: &'a [LossParam]) -> Self {
        let rows = (0..data.points.len())
            .map(|i| {
                let (n, t) = data.operating_point(i);
                let p = &data.points[i];
                (n, t, 1.0 / p.q_i, p.sigma_qi / (p.q_i * p.q_i))
            })
            .collect();
        Self {
            data,
            base,
            free,
            rows,
        }
    }

    fn params(&self, u: &[f64]) -> LossModelParams {
        let mut p = self.base;
        for (k, param) in self.free.iter().enumerate() {
            param.set(&mut p, param.natural(u[k]));
        }
        p
    }

    /// ∂(1/Q_i)/∂param in natural units.
    fn natural_derivative(param: LossParam, n: f64, t: f64, p: &LossModelParams) -> f64 {
        let tls_unit = || {
            physics::delta_tls(
                n,
                t,
                &LossModelParams {
                    f_delta_tls0: 1.0,
                    ..*p
                },
            )
            .unwrap_or(f64::NAN)
        };
        match param {
            LossParam::FDeltaTls0 => tls_unit(),
            LossParam::NC => {
                let tls = p.f_delta_tls0 * tls_unit();
                tls * p.beta * (n / p.n_c) / (1.0 + n / p.n_c) / p.n_c
            }
            LossParam::Beta => -p.f_delta_tls0 * tls_unit() * (n / p.n_c).ln_1p(),
            LossParam::DeltaQp0 => {
                physics::quasiparticle_factor(p.f0, p.t_c, t).unwrap_or(f64::NAN)
            }
            LossParam::DeltaOther => 1.0,
        }
    }

    fn natural_jacobian(&self, p: &LossModelParams) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.rows.len(), self.free.len());
        for (i, &(n, t, _, s)) in self.rows.iter().enumerate() {
            for (k, &param) in self.free.iter().enumerate() {
                jac[(i, k)] = Self::natural_derivative(param, n, t, p) / s;
            }
        }
        jac
    }
}

impl LeastSquaresProblem for LossProblem<'_> {
    fn num_params(&self) -> usize {
        self.free.len()
    }

    fn num_residuals(&self) -> usize {
        self.rows.len()
    }

    fn residuals(&self, u: &[f64], out: &mut [f64]) -> bool {
        let p = self.params(u);
        for (i, &(n, t, y, s)) in self.rows.iter().enumerate() {
            match physics::total_inverse_qi(n, t, &p) {
                Ok(m) => out[i] = (m - y) / s,
                Err(_) => return false,
            }
        }
        true
    }

    fn jacobian(&self, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let p = self.params(u);
        for (i, &(n, t, _, s)) in self.rows.iter().enumerate() {
            for (k, &param) in self.free.iter().enumerate() {
                // Chain rule onto the internal coordinate.
                let d_internal = match param {
                    LossParam::Beta => p.beta * (1.0 - p.beta),
                    other => other.get(&p),
                };
                jac[(i, k)] = Self::natural_derivative(param, n, t, &p) * d_internal / s;
            }
        }
        let _ = self.data;
        true
    }
}

fn check_point_count(data: &SweepDataset, options: &FitOptions) -> Result<(), SweepFitError> {
    let free = options.free.len();
    if free == 0 {
        return Err(SweepFitError::InvalidDataset("no free parameters".into()));
    }
    let required = options.min_points_per_param * free;
    if data.points.len() < required {
        return Err(SweepFitError::TooFewPoints {
            points: data.points.len(),
            free,
            required,
        });
    }
    Ok(())
}

fn base_params(data: &SweepDataset, options: &FitOptions) -> LossModelParams {
    let f = options.fixed;
    LossModelParams {
        f_delta_tls0: f.f_delta_tls0,
        n_c: f.n_c,
        beta: f.beta,
        delta_qp0: f.delta_qp0,
        delta_other: f.delta_other,
        t_c: data.t_c,
        f0: data.f0,
    }
}

fn geometric_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v.ln(), c + 1));
    (sum / count as f64).exp()
}

/// Starting point from the data: TLS amplitude from the low/high photon
/// number contrast, residual loss from the highest photon number, n_c at the
/// geometric centre of the photon-number range.
fn initial_params(data: &SweepDataset, options: &FitOptions) -> LossModelParams {
    let mut p = base_params(data, options);
    if options.use_initial {
        return p;
    }
    // Restrict to the coldest temperature when the sweep spans several.
    let coldest = (0..data.points.len())
        .map(|i| data.operating_point(i).1)
        .fold(f64::INFINITY, f64::min);
    let cold: Vec<(f64, f64)> = (0..data.points.len())
        .filter(|&i| data.operating_point(i).1 <= coldest * 1.5)
        .map(|i| (data.operating_point(i).0, 1.0 / data.points[i].q_i))
        .collect();
    let lowest = cold
        .iter()
        .cloned()
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    let highest =
        cold.iter().cloned().fold(
            (f64::NEG_INFINITY, 0.0),
            |a, b| if b.0 > a.0 { b } else { a },
        );

    let contrast = lowest.1 - highest.1;
    let tls = if contrast > 0.0 {
        contrast
    } else {
        0.1 * lowest.1
    };
    let other = if highest.1 > 0.0 {
        highest.1
    } else {
        0.1 * lowest.1
    };
    let n_values: Vec<f64> = (0..data.points.len())
        .map(|i| data.operating_point(i).0.max(1e-3))
        .collect();
    let mut sorted = n_values.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let n_c = geometric_mean(sorted.iter().cloned()).max(1e-3);

    if options.is_free(LossParam::FDeltaTls0) {
        p.f_delta_tls0 = tls;
    }
    if options.is_free(LossParam::DeltaOther) {
        p.delta_other = 0.5 * other;
        if !options.is_free(LossParam::FDeltaTls0) {
            p.delta_other = other;
        }
    }
    if options.is_free(LossParam::NC) {
        p.n_c = n_c;
    }
    if options.is_free(LossParam::Beta) {
        p.beta = 0.5;
    }
    if options.is_free(LossParam::DeltaQp0) {
        // Excess loss at the hottest point attributed to quasiparticles.
        let hottest = (0..data.points.len())
            .max_by(|&a, &b| {
                data.operating_point(a)
                    .1
                    .total_cmp(&data.operating_point(b).1)
            })
            .unwrap_or(0);
        let (n, t) = data.operating_point(hottest);
        let without_qp = LossModelParams {
            delta_qp0: 0.0,
            ..p
        };
        let predicted = physics::total_inverse_qi(n, t, &without_qp).unwrap_or(0.0);
        let excess = 1.0 / data.points[hottest].q_i - predicted;
        let factor = physics::quasiparticle_factor(p.f0, p.t_c, t).unwrap_or(0.0);
        p.delta_qp0 = if factor > 0.0 && excess > 0.0 {
            excess / factor
        } else {
            1e-12
        };
    }
    p
}

fn adjusted_options(data: &SweepDataset, options: &FitOptions) -> (FitOptions, bool) {
    let free = options.free.len();
    let short = data.points.len() < options.min_points_per_param * free;
    let enough_without = data.points.len() >= options.min_points_per_param * free.saturating_sub(1);
    if options.auto_freeze_beta && options.is_free(LossParam::Beta) && short && enough_without {
        log::info!(
            "{} points are too few to float beta; holding it at {}",
            data.points.len(),
            options.fixed.beta
        );
        let beta = options.fixed.beta;
        (options.clone().with_frozen(LossParam::Beta, beta), true)
    } else {
        (options.clone(), false)
    }
}

fn run_fit(data: &SweepDataset, options: &FitOptions) -> Result<FitOutcome, SweepFitError> {
    let start = initial_params(data, options);
    let problem = LossProblem::new(data, start, &options.free);
    let u0: Vec<f64> = options
        .free
        .iter()
        .map(|p| p.to_internal(p.get(&start)))
        .collect();
    let lm = LevenbergMarquardt {
        max_iterations: options.max_iterations,
        step_tolerance: options.step_tolerance,
        ..LevenbergMarquardt::default()
    };
    let report = lm.minimize(&problem, &u0);
    if !report.termination.converged() {
        return Err(SweepFitError::NotConverged(format!(
            "{:?} after {} iterations, cost {:e}, scaled gradient {:e}",
            report.termination, report.iterations, report.cost, report.gradient_norm
        )));
    }
    let params = problem.params(&report.params);
    params.validate()?;

    let jac = problem.natural_jacobian(&params);
    let cov = covariance_from_normal(&jac.tr_mul(&jac));
    let k = options.free.len();
    let covariance: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| cov[(i, j)]).collect())
        .collect();
    let sigma = (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let dof = (data.points.len() - k).max(1) as f64;
    let (x_min, x_max) = data.x_range();
    let n_max = (0..data.points.len())
        .map(|i| data.operating_point(i).0)
        .fold(0.0, f64::max);

    Ok(FitOutcome {
        kind: data.kind,
        params,
        free: options.free.clone(),
        covariance,
        sigma,
        reduced_chi_square: 2.0 * report.cost / dof,
        residuals: report.residuals,
        iterations: report.iterations,
        termination: report.termination,
        gradient_norm: report.gradient_norm,
        x_min,
        x_max,
        n_max,
        temperature: data.fixed_temperature,
        beta_auto_frozen: false,
    })
}

/// Fits the saturable TLS model to Q_i versus ⟨n⟩ at fixed temperature.
pub fn fit_power_sweep(
    data: &SweepDataset,
    options: &FitOptions,
) -> Result<FitOutcome, SweepFitError> {
    if data.kind != SweepKind::PowerSweep {
        return Err(SweepFitError::InvalidDataset(
            "expected a power sweep".into(),
        ));
    }
    data.validate()?;
    let (lo, hi) = data.x_range();
    let decades = (hi / lo).log10();
    if decades < options.min_decades {
        return Err(SweepFitError::InsufficientCoverage {
            decades,
            required: options.min_decades,
        });
    }
    let (options, frozen) = adjusted_options(data, options);
    check_point_count(data, &options)?;
    let mut outcome = run_fit(data, &options)?;
    outcome.beta_auto_frozen = frozen;
    Ok(outcome)
}

/// Joint fit of the full loss model across all photon-number branches of a
/// temperature sweep.
pub fn fit_temperature_sweep(
    data: &SweepDataset,
    options: &FitOptions,
) -> Result<FitOutcome, SweepFitError> {
    if data.kind != SweepKind::TemperatureSweep {
        return Err(SweepFitError::InvalidDataset(
            "expected a temperature sweep".into(),
        ));
    }
    data.validate()?;
    let shape_free = [LossParam::FDeltaTls0, LossParam::NC, LossParam::Beta]
        .iter()
        .filter(|p| options.is_free(**p))
        .count();
    let branches = data.distinct_branches();
    if branches < shape_free {
        return Err(SweepFitError::NotIdentifiable(format!(
            "{branches} photon-number branch(es) cannot separate {shape_free} free TLS parameters; \
             freeze n_c and/or beta (e.g. from a power sweep)"
        )));
    }
    check_point_count(data, options)?;
    run_fit(data, options)
}

/// Dispatches on the dataset kind with the matching default options.
pub fn fit_sweep(data: &SweepDataset) -> Result<FitOutcome, SweepFitError> {
    match data.kind {
        SweepKind::PowerSweep => fit_power_sweep(data, &FitOptions::power_sweep()),
        SweepKind::TemperatureSweep => {
            fit_temperature_sweep(data, &FitOptions::temperature_sweep())
        }
    }
}
