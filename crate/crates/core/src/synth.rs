//! Forward simulation of S21 traces and Q_i sweeps from known parameters.
//!
//! The notch-port response is written out here independently of the circle
//! fitter so that round trips exercise two separate implementations.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circle::{extract_quality_factors, ResonanceTrace};
use crate::constants::{dbm_to_watts, POWER_SWEEP_TEMPERATURE};
use crate::error::SynthError;
use crate::physics::{self, LossModelParams, MeasurementContext, PhotonNumberConvention};
use crate::sweep::{SweepDataset, SweepPoint};

/// Parameters of one synthetic notch-port resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardParams {
    pub f_r: f64,
    pub q_i: f64,
    pub q_c_mag: f64,
    pub phi: f64,
    pub env_delay: f64,
    pub env_amp: f64,
    pub env_phase: f64,
    /// Baseline-power to noise-power ratio in dB; `f64::INFINITY` for no noise.
    pub noise_snr_db: f64,
    pub rng_seed: u64,
}

impl ForwardParams {
    /// Unit-amplitude, zero-delay, noiseless resonance.
    pub fn noiseless(f_r: f64, q_i: f64, q_c_mag: f64, phi: f64) -> Self {
        Self {
            f_r,
            q_i,
            q_c_mag,
            phi,
            env_delay: 0.0,
            env_amp: 1.0,
            env_phase: 0.0,
            noise_snr_db: f64::INFINITY,
            rng_seed: 0,
        }
    }

    pub fn with_environment(mut self, amp: f64, phase: f64, delay: f64) -> Self {
        self.env_amp = amp;
        self.env_phase = phase;
        self.env_delay = delay;
        self
    }

    pub fn with_noise(mut self, snr_db: f64, seed: u64) -> Self {
        self.noise_snr_db = snr_db;
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidParams(m.to_string()));
        if !(self.f_r > 0.0 && self.f_r.is_finite()) {
            return bad("f_r must be positive and finite");
        }
        if !(self.q_i > 0.0 && self.q_c_mag > 0.0) || !self.q_c_mag.is_finite() {
            return bad("quality factors must be positive");
        }
        if !(self.phi.abs() < std::f64::consts::FRAC_PI_2) {
            return bad("|phi| must be below pi/2");
        }
        if !(self.env_amp > 0.0 && self.env_amp.is_finite())
            || !self.env_phase.is_finite()
            || !self.env_delay.is_finite()
        {
            return bad("environment must be finite with positive amplitude");
        }
        if !(self.noise_snr_db > 0.0) {
            return bad("noise_snr_db must be positive or infinite");
        }
        Ok(())
    }

    pub fn q_l(&self) -> f64 {
        1.0 / (1.0 / self.q_i + self.phi.cos() / self.q_c_mag)
    }

    /// Noise-free S21 at frequency `f`.
    pub fn response(&self, f: f64) -> Complex64 {
        let q_l = self.q_l();
        let detuning = Complex64::new(1.0, 2.0 * q_l * (f / self.f_r - 1.0));
        let dip = Complex64::from_polar(q_l / self.q_c_mag, self.phi) / detuning;
        let env = Complex64::from_polar(self.env_amp, self.env_phase)
            * Complex64::from_polar(1.0, -TAU * f * self.env_delay);
        env * (1.0 - dip)
    }

    /// Standard deviation of each of the real and imaginary noise components.
    pub fn noise_sigma(&self) -> f64 {
        if self.noise_snr_db.is_infinite() {
            0.0
        } else {
            self.env_amp / (2.0 * 10f64.powf(self.noise_snr_db / 10.0)).sqrt()
        }
    }
}

/// Evenly spaced grid of `points` frequencies covering `linewidths` loaded
/// linewidths (`f_r/Q_l` each) centred on `f_r`.
pub fn linewidth_grid(f_r: f64, q_l: f64, linewidths: f64, points: usize) -> Vec<f64> {
    let span = linewidths * f_r / q_l;
    let step = span / (points.max(2) - 1) as f64;
    (0..points)
        .map(|k| f_r - 0.5 * span + k as f64 * step)
        .collect()
}

/// Synthesizes one S21 trace on `grid`, with complex Gaussian noise when the
/// SNR is finite. Deterministic for a given seed.
pub fn synthesize_trace(
    p: &ForwardParams,
    grid: &[f64],
    context: MeasurementContext,
) -> Result<ResonanceTrace, SynthError> {
    p.validate()?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SynthError::InvalidParams(
            "grid must be strictly increasing".into(),
        ));
    }
    let (f_min, f_max) = (grid[0], grid[grid.len() - 1]);
    if !(f_min <= p.f_r && p.f_r <= f_max) {
        return Err(SynthError::GridDoesNotSpan {
            f_r: p.f_r,
            f_min,
            f_max,
        });
    }
    let sigma = p.noise_sigma();
    let mut rng = ChaCha20Rng::seed_from_u64(p.rng_seed);
    let s21 = grid
        .iter()
        .map(|&f| {
            let clean = p.response(f);
            if sigma == 0.0 {
                clean
            } else {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                clean + Complex64::new(re, im) * sigma
            }
        })
        .collect();
    ResonanceTrace::new(grid.to_vec(), s21, context)
        .map_err(|e| SynthError::InvalidParams(e.to_string()))
}

/// Layout of a synthetic chip: λ/4 resonators side-coupled to one feedline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipSpec {
    /// Target resonance frequencies, Hz.
    pub f0: Vec<f64>,
    pub cpw_width_um: f64,
    pub cpw_gap_um: f64,
    pub q_c_mag: f64,
    pub phi: f64,
}

impl Default for ChipSpec {
    fn default() -> Self {
        Self {
            f0: vec![5.72e9, 6.03e9, 6.34e9, 6.61e9, 6.88e9],
            cpw_width_um: 9.0,
            cpw_gap_um: 5.0,
            q_c_mag: 2e5,
            phi: 0.1,
        }
    }
}

impl ChipSpec {
    pub const BAND: (f64, f64) = (5.5e9, 7.0e9);

    pub fn resonator_count(&self) -> usize {
        self.f0.len()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.f0.is_empty() {
            return Err(SynthError::InvalidParams("chip has no resonators".into()));
        }
        let mut sorted = self.f0.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(SynthError::InvalidParams(
                "resonance frequencies must be distinct".into(),
            ));
        }
        if sorted
            .iter()
            .any(|f| !(Self::BAND.0..=Self::BAND.1).contains(f))
        {
            return Err(SynthError::InvalidParams(
                "resonance frequency outside 5.5-7.0 GHz".into(),
            ));
        }
        if !(self.q_c_mag > 0.0) || !(self.phi.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(SynthError::InvalidParams("invalid coupling".into()));
        }
        Ok(())
    }
}

/// Noise model for synthetic Q_i points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QiNoise {
    /// Exact values, reported with a nominal 1% uncertainty.
    None,
    /// Multiplicative Gaussian noise with the given relative σ.
    Relative(f64),
    /// Relative σ looked up from the trace-level SNR (dB) and circle diameter.
    TraceSnr(f64),
}

/// Relative σ reported for [`QiNoise::None`].
pub const NOMINAL_RELATIVE_SIGMA: f64 = 0.01;

/// Monte Carlo calibration of the relative Q_i scatter of the circle fit at
/// 0 dB SNR, as a function of the normalized circle diameter Q_l/|Q_c|.
/// Scatter scales as `10^(−SNR/20)` once the noise is small against the
/// circle; calibrated at 60 dB. 512 points over 10 linewidths, φ = 0.1.
/// Regenerate with the `calibrate_noise` example.
pub const QI_SIGMA_LOOKUP: [(f64, f64); 7] = [
    (0.05, 3.776),
    (0.1, 1.917),
    (0.2, 1.001),
    (0.4, 0.579),
    (0.6, 0.512),
    (0.8, 0.704),
    (0.95, 2.178),
];

/// Relative Q_i uncertainty for a trace at `snr_db` with diameter `q_l/q_c`,
/// interpolated log-log in the lookup table.
pub fn relative_qi_sigma(snr_db: f64, diameter: f64) -> f64 {
    let table = &QI_SIGMA_LOOKUP;
    let d = diameter.clamp(table[0].0, table[table.len() - 1].0);
    let k = table
        .windows(2)
        .position(|w| d <= w[1].0)
        .unwrap_or(table.len() - 2);
    let (a, b) = (table[k], table[k + 1]);
    let t = (d / a.0).ln() / (b.0 / a.0).ln();
    let at_zero_db = (a.1.ln() + t * (b.1 / a.1).ln()).exp();
    at_zero_db * 10f64.powf(-snr_db / 20.0)
}

/// Runs `trials` noisy circle fits of `base` at `snr_db` and returns the
/// sample standard deviation of the recovered Q_i relative to the truth.
pub fn calibrate_relative_qi_sigma(
    base: &ForwardParams,
    snr_db: f64,
    points: usize,
    trials: usize,
    seed: u64,
) -> Result<f64, SynthError> {
    let grid = linewidth_grid(base.f_r, base.q_l(), 10.0, points);
    let context = MeasurementContext::new(1e-15, POWER_SWEEP_TEMPERATURE)?;
    let mut rel = Vec::with_capacity(trials);
    for t in 0..trials {
        let p = base.with_noise(snr_db, seed.wrapping_add(t as u64));
        let trace = synthesize_trace(&p, &grid, context)?;
        if let Ok(fit) = extract_quality_factors(&trace) {
            rel.push(fit.q_i / base.q_i - 1.0);
        }
    }
    let ms = crate::sweep::mean_std(&rel)
        .ok_or_else(|| SynthError::InvalidParams("every calibration fit failed".into()))?;
    Ok((ms.std * ms.std + ms.mean * ms.mean).sqrt())
}

/// Options for [`synthesize_power_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepOptions {
    pub temperature: f64,
    pub phi: f64,
    /// Solve ⟨n⟩ self-consistently with Q_l(Q_i(⟨n⟩)). When off, Q_l uses the
    /// zero-photon Q_i.
    pub self_consistent: bool,
    pub photon: PhotonNumberConvention,
    pub noise: QiNoise,
    pub seed: u64,
}

impl Default for PowerSweepOptions {
    fn default() -> Self {
        Self {
            temperature: POWER_SWEEP_TEMPERATURE,
            phi: 0.1,
            self_consistent: true,
            photon: PhotonNumberConvention::default(),
            noise: QiNoise::None,
            seed: 0,
        }
    }
}

fn loaded_q(q_i: f64, q_c: f64, phi: f64) -> f64 {
    1.0 / (1.0 / q_i + phi.cos() / q_c)
}

/// Mean photon number at applied power `p_app` (W), solving the coupling
/// between ⟨n⟩ and Q_l(Q_i(⟨n⟩)) by bisection in ln⟨n⟩.
pub fn solve_photon_number(
    p_true: &LossModelParams,
    q_c: f64,
    p_app: f64,
    options: &PowerSweepOptions,
) -> Result<f64, SynthError> {
    let t = options.temperature;
    let map = |n: f64| -> Result<f64, SynthError> {
        let q_i = physics::internal_q(n, t, p_true)?;
        Ok(options
            .photon
            .photon_number(p_app, p_true.f0, loaded_q(q_i, q_c, options.phi), q_c)?)
    };
    let low = map(0.0)?;
    if !options.self_consistent {
        return Ok(low);
    }
    let high = map(1e300)?;
    if high <= low * (1.0 + 1e-15) {
        return Ok(low);
    }
    // g(n) = ln n − ln map(n) is negative at `low` and non-negative at `high`.
    let (mut a, mut b) = (low.ln(), high.ln());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let n = mid.exp();
        let g = mid - map(n)?.ln();
        if g < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            let n = (0.5 * (a + b)).exp();
            let residual = (map(n)? - n).abs() / n;
            if residual <= 1e-10 {
                return Ok(n);
            }
            break;
        }
    }
    Err(SynthError::FixedPointNotConverged {
        p_app_dbm: crate::constants::watts_to_dbm(p_app),
    })
}

fn noisy_point(q_true: f64, noise: QiNoise, diameter: f64, rng: &mut ChaCha20Rng) -> (f64, f64) {
    let rel = match noise {
        QiNoise::None => return (q_true, NOMINAL_RELATIVE_SIGMA * q_true),
        QiNoise::Relative(r) => r,
        QiNoise::TraceSnr(snr) => relative_qi_sigma(snr, diameter),
    };
    let z: f64 = StandardNormal.sample(rng);
    // Clamp keeps pathological draws physical; at a few percent it never binds.
    let q = q_true * (1.0 + rel * z).max(0.05);
    (q, rel * q)
}

/// Q_i versus ⟨n⟩ for one resonator driven at each power in `powers_dbm`.
pub fn synthesize_power_sweep(
    p_true: &LossModelParams,
    q_c: f64,
    powers_dbm: &[f64],
    options: &PowerSweepOptions,
) -> Result<SweepDataset, SynthError> {
    p_true.validate()?;
    if !(q_c > 0.0) {
        return Err(SynthError::InvalidParams("q_c must be positive".into()));
    }
    if let Some(p) = powers_dbm.iter().find(|p| !(-170.0..=-60.0).contains(*p)) {
        return Err(SynthError::InvalidParams(format!(
            "power {p} dBm outside [-170, -60]"
        )));
    }
    if let QiNoise::Relative(r) = options.noise {
        if !(r > 0.0 && r < 1.0) {
            return Err(SynthError::InvalidParams(
                "relative noise must lie in (0, 1)".into(),
            ));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(options.seed);
    let mut points = Vec::with_capacity(powers_dbm.len());
    for &dbm in powers_dbm {
        let n = solve_photon_number(p_true, q_c, dbm_to_watts(dbm), options)?;
        let q_true = physics::internal_q(n, options.temperature, p_true)?;
        let diameter = loaded_q(q_true, q_c, options.phi) / q_c;
        let (q_i, sigma_qi) = noisy_point(q_true, options.noise, diameter, &mut rng);
        points.push(SweepPoint {
            x: n,
            q_i,
            sigma_qi,
            branch: 0,
        });
    }
    let mut data = SweepDataset::power_sweep(points, p_true.f0);
    data.fixed_temperature = Some(options.temperature);
    data.t_c = p_true.t_c;
    Ok(data)
}

/// Q_i versus T on each fixed photon-number branch.
pub fn synthesize_temperature_sweep(
    p_true: &LossModelParams,
    n_branches: &[f64],
    temps: &[f64],
    noise: QiNoise,
    seed: u64,
) -> Result<SweepDataset, SynthError> {
    p_true.validate()?;
    if let Some(t) = temps.iter().find(|t| !(**t > 0.0 && **t <= 1.2)) {
        return Err(SynthError::InvalidParams(format!(
            "temperature {t} K outside (0, 1.2]"
        )));
    }
    if n_branches.iter().any(|n| !(*n >= 0.0 && n.is_finite())) {
        return Err(SynthError::InvalidParams(
            "branch photon numbers must be non-negative".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_branches.len() * temps.len());
    for (b, &n) in n_branches.iter().enumerate() {
        for &t in temps {
            let q_true = physics::internal_q(n, t, p_true)?;
            let (q_i, sigma_qi) = noisy_point(q_true, noise, 0.5, &mut rng);
            points.push(SweepPoint {
                x: t,
                q_i,
                sigma_qi,
                branch: b,
            });
        }
    }
    let mut data = SweepDataset::temperature_sweep(points, n_branches.to_vec(), p_true.f0);
    data.t_c = p_true.t_c;
    Ok(data)
}

/// Evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Full S21 traces of a power sweep: one trace per power, with Q_i taken
/// from the loss model at the self-consistent ⟨n⟩.
pub fn synthesize_power_sweep_traces(
    p_true: &LossModelParams,
    chip: &ChipSpec,
    powers_dbm: &[f64],
    options: &PowerSweepOptions,
    snr_db: f64,
    points: usize,
) -> Result<Vec<ResonanceTrace>, SynthError> {
    p_true.validate()?;
    let mut traces = Vec::with_capacity(powers_dbm.len());
    for (k, &dbm) in powers_dbm.iter().enumerate() {
        let p_app = dbm_to_watts(dbm);
        let n = solve_photon_number(p_true, chip.q_c_mag, p_app, options)?;
        let q_i = physics::internal_q(n, options.temperature, p_true)?;
        let fp = ForwardParams::noiseless(p_true.f0, q_i, chip.q_c_mag, chip.phi)
            .with_environment(0.8, 0.4, 45e-9)
            .with_noise(
                snr_db,
                options.seed.wrapping_mul(1_000_003).wrapping_add(k as u64),
            );
        let grid = linewidth_grid(p_true.f0, fp.q_l(), 10.0, points);
        let context = MeasurementContext::new(p_app, options.temperature)?;
        traces.push(synthesize_trace(&fp, &grid, context)?);
    }
    Ok(traces)
}
