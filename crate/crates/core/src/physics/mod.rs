//! Loss models for superconducting CPW resonators.
//!
//! The internal loss is the sum of three channels,
//!
//! ```text
//! 1/Q_i(n, T) = δ_TLS(n, T) + δ_QP(T) + δ_other
//! δ_TLS(n, T) = Fδ⁰_TLS · tanh(ħω₀ / 2k_BT) / (1 + n/n_c)^β
//! δ_QP(T)     = δ⁰_QP · sinh(ξ) K₀(ξ) / exp(Δ₀ / k_BT),   ξ = ħω₀ / 2k_BT
//! ```
//!
//! with Δ₀ = 1.764 k_B T_C. Everything here is a pure function of its
//! arguments; fitting lives in [`crate::sweep`].

pub mod bessel;

use serde::{Deserialize, Serialize};

use crate::constants::{bcs_gap, dbm_to_watts, HBAR, K_B};
use crate::error::PhysicsError;

pub use bessel::{bessel_k0, bessel_k0_scaled, sinh_k0};

fn finite(name: &'static str, value: f64) -> Result<f64, PhysicsError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(PhysicsError::NonFinite { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, PhysicsError> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(PhysicsError::NonPositive { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, PhysicsError> {
    finite(name, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(PhysicsError::Negative { name, value })
    }
}

fn temperature(value: f64) -> Result<f64, PhysicsError> {
    finite("temperature", value)?;
    if value == 0.0 {
        return Err(PhysicsError::ZeroTemperature);
    }
    positive("temperature", value)
}

/// Physical loss parameters of one resonator.
///
/// The filling factor F never appears on its own, so only the product
/// Fδ⁰_TLS is stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModelParams {
    /// Fδ⁰_TLS, filling-factor-weighted linear TLS loss tangent.
    pub f_delta_tls0: f64,
    /// Critical photon number n_c.
    pub n_c: f64,
    /// TLS saturation exponent β, in (0, 1].
    pub beta: f64,
    /// Linear quasiparticle absorption δ⁰_QP.
    pub delta_qp0: f64,
    /// Power- and temperature-independent residual loss.
    pub delta_other: f64,
    /// Critical temperature, K.
    pub t_c: f64,
    /// Resonance frequency, Hz.
    pub f0: f64,
}

impl LossModelParams {
    pub fn new(
        f_delta_tls0: f64,
        n_c: f64,
        beta: f64,
        delta_qp0: f64,
        delta_other: f64,
        t_c: f64,
        f0: f64,
    ) -> Result<Self, PhysicsError> {
        let p = Self {
            f_delta_tls0,
            n_c,
            beta,
            delta_qp0,
            delta_other,
            t_c,
            f0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        non_negative("f_delta_tls0", self.f_delta_tls0)?;
        non_negative("delta_qp0", self.delta_qp0)?;
        non_negative("delta_other", self.delta_other)?;
        positive("n_c", self.n_c)?;
        finite("beta", self.beta)?;
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(PhysicsError::BetaOutOfRange(self.beta));
        }
        positive("t_c", self.t_c)?;
        positive("f0", self.f0)?;
        Ok(())
    }

    /// Superconducting gap Δ₀ in joules.
    pub fn gap(&self) -> f64 {
        bcs_gap(self.t_c)
    }

    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f0
    }
}

/// Drive power and bath temperature for one measured trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementContext {
    /// Applied power at the resonator input, W.
    pub p_app: f64,
    /// Mixing-chamber temperature, K.
    pub temperature: f64,
}

impl MeasurementContext {
    pub fn new(p_app: f64, temperature_k: f64) -> Result<Self, PhysicsError> {
        positive("p_app", p_app)?;
        temperature(temperature_k)?;
        Ok(Self {
            p_app,
            temperature: temperature_k,
        })
    }

    pub fn from_dbm(p_app_dbm: f64, temperature_k: f64) -> Result<Self, PhysicsError> {
        finite("p_app_dbm", p_app_dbm)?;
        Self::new(dbm_to_watts(p_app_dbm), temperature_k)
    }

    pub fn p_app_dbm(&self) -> f64 {
        crate::constants::watts_to_dbm(self.p_app)
    }
}

/// ξ = ħω₀ / (2 k_B T), the photon-to-thermal energy ratio.
pub fn thermal_ratio(f0: f64, temperature: f64) -> f64 {
    HBAR * 2.0 * std::f64::consts::PI * f0 / (2.0 * K_B * temperature)
}

/// TLS thermal polarization factor tanh(ħω₀ / 2k_BT).
pub fn tls_thermal_factor(f0: f64, temperature_k: f64) -> Result<f64, PhysicsError> {
    positive("f0", f0)?;
    let t = temperature(temperature_k)?;
    Ok(thermal_ratio(f0, t).tanh())
}

/// Saturation factor (1 + n/n_c)^(−β).
pub fn tls_saturation_factor(n: f64, n_c: f64, beta: f64) -> f64 {
    (1.0 + n / n_c).powf(-beta)
}

/// Saturable two-level-system loss δ_TLS(n, T).
pub fn delta_tls(n: f64, temperature_k: f64, p: &LossModelParams) -> Result<f64, PhysicsError> {
    non_negative("n", n)?;
    let thermal = tls_thermal_factor(p.f0, temperature_k)?;
    Ok(p.f_delta_tls0 * thermal * tls_saturation_factor(n, p.n_c, p.beta))
}

/// δ_TLS in the T → 0 limit, where the tanh factor is exactly one.
pub fn delta_tls_zero_temperature_limit(n: f64, p: &LossModelParams) -> Result<f64, PhysicsError> {
    non_negative("n", n)?;
    Ok(p.f_delta_tls0 * tls_saturation_factor(n, p.n_c, p.beta))
}

/// Bracketed thermal-quasiparticle factor sinh(ξ) K₀(ξ) exp(−Δ₀ / k_BT).
pub fn quasiparticle_factor(f0: f64, t_c: f64, temperature_k: f64) -> Result<f64, PhysicsError> {
    positive("f0", f0)?;
    positive("t_c", t_c)?;
    let t = temperature(temperature_k)?;
    let xi = thermal_ratio(f0, t);
    let gap_over_kt = bcs_gap(t_c) / (K_B * t);
    let boltzmann = (-gap_over_kt).exp();
    if boltzmann == 0.0 {
        return Ok(0.0);
    }
    let shk = sinh_k0(xi);
    if shk.is_finite() {
        Ok(shk * boltzmann)
    } else {
        Ok((shk.ln() - gap_over_kt).exp())
    }
}

/// Thermal quasiparticle loss δ_QP(T).
pub fn delta_qp(temperature_k: f64, p: &LossModelParams) -> Result<f64, PhysicsError> {
    let factor = quasiparticle_factor(p.f0, p.t_c, temperature_k)?;
    if p.delta_qp0 == 0.0 {
        return Ok(0.0);
    }
    Ok(p.delta_qp0 * factor)
}

/// δ_QP in the T → 0 limit (exactly zero).
pub fn delta_qp_zero_temperature_limit(_p: &LossModelParams) -> f64 {
    0.0
}

/// Total internal loss 1/Q_i = δ_TLS + δ_QP + δ_other.
pub fn total_inverse_qi(
    n: f64,
    temperature_k: f64,
    p: &LossModelParams,
) -> Result<f64, PhysicsError> {
    let tls = delta_tls(n, temperature_k, p)?;
    let qp = delta_qp(temperature_k, p)?;
    Ok(tls + qp + p.delta_other)
}

/// Internal quality factor Q_i(n, T).
pub fn internal_q(n: f64, temperature_k: f64, p: &LossModelParams) -> Result<f64, PhysicsError> {
    Ok(1.0 / total_inverse_qi(n, temperature_k, p)?)
}

/// Mapping from applied power to mean intracavity photon number,
/// `⟨n⟩ = prefactor · Q_l² P_app / (ħ ω₀² Q_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonNumberConvention {
    pub prefactor: f64,
}

impl Default for PhotonNumberConvention {
    /// Side-coupled quarter-wave resonator.
    fn default() -> Self {
        Self { prefactor: 2.0 }
    }
}

impl PhotonNumberConvention {
    pub fn photon_number(
        &self,
        p_app: f64,
        f0: f64,
        q_l: f64,
        q_c: f64,
    ) -> Result<f64, PhysicsError> {
        positive("p_app", p_app)?;
        positive("f0", f0)?;
        positive("q_l", q_l)?;
        positive("q_c", q_c)?;
        positive("prefactor", self.prefactor)?;
        let omega = 2.0 * std::f64::consts::PI * f0;
        Ok(self.prefactor * q_l * q_l * p_app / (HBAR * omega * omega * q_c))
    }
}

/// Mean photon number under the default (side-coupled) convention.
pub fn photon_number(p_app: f64, f0: f64, q_l: f64, q_c: f64) -> Result<f64, PhysicsError> {
    PhotonNumberConvention::default().photon_number(p_app, f0, q_l, q_c)
}

/// Kinetic inductance per square from the normal-state sheet resistance,
/// `L_K = ħ R_□ / (π Δ₀)`, in henries per square.
pub fn kinetic_inductance(r_sheet: f64, t_c: f64) -> Result<f64, PhysicsError> {
    positive("r_sheet", r_sheet)?;
    positive("t_c", t_c)?;
    Ok(HBAR * r_sheet / (std::f64::consts::PI * bcs_gap(t_c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(f_delta_tls0: f64) -> LossModelParams {
        LossModelParams::new(f_delta_tls0, 10.0, 0.5, 1e-3, 5e-8, 4.4, 6.34e9).unwrap()
    }

    #[test]
    fn tls_low_power_low_temperature_limit() {
        let p = params(2.86e-6);
        let d = delta_tls(0.0, 1e-6, &p).unwrap();
        assert!(((d - 2.86e-6) / 2.86e-6).abs() < 1e-12);
        assert_eq!(delta_tls_zero_temperature_limit(0.0, &p).unwrap(), 2.86e-6);
    }

    #[test]
    fn tls_at_critical_photon_number() {
        let p = params(2.86e-6);
        let d = delta_tls(p.n_c, 1e-6, &p).unwrap();
        let want = 2.86e-6 / 2f64.sqrt();
        assert!(((d - want) / want).abs() < 1e-12);
        assert!((d - 2.0224e-6).abs() < 1e-10);
    }

    #[test]
    fn tls_thermal_factor_at_base_temperature() {
        // ħω₀/2k_BT at 6.34 GHz, 25.7 mK evaluated by hand.
        let xi = 1.054_571_817e-34 * 2.0 * std::f64::consts::PI * 6.34e9
            / (2.0 * 1.380_649e-23 * 25.7e-3);
        assert!((xi - 5.919_688_923_443_29).abs() < 1e-9);
        let p = params(1e-6);
        let d = delta_tls(0.0, 25.7e-3, &p).unwrap();
        assert!(((d - 1e-6) / 1e-6).abs() < 2e-5);
        assert!(d < 1e-6);
    }

    #[test]
    fn beta_half_matches_inverse_sqrt() {
        let p = params(1.3e-6);
        for n in [0.0, 0.3, 7.0, 1e3, 1e8] {
            let got = delta_tls_zero_temperature_limit(n, &p).unwrap();
            let want = 1.3e-6 * (1.0 + n / p.n_c).powf(-0.5);
            let ulps = (got - want).abs() / (want * f64::EPSILON);
            assert!(ulps <= 2.0, "n = {n}: {ulps} ulp");
        }
    }

    #[test]
    fn qp_vanishes_at_low_temperature() {
        let p = params(1e-6);
        let d = delta_qp(1e-3, &p).unwrap();
        assert!(d < 1e-300 * p.delta_qp0);
        let zero = LossModelParams {
            delta_qp0: 0.0,
            ..p
        };
        assert_eq!(delta_qp(0.9, &zero).unwrap(), 0.0);
        assert_eq!(delta_qp_zero_temperature_limit(&p), 0.0);
    }

    #[test]
    fn qp_factor_at_one_kelvin() {
        // sinh(0.1521…)·K0(0.1521…)·exp(−7.7616), arbitrary-precision reference.
        let got = quasiparticle_factor(6.34e9, 4.4, 1.0).unwrap();
        let want = 1.311_112_110_318_103_3e-4;
        assert!(((got - want) / want).abs() < 1e-10);
        assert!(((got - 1.30e-4) / 1.30e-4).abs() < 0.02);
    }

    #[test]
    fn total_is_plain_sum() {
        let p = params(0.58e-6);
        let (n, t) = (3.0, 0.4);
        let total = total_inverse_qi(n, t, &p).unwrap();
        let tls = delta_tls(n, t, &p).unwrap();
        let qp = delta_qp(t, &p).unwrap();
        assert_eq!(total, tls + qp + p.delta_other);
        let rest = total - tls - qp;
        assert!((rest - p.delta_other).abs() <= f64::EPSILON * total);
    }

    #[test]
    fn saturated_limit_leaves_residual_loss() {
        let mut p = params(1e-6);
        p.delta_other = 0.0;
        p.delta_qp0 = 0.0;
        let total = total_inverse_qi(1e30, 1e-6, &p).unwrap();
        assert!(total < 1e-18);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params(1e-6);
        assert_eq!(delta_tls(1.0, 0.0, &p), Err(PhysicsError::ZeroTemperature));
        assert!(delta_tls(f64::NAN, 0.1, &p).is_err());
        assert!(delta_tls(-1.0, 0.1, &p).is_err());
        assert!(delta_qp(f64::INFINITY, &p).is_err());
        assert!(LossModelParams::new(1e-6, 10.0, 0.0, 0.0, 0.0, 4.4, 6e9).is_err());
        assert!(LossModelParams::new(1e-6, 10.0, 1.2, 0.0, 0.0, 4.4, 6e9).is_err());
        assert!(LossModelParams::new(1e-6, 0.0, 0.5, 0.0, 0.0, 4.4, 6e9).is_err());
        assert!(LossModelParams::new(-1e-6, 1.0, 0.5, 0.0, 0.0, 4.4, 6e9).is_err());
        assert!(photon_number(1e-18, 6e9, 0.0, 1e5).is_err());
        assert!(MeasurementContext::from_dbm(-100.0, 0.0).is_err());
    }

    #[test]
    fn photon_number_examples() {
        let p = dbm_to_watts(-162.0);
        let n = photon_number(p, 6.0e9, 4.0e5, 8.0e5).unwrap();
        // 2 Q_l² P / (ħ ω² Q_c) by direct arithmetic
        let omega = 2.0 * std::f64::consts::PI * 6.0e9;
        let want =
            2.0 * 1.6e11 * 6.309_573_444_801_93e-20 / (1.054_571_817e-34 * omega * omega * 8.0e5);
        assert!(((n - want) / want).abs() < 1e-12);
        assert!((n - 0.168_392_053_480_327).abs() < 1e-9);
        let doubled = photon_number(2.0 * p, 6.0e9, 4.0e5, 8.0e5).unwrap();
        assert!((doubled / n - 2.0).abs() < 1e-14);
        let top = photon_number(dbm_to_watts(-72.0), 6.0e9, 4.0e5, 8.0e5).unwrap();
        assert!((top / n / 1e9 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kinetic_inductance_scaling() {
        let lk = kinetic_inductance(2.2, 4.4).unwrap();
        assert!(((lk - 6.891_510_607_749_6e-13) / lk).abs() < 1e-12);
        assert!((kinetic_inductance(4.4, 4.4).unwrap() / lk - 2.0).abs() < 1e-14);
        assert!((kinetic_inductance(2.2, 8.8).unwrap() / lk - 0.5).abs() < 1e-14);
    }
}
