//! Physical constants (CODATA 2018 exact / recommended values) and unit helpers.
//!
//! Everything inside the crate is SI. dBm, GHz and mK only appear at the
//! edges (file metadata, CLI flags, rendered tables).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// BCS weak-coupling ratio Δ₀ / (k_B T_C).
pub const BCS_GAP_RATIO: f64 = 1.764;

/// Mixing-chamber temperature used for every power sweep, K.
pub const POWER_SWEEP_TEMPERATURE: f64 = 25.7e-3;

/// Tantalum film critical temperature, K.
pub const TANTALUM_TC: f64 = 4.4;

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Superconducting gap Δ₀ = 1.764 k_B T_C, in joules.
pub fn bcs_gap(t_c: f64) -> f64 {
    BCS_GAP_RATIO * K_B * t_c
}
