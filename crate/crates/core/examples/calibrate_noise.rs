//! Regenerates the Q_i scatter lookup used for trace-SNR noise on synthetic
//! sweeps: Monte Carlo circle fits at a reference SNR, scaled to 0 dB.
//!
//! cargo run --release --example calibrate_noise

use resloss::synth::{calibrate_relative_qi_sigma, ForwardParams, QI_SIGMA_LOOKUP};

const REFERENCE_SNR_DB: f64 = 60.0;
const Q_C: f64 = 4e5;
const PHI: f64 = 0.1;

fn main() {
    println!("diameter  sigma@0dB  (current table)");
    for &(diameter, current) in &QI_SIGMA_LOOKUP {
        let q_l = diameter * Q_C;
        let q_i = 1.0 / (1.0 / q_l - PHI.cos() / Q_C);
        let base =
            ForwardParams::noiseless(6.34e9, q_i, Q_C, PHI).with_environment(0.8, 0.4, 45e-9);
        let rel = calibrate_relative_qi_sigma(&base, REFERENCE_SNR_DB, 512, 400, 11)
            .expect("calibration");
        let at_zero_db = rel * 10f64.powf(REFERENCE_SNR_DB / 20.0);
        println!("{diameter:8.2}  {at_zero_db:9.3}  ({current:.3})");
    }
}
