//! Temperature sweep at six fixed photon numbers, fitted jointly for the TLS
//! and quasiparticle channels.
//!
//! cargo run --release --example temperature_sweep_fit

use resloss::physics::LossModelParams;
use resloss::sweep::{fit_temperature_sweep, FitOptions, LossParam};
use resloss::synth::{linspace, synthesize_temperature_sweep, QiNoise};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = LossModelParams::new(0.58e-6, 100.0, 0.4, 5e-3, 7.5e-8, 4.4, 6.34e9)?;
    let branches: Vec<f64> = (1..=6).map(|k| 10f64.powi(k)).collect();
    let temps = linspace(0.025, 0.998, 20);
    let data = synthesize_temperature_sweep(&truth, &branches, &temps, QiNoise::Relative(0.02), 1)?;

    let fit = fit_temperature_sweep(&data, &FitOptions::temperature_sweep())?;
    for param in LossParam::ALL {
        println!(
            "{:<11} {:>11.4e} ± {:<9.2e} truth {:.4e}",
            format!("{param:?}"),
            param.get(&fit.params),
            fit.sigma_of(param),
            param.get(&truth)
        );
    }

    println!("\nT [mK]   Q_i at n = 1e1 ... 1e6");
    for t in [0.025, 0.2, 0.5, 0.8, 0.998] {
        let row: Vec<String> = branches
            .iter()
            .map(|&n| format!("{:.3e}", fit.model_qi(n, t).unwrap_or(f64::NAN)))
            .collect();
        println!("{:6.0}   {}", t * 1e3, row.join(" "));
    }
    Ok(())
}
