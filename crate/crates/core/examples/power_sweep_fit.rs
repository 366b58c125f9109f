//! Full power-sweep analysis: synthesize traces over 90 dB of drive power,
//! circle-fit each one, convert power to photon number and fit the loss model.
//!
//! cargo run --release --example power_sweep_fit

use resloss::circle::extract_quality_factors;
use resloss::constants::TANTALUM_TC;
use resloss::physics::{photon_number, LossModelParams};
use resloss::sweep::{fit_power_sweep, FitOptions, LossParam, SweepDataset, SweepPoint};
use resloss::synth::{linspace, synthesize_power_sweep_traces, ChipSpec, PowerSweepOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let chip = ChipSpec {
        f0: vec![6.34e9],
        ..ChipSpec::default()
    };
    let truth = LossModelParams::new(
        0.58e-6,
        2.0,
        0.5,
        0.0,
        1.0 / 13.36e6,
        TANTALUM_TC,
        chip.f0[0],
    )?;
    let powers = linspace(-162.0, -72.0, 19);
    let options = PowerSweepOptions {
        seed: 3,
        ..PowerSweepOptions::default()
    };
    let traces = synthesize_power_sweep_traces(&truth, &chip, &powers, &options, 40.0, 512)?;

    let mut points = Vec::new();
    for trace in &traces {
        let fit = extract_quality_factors(trace)?;
        let n = photon_number(trace.context.p_app, fit.f_r, fit.q_l, fit.q_c_mag)?;
        println!(
            "{:7.1} dBm  <n> = {n:9.3e}  Q_i = {:.4e} ± {:.1e}",
            trace.context.p_app_dbm(),
            fit.q_i,
            fit.sigma.q_i
        );
        points.push(SweepPoint {
            x: n,
            q_i: fit.q_i,
            sigma_qi: fit.sigma.q_i,
            branch: 0,
        });
    }

    let outcome = fit_power_sweep(
        &SweepDataset::power_sweep(points, chip.f0[0]),
        &FitOptions::power_sweep(),
    )?;
    println!(
        "\nbeta held at 0.5 for a 19-point sweep: {}",
        outcome.beta_auto_frozen
    );
    for param in [LossParam::FDeltaTls0, LossParam::NC, LossParam::DeltaOther] {
        println!(
            "{param:?}: {:.4e} ± {:.1e} (truth {:.4e})",
            param.get(&outcome.params),
            outcome.sigma_of(param),
            param.get(&truth)
        );
    }
    println!("reduced chi-square {:.2}", outcome.reduced_chi_square);
    Ok(())
}
