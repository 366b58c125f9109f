//! Extract Q_i, |Q_c| and φ from a single noisy S21 trace.
//!
//! cargo run --release --example circle_fit

use resloss::circle::{extract_quality_factors, remove_cable_delay};
use resloss::physics::MeasurementContext;
use resloss::synth::{linewidth_grid, synthesize_trace, ForwardParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = ForwardParams::noiseless(6.34e9, 2.14e6, 4e5, 0.2)
        .with_environment(0.8, 0.4, 45e-9)
        .with_noise(30.0, 7);
    let grid = linewidth_grid(truth.f_r, truth.q_l(), 10.0, 512);
    let trace = synthesize_trace(&truth, &grid, MeasurementContext::from_dbm(-120.0, 0.0257)?)?;

    let (_, tau) = remove_cable_delay(&trace)?;
    println!("circularity delay estimate: {:.2} ns", tau * 1e9);

    let fit = extract_quality_factors(&trace)?;
    let s = &fit.sigma;
    println!("{:<10} {:>14} {:>14} {:>12}", "", "truth", "fit", "sigma");
    let rows = [
        ("f_r [Hz]", truth.f_r, fit.f_r, s.f_r),
        ("Q_l", truth.q_l(), fit.q_l, s.q_l),
        ("|Q_c|", truth.q_c_mag, fit.q_c_mag, s.q_c_mag),
        ("phi [rad]", truth.phi, fit.phi, s.phi),
        ("Q_i", truth.q_i, fit.q_i, s.q_i),
    ];
    for (name, t, f, e) in rows {
        println!("{name:<10} {t:>14.6e} {f:>14.6e} {e:>12.3e}");
    }
    println!(
        "delay {:.2} ns, circle rms {:.2e}, edge warning {}",
        fit.env_delay * 1e9,
        fit.circle_rms,
        fit.edge_warning
    );
    Ok(())
}
