//! Evaluate the loss channels, the photon-number conversion and the kinetic
//! inductance directly.
//!
//! cargo run --example loss_model

use resloss::constants::{dbm_to_watts, TANTALUM_TC};
use resloss::physics::{delta_qp, delta_tls, kinetic_inductance, photon_number, LossModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = LossModelParams::new(0.58e-6, 100.0, 0.4, 5e-3, 7.5e-8, TANTALUM_TC, 6.34e9)?;

    println!("T [K]    d_TLS(n=10)  d_QP        1/Q_i");
    for t in [0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
        let tls = delta_tls(10.0, t, &p)?;
        let qp = delta_qp(t, &p)?;
        println!(
            "{t:<7}  {tls:.4e}   {qp:.4e}  {:.4e}",
            tls + qp + p.delta_other
        );
    }

    println!("\nP [dBm]  <n> (Q_l = 1.5e5, Q_c = 2e5)");
    for dbm in [-160.0, -140.0, -120.0, -100.0, -80.0] {
        println!(
            "{dbm:<7}  {:.3e}",
            photon_number(dbm_to_watts(dbm), p.f0, 1.5e5, 2e5)?
        );
    }

    let l_k = kinetic_inductance(0.9, TANTALUM_TC)?;
    println!("\nL_K for 0.9 ohm/sq film: {:.3} pH/sq", l_k * 1e12);
    Ok(())
}
