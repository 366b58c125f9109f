use proptest::prelude::*;

use resloss::constants::{bcs_gap, HBAR, K_B};
use resloss::physics::bessel::{bessel_k0, sinh_k0};
use resloss::physics::{
    delta_qp, delta_tls, internal_q, kinetic_inductance, photon_number, quasiparticle_factor,
    thermal_ratio, tls_saturation_factor, total_inverse_qi, LossModelParams,
};

/// K₀(x) = ∫₀^∞ exp(−x cosh t) dt; the trapezoid rule converges
/// geometrically for this integrand.
fn k0_by_quadrature(x: f64) -> f64 {
    let h = 1.0 / 64.0;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let term = (-x * t.cosh()).exp();
        sum += term;
        if term < 1e-300 || term < sum * 1e-18 {
            break;
        }
        t += h;
    }
    sum * h
}

fn params() -> impl Strategy<Value = LossModelParams> {
    (
        -7.0f64..-5.0,
        -0.5f64..3.0,
        0.1f64..1.0,
        -4.0f64..-1.0,
        -8.0f64..-6.0,
        4.0e9f64..8.0e9,
    )
        .prop_map(|(fd, nc, beta, qp, other, f0)| {
            LossModelParams::new(
                10f64.powf(fd),
                10f64.powf(nc),
                beta,
                10f64.powf(qp),
                10f64.powf(other),
                4.4,
                f0,
            )
            .unwrap()
        })
}

#[test]
fn bessel_k0_matches_integral_representation() {
    for x in [1e-3, 0.01, 0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 5.0, 10.0, 50.0] {
        let want = k0_by_quadrature(x);
        let got = bessel_k0(x);
        assert!((got / want - 1.0).abs() < 1e-7, "K0({x}) = {got} vs {want}");
    }
}

#[test]
fn quasiparticle_factor_matches_direct_evaluation() {
    for t in [0.1, 0.3, 0.6, 0.998, 1.2] {
        let xi = HBAR * std::f64::consts::TAU * 6.34e9 / (2.0 * K_B * t);
        let want = xi.sinh() * k0_by_quadrature(xi) * (-bcs_gap(4.4) / (K_B * t)).exp();
        let got = quasiparticle_factor(6.34e9, 4.4, t).unwrap();
        assert!((got / want - 1.0).abs() < 1e-7, "T = {t}");
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let p = LossModelParams::new(1e-6, 10.0, 0.5, 1e-3, 5e-8, 4.4, 6.34e9).unwrap();
    assert!(delta_tls(-1.0, 0.02, &p).is_err());
    assert!(delta_tls(1.0, 0.0, &p).is_err());
    assert!(photon_number(0.0, 6e9, 1e5, 2e5).is_err());
    assert!(kinetic_inductance(-1.0, 4.4).is_err());
    assert!(LossModelParams::new(-1e-6, 10.0, 0.5, 0.0, 5e-8, 4.4, 6.34e9).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn qi_rises_with_photon_number(p in params(), n in 0.0f64..1e8, step in 1.001f64..100.0, t in 0.01f64..1.2) {
        let a = internal_q(n, t, &p).unwrap();
        let b = internal_q(n * step + 1e-3, t, &p).unwrap();
        prop_assert!(b >= a);
    }

    #[test]
    fn tls_loss_falls_and_qp_loss_rises_with_temperature(p in params(), n in 0.0f64..1e6, t in 0.01f64..1.1, dt in 1e-3f64..0.1) {
        prop_assert!(delta_tls(n, t + dt, &p).unwrap() <= delta_tls(n, t, &p).unwrap());
        prop_assert!(delta_qp(t + dt, &p).unwrap() >= delta_qp(t, &p).unwrap());
    }

    #[test]
    fn total_loss_is_the_sum_of_channels(p in params(), n in 0.0f64..1e8, t in 0.01f64..1.2) {
        let parts = delta_tls(n, t, &p).unwrap() + delta_qp(t, &p).unwrap() + p.delta_other;
        prop_assert_eq!(total_inverse_qi(n, t, &p).unwrap(), parts);
        prop_assert!(total_inverse_qi(n, t, &p).unwrap() >= p.delta_other);
    }

    #[test]
    fn photon_number_scaling(p_app in 1e-20f64..1e-8, f0 in 4e9f64..8e9, q_l in 1e3f64..1e6, q_c in 1e4f64..1e7, k in 0.1f64..10.0) {
        let n = photon_number(p_app, f0, q_l, q_c).unwrap();
        let close = |a: f64, b: f64| (a / b - 1.0).abs() < 1e-12;
        prop_assert!(close(photon_number(k * p_app, f0, q_l, q_c).unwrap(), k * n));
        prop_assert!(close(photon_number(p_app, f0, k * q_l, q_c).unwrap(), k * k * n));
        prop_assert!(close(photon_number(p_app, f0, q_l, k * q_c).unwrap(), n / k));
        prop_assert!(close(photon_number(p_app, k * f0, q_l, q_c).unwrap(), n / (k * k)));
    }

    #[test]
    fn kinetic_inductance_scaling(r in 0.1f64..100.0, t_c in 0.5f64..10.0, k in 0.1f64..10.0) {
        let l = kinetic_inductance(r, t_c).unwrap();
        prop_assert!((kinetic_inductance(k * r, t_c).unwrap() / (k * l) - 1.0).abs() < 1e-12);
        prop_assert!((kinetic_inductance(r, k * t_c).unwrap() * k / l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_power_saturation_is_a_square_root(n in 0.0f64..1e9, n_c in 0.1f64..1e3) {
        let s = tls_saturation_factor(n, n_c, 0.5);
        prop_assert!((s * (1.0 + n / n_c).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sinh_k0_is_stable_for_large_arguments(x in 1e-3f64..700.0) {
        let v = sinh_k0(x);
        prop_assert!(v.is_finite() && v > 0.0);
        // sinh(x) K₀(x) → √(π / 8x) as x → ∞.
        if x > 50.0 {
            let asymptote = (std::f64::consts::PI / (8.0 * x)).sqrt();
            prop_assert!((v / asymptote - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn thermal_ratio_is_inverse_in_temperature(f0 in 1e9f64..1e10, t in 0.01f64..2.0, k in 0.1f64..10.0) {
        prop_assert!((thermal_ratio(f0, k * t) * k / thermal_ratio(f0, t) - 1.0).abs() < 1e-12);
    }
}
