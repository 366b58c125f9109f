use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use resloss::error::SweepFitError;
use resloss::physics::{internal_q, total_inverse_qi, LossModelParams};
use resloss::sweep::{
    fit_power_sweep, fit_temperature_sweep, summarize_sample, FitOptions, FitOutcome, LossParam,
    SweepDataset, SweepPoint,
};
use resloss::synth::{
    linspace, synthesize_power_sweep, synthesize_temperature_sweep, PowerSweepOptions, QiNoise,
};

const F0: f64 = 6.34e9;
const T_BASE: f64 = 25.7e-3;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn photon_grid(points: usize) -> Vec<f64> {
    linspace(-1.0, 8.0, points)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

/// Power sweep straight from the loss model, with multiplicative noise `rel`
/// (zero for exact data, still reported with σ = 1%).
fn power_sweep(p: &LossModelParams, ns: &[f64], rel: f64, seed: u64) -> SweepDataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let points = ns
        .iter()
        .map(|&n| {
            let q = internal_q(n, T_BASE, p).unwrap();
            let z: f64 = StandardNormal.sample(&mut rng);
            let q_obs = q * (1.0 + rel * z);
            SweepPoint {
                x: n,
                q_i: q_obs,
                sigma_qi: rel.max(0.01) * q_obs,
                branch: 0,
            }
        })
        .collect();
    SweepDataset::power_sweep(points, p.f0)
}

fn reference_params() -> LossModelParams {
    LossModelParams::new(0.58e-6, 10.0, 0.4, 0.0, 6.9e-8, 4.4, F0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn assert_same_params(a: &FitOutcome, b: &FitOutcome, tol: f64) {
    for param in LossParam::ALL {
        let (x, y) = (param.get(&a.params), param.get(&b.params));
        if x != y {
            assert!(rel(x, y) < tol, "{param:?}: {x} vs {y}");
        }
    }
}

#[test]
fn thirty_point_monte_carlo_recovery() {
    let truth = reference_params();
    let ns = photon_grid(30);
    let mut ratios: [Vec<f64>; 4] = Default::default();
    for seed in 0..100 {
        let fit = fit_power_sweep(
            &power_sweep(&truth, &ns, 0.02, seed),
            &FitOptions::power_sweep(),
        )
        .unwrap();
        assert!(!fit.beta_auto_frozen);
        for (k, param) in [
            LossParam::FDeltaTls0,
            LossParam::NC,
            LossParam::Beta,
            LossParam::DeltaOther,
        ]
        .into_iter()
        .enumerate()
        {
            ratios[k].push(param.get(&fit.params) / param.get(&truth));
        }
    }
    for r in ratios {
        let m = median(r);
        assert!((m - 1.0).abs() < 0.10, "median ratio {m}");
    }
}

#[test]
fn beta_half_is_recovered_with_beta_free() {
    let truth = LossModelParams {
        beta: 0.5,
        n_c: 3.0,
        ..reference_params()
    };
    let ns = photon_grid(30);
    let betas: Vec<f64> = (0..60)
        .map(|seed| {
            fit_power_sweep(
                &power_sweep(&truth, &ns, 0.02, seed),
                &FitOptions::power_sweep(),
            )
            .unwrap()
            .params
            .beta
        })
        .collect();
    let b = median(betas);
    assert!((0.45..=0.55).contains(&b), "median beta {b}");
}

#[test]
fn error_shrinks_with_noise() {
    let truth = reference_params();
    let ns = photon_grid(30);
    let errors: Vec<f64> = [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&noise| {
            median(
                (0..40)
                    .map(|seed| {
                        let data = power_sweep(&truth, &ns, noise, 1000 + seed);
                        rel(
                            fit_power_sweep(&data, &FitOptions::power_sweep())
                                .unwrap()
                                .params
                                .f_delta_tls0,
                            0.58e-6,
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    let exact = fit_power_sweep(
        &power_sweep(&truth, &ns, 0.0, 0),
        &FitOptions::power_sweep(),
    )
    .unwrap();
    assert!(rel(exact.params.f_delta_tls0, 0.58e-6) < 1e-6);
}

#[test]
fn reweighting_only_scales_covariance() {
    let data = power_sweep(&reference_params(), &photon_grid(30), 0.02, 5);
    let mut heavier = data.clone();
    for p in &mut heavier.points {
        p.sigma_qi *= 3.0;
    }
    let a = fit_power_sweep(&data, &FitOptions::power_sweep()).unwrap();
    let b = fit_power_sweep(&heavier, &FitOptions::power_sweep()).unwrap();
    assert_same_params(&a, &b, 1e-7);
    for (ra, rb) in a.covariance.iter().zip(&b.covariance) {
        for (x, y) in ra.iter().zip(rb) {
            assert!(rel(*y, 9.0 * x) < 1e-5, "{x} {y}");
        }
    }
}

#[test]
fn point_order_does_not_matter() {
    let data = power_sweep(&reference_params(), &photon_grid(30), 0.02, 6);
    let mut shuffled = data.clone();
    shuffled.points.shuffle(&mut ChaCha20Rng::seed_from_u64(1));
    let a = fit_power_sweep(&data, &FitOptions::power_sweep()).unwrap();
    let b = fit_power_sweep(&shuffled, &FitOptions::power_sweep()).unwrap();
    assert_same_params(&a, &b, 1e-7);
}

#[test]
fn fitted_curve_is_a_fixed_point() {
    let data = power_sweep(&reference_params(), &photon_grid(30), 0.02, 7);
    let fit = fit_power_sweep(&data, &FitOptions::power_sweep()).unwrap();
    let mut extended = data.clone();
    for n in photon_grid(17) {
        let q = fit.model_qi(n, T_BASE).unwrap();
        extended.points.push(SweepPoint {
            x: n * 1.37,
            q_i: fit.model_qi(n * 1.37, T_BASE).unwrap(),
            sigma_qi: 0.01 * q,
            branch: 0,
        });
    }
    let refit = fit_power_sweep(&extended, &FitOptions::power_sweep()).unwrap();
    assert_same_params(&fit, &refit, 1e-6);
}

#[test]
fn fitter_uses_the_physics_model() {
    let data = power_sweep(&reference_params(), &photon_grid(30), 0.02, 8);
    let fit = fit_power_sweep(&data, &FitOptions::power_sweep()).unwrap();
    for (point, r) in data.points.iter().zip(&fit.residuals) {
        let model = total_inverse_qi(point.x, T_BASE, &fit.params).unwrap();
        let expected = (model - 1.0 / point.q_i) / (point.sigma_qi / (point.q_i * point.q_i));
        assert_eq!(expected.to_bits(), r.to_bits());
    }
}

#[test]
fn covariance_is_symmetric_positive() {
    let data = power_sweep(&reference_params(), &photon_grid(30), 0.02, 9);
    let fit = fit_power_sweep(&data, &FitOptions::power_sweep()).unwrap();
    let k = fit.free.len();
    for i in 0..k {
        assert!(fit.covariance[i][i] > 0.0);
        assert!((fit.sigma[i] - fit.covariance[i][i].sqrt()).abs() <= 1e-12 * fit.sigma[i]);
        for j in 0..k {
            assert_eq!(fit.covariance[i][j], fit.covariance[j][i]);
        }
    }
    assert!(fit.reduced_chi_square.is_finite());
    assert!(fit.converged());
}

#[test]
fn narrow_sweeps_are_rejected() {
    let ns = linspace(0.0, 2.5, 30)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect::<Vec<_>>();
    let err = fit_power_sweep(
        &power_sweep(&reference_params(), &ns, 0.0, 0),
        &FitOptions::power_sweep(),
    );
    assert!(matches!(
        err,
        Err(SweepFitError::InsufficientCoverage { .. })
    ));
}

#[test]
fn short_sweeps_are_rejected() {
    let data = power_sweep(&reference_params(), &photon_grid(12), 0.0, 0);
    let err = fit_power_sweep(&data, &FitOptions::power_sweep());
    assert!(
        matches!(err, Err(SweepFitError::TooFewPoints { .. })),
        "{err:?}"
    );
}

#[test]
fn nineteen_points_hold_beta() {
    let data = power_sweep(&reference_params(), &photon_grid(19), 0.0, 0);
    let fit = fit_power_sweep(&data, &FitOptions::power_sweep()).unwrap();
    assert!(fit.beta_auto_frozen);
    assert_eq!(fit.params.beta, 0.5);
    assert!(!fit.free.contains(&LossParam::Beta));

    let strict = FitOptions {
        auto_freeze_beta: false,
        ..FitOptions::power_sweep()
    };
    assert!(matches!(
        fit_power_sweep(&data, &strict),
        Err(SweepFitError::TooFewPoints { .. })
    ));
}

fn temperature_truth(delta_qp0: f64) -> LossModelParams {
    LossModelParams::new(0.58e-6, 100.0, 0.4, delta_qp0, 7.5e-8, 4.4, F0).unwrap()
}

fn branches() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(k)).collect()
}

#[test]
fn single_branch_is_not_identifiable() {
    let data = synthesize_temperature_sweep(
        &temperature_truth(5e-3),
        &[100.0],
        &linspace(0.025, 0.998, 40),
        QiNoise::None,
        0,
    )
    .unwrap();
    let err = fit_temperature_sweep(&data, &FitOptions::temperature_sweep());
    assert!(
        matches!(err, Err(SweepFitError::NotIdentifiable(_))),
        "{err:?}"
    );
    let frozen = FitOptions::temperature_sweep()
        .with_frozen(LossParam::NC, 100.0)
        .with_frozen(LossParam::Beta, 0.4);
    assert!(fit_temperature_sweep(&data, &frozen).is_ok());
}

#[test]
fn absent_quasiparticle_loss_is_consistent_with_zero() {
    let temps = linspace(0.025, 0.998, 20);
    let mut inside = 0;
    for seed in 0..20 {
        let data = synthesize_temperature_sweep(
            &temperature_truth(0.0),
            &branches(),
            &temps,
            QiNoise::Relative(0.02),
            seed,
        )
        .unwrap();
        let fit = fit_temperature_sweep(&data, &FitOptions::temperature_sweep()).unwrap();
        if fit.params.delta_qp0 <= 2.0 * fit.sigma_of(LossParam::DeltaQp0) {
            inside += 1;
        }
    }
    assert!(inside >= 17, "{inside}/20 within 2σ of zero");
}

#[test]
fn fitted_branches_are_ordered() {
    let temps = linspace(0.025, 0.998, 20);
    let data = synthesize_temperature_sweep(
        &temperature_truth(5e-3),
        &branches(),
        &temps,
        QiNoise::Relative(0.02),
        3,
    )
    .unwrap();
    let fit = fit_temperature_sweep(&data, &FitOptions::temperature_sweep()).unwrap();
    for t in linspace(0.02, 1.2, 60) {
        let q: Vec<f64> = branches()
            .iter()
            .map(|&n| fit.model_qi(n, t).unwrap())
            .collect();
        assert!(q.windows(2).all(|w| w[1] >= w[0]), "T = {t}");
    }
}

#[test]
fn identical_fits_summarize_without_spread() {
    let truth = LossModelParams::new(0.89e-6, 2.0, 0.5, 0.0, 1.0 / 5.38e6, 4.4, F0).unwrap();
    let data = synthesize_power_sweep(
        &truth,
        2e5,
        &linspace(-162.0, -72.0, 19),
        &PowerSweepOptions::default(),
    )
    .unwrap();
    let fit = fit_power_sweep(&data, &FitOptions::power_sweep()).unwrap();
    let summary = summarize_sample("T-LA1", &vec![fit.clone(); 5], &vec![data; 5]).unwrap();
    assert_eq!(summary.f_delta_tls0.std, 0.0);
    assert_eq!(summary.f_delta_tls0.mean, fit.params.f_delta_tls0);
    assert_eq!(summary.q_i_lp.std, 0.0);
    assert_eq!(summary.resonators, 5);
    assert!(summarize_sample("empty", &[], &[]).is_err());
}

#[test]
fn five_resonator_sample_summary() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let powers = linspace(-162.0, -72.0, 19);
    let (mut fits, mut datasets, mut true_tls, mut true_lp) = (vec![], vec![], vec![], vec![]);
    for (k, f0) in [5.72e9, 6.03e9, 6.34e9, 6.61e9, 6.88e9]
        .into_iter()
        .enumerate()
    {
        let mut spread = || -> f64 {
            let z: f64 = StandardNormal.sample(&mut rng);
            (0.08 * z).exp()
        };
        let truth = LossModelParams::new(
            0.89e-6 * spread(),
            2.0,
            0.5,
            0.0,
            spread() / 5.38e6,
            4.4,
            f0,
        )
        .unwrap();
        let opts = PowerSweepOptions {
            noise: QiNoise::Relative(0.02),
            seed: k as u64,
            ..Default::default()
        };
        let data = synthesize_power_sweep(&truth, 2e5, &powers, &opts).unwrap();
        let exact =
            synthesize_power_sweep(&truth, 2e5, &powers, &PowerSweepOptions::default()).unwrap();
        true_lp.push(resloss::sweep::low_power_qi(&exact).unwrap());
        true_tls.push(truth.f_delta_tls0);
        fits.push(fit_power_sweep(&data, &FitOptions::power_sweep()).unwrap());
        datasets.push(data);
    }
    let summary = summarize_sample("T-LA1", &fits, &datasets).unwrap();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(rel(summary.f_delta_tls0.mean, mean(&true_tls)) < 0.10);
    assert!(rel(summary.q_i_lp.mean, mean(&true_lp)) < 0.10);
    assert!(
        summary.q_i_lp_box.q1 <= summary.q_i_lp_box.median
            && summary.q_i_lp_box.median <= summary.q_i_lp_box.q3
    );
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn noiseless_power_sweeps_are_recovered(
        fd in -6.7f64..-5.3,
        nc in 0.0f64..2.0,
        beta in 0.2f64..0.9,
        other in -7.7f64..-6.3,
    ) {
        let truth = LossModelParams::new(10f64.powf(fd), 10f64.powf(nc), beta, 0.0, 10f64.powf(other), 4.4, F0).unwrap();
        let fit = fit_power_sweep(&power_sweep(&truth, &photon_grid(30), 0.0, 0), &FitOptions::power_sweep()).unwrap();
        prop_assert!(fit.converged());
        for param in [LossParam::FDeltaTls0, LossParam::NC, LossParam::Beta, LossParam::DeltaOther] {
            prop_assert!(rel(param.get(&fit.params), param.get(&truth)) < 1e-3, "{:?}", param);
        }
    }
}
