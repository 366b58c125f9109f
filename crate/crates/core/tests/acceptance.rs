//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use resloss::circle::extract_quality_factors;
use resloss::physics::{
    delta_qp, delta_tls, internal_q, kinetic_inductance, quasiparticle_factor, tls_thermal_factor,
    LossModelParams, MeasurementContext,
};
use resloss::sweep::{fit_power_sweep, fit_temperature_sweep, FitOptions};
use resloss::synth::{
    linewidth_grid, linspace, synthesize_power_sweep, synthesize_temperature_sweep,
    synthesize_trace, ForwardParams, PowerSweepOptions, QiNoise,
};

const F0: f64 = 6.34e9;

/// sinh(ξ)K₀(ξ)e^(−Δ₀/k_BT) at 1 K, 6.34 GHz, T_C = 4.4 K, from a 40-digit
/// arbitrary-precision evaluation.
const QP_FACTOR_1K: f64 = 1.311_112_110_318_103_3e-4;
/// tanh(ħω₀/2k_BT) at 6.34 GHz and 998 mK, 40-digit evaluation.
const THERMAL_998MK: f64 = 0.151_270_942_382_671_3;

type Outcome = Result<String, String>;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn within_runtime(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    if elapsed < limit {
        Ok(format!("{detail}; {:.2} s", elapsed.as_secs_f64()))
    } else {
        Err(format!(
            "{detail}; runtime {:.2} s exceeds {:.0} s",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ))
    }
}

fn circle_round_trip_grid() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let context = MeasurementContext::new(1e-15, 0.02).unwrap();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for k in 0..200 {
        let q_i = 10f64.powf(rng.random_range(4.0..8.0));
        let q_c = 10f64.powf(rng.random_range(4.0..7.0));
        let phi = rng.random_range(-1.2..1.2);
        let tau = rng.random_range(0.0..100e-9);
        let f_r = rng.random_range(5.5e9..7.0e9);
        let amp = rng.random_range(0.1..1.0);
        let alpha = rng.random_range(-3.0..3.0);
        let p = ForwardParams::noiseless(f_r, q_i, q_c, phi).with_environment(amp, alpha, tau);
        let grid = linewidth_grid(f_r, p.q_l(), 10.0, 512);
        let trace = synthesize_trace(&p, &grid, context).map_err(|e| e.to_string())?;
        match extract_quality_factors(&trace) {
            Ok(fit) => {
                let err = [
                    rel(fit.q_i, q_i),
                    rel(fit.q_c_mag, q_c),
                    rel(fit.f_r, f_r),
                    rel(fit.phi, phi),
                ]
                .into_iter()
                .fold(0.0, f64::max);
                worst = worst.max(err);
                if err > 1e-3 {
                    failures.push(format!("tuple {k}: error {err:.2e}"));
                }
            }
            Err(e) => failures.push(format!("tuple {k}: {e}")),
        }
    }
    if !failures.is_empty() {
        return Err(format!(
            "{} of 200 tuples outside 0.1%: {}",
            failures.len(),
            failures.join("; ")
        ));
    }
    within_runtime(
        start.elapsed(),
        Duration::from_secs(60),
        format!("200 tuples, worst relative error {worst:.2e}"),
    )
}

fn noise_robustness() -> Outcome {
    let context = MeasurementContext::new(1e-15, 0.02).unwrap();
    let base = ForwardParams::noiseless(F0, 2.14e6, 4e5, 0.2).with_environment(0.8, 0.4, 45e-9);
    let grid = linewidth_grid(base.f_r, base.q_l(), 10.0, 512);
    let mut q = Vec::new();
    for seed in 0..100 {
        let trace = synthesize_trace(&base.with_noise(30.0, seed), &grid, context)
            .map_err(|e| e.to_string())?;
        if let Ok(fit) = extract_quality_factors(&trace) {
            q.push(fit.q_i);
        }
    }
    let fitted = q.len();
    let err = rel(median(q), 2.14e6);
    let detail = format!(
        "median Q_i error {:.2}% over {fitted}/100 fits",
        100.0 * err
    );
    if err < 0.05 && fitted >= 50 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn power_sweep_recovery() -> Outcome {
    let start = Instant::now();
    let rows = [
        (2.86e-6, 2.29e6),
        (1.11e-6, 1.57e6),
        (2.26e-6, 1.48e6),
        (1.17e-6, 1.68e6),
        (0.89e-6, 5.38e6),
        (0.58e-6, 13.36e6),
    ];
    let powers = linspace(-162.0, -72.0, 19);
    let mut details = Vec::new();
    let mut ok = true;
    for (f_delta, q_hp) in rows {
        let truth = LossModelParams::new(f_delta, 2.0, 0.5, 0.0, 1.0 / q_hp, 4.4, F0).unwrap();
        let mut est = Vec::new();
        for seed in 0..50 {
            let opts = PowerSweepOptions {
                noise: QiNoise::Relative(0.02),
                seed,
                ..Default::default()
            };
            let data =
                synthesize_power_sweep(&truth, 2e5, &powers, &opts).map_err(|e| e.to_string())?;
            if let Ok(fit) = fit_power_sweep(&data, &FitOptions::power_sweep()) {
                est.push(fit.params.f_delta_tls0);
            }
        }
        let err = if est.len() >= 25 {
            rel(median(est), f_delta)
        } else {
            f64::INFINITY
        };
        ok &= err < 0.10;
        details.push(format!("{:.2}e-6: {:.2}%", f_delta * 1e6, 100.0 * err));
    }
    let detail = format!("median Fδ error per row [{}]", details.join(", "));
    if !ok {
        return Err(detail);
    }
    within_runtime(start.elapsed(), Duration::from_secs(30), detail)
}

fn quasiparticle_oracle() -> Outcome {
    let got = quasiparticle_factor(F0, 4.4, 1.0).map_err(|e| e.to_string())?;
    let err = rel(got, QP_FACTOR_1K);
    let detail = format!("factor {got:.10e}, relative error {err:.1e}");
    if err < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn temperature_sweep_recovery() -> Outcome {
    let truth = LossModelParams::new(0.58e-6, 100.0, 0.4, 5e-3, 7.5e-8, 4.4, F0).unwrap();
    let branches: Vec<f64> = (1..=6).map(|k| 10f64.powi(k)).collect();
    let temps = linspace(0.025, 0.998, 20);
    let (mut qp, mut tls) = (Vec::new(), Vec::new());
    for seed in 0..50 {
        let data =
            synthesize_temperature_sweep(&truth, &branches, &temps, QiNoise::Relative(0.02), seed)
                .map_err(|e| e.to_string())?;
        if let Ok(fit) = fit_temperature_sweep(&data, &FitOptions::temperature_sweep()) {
            qp.push(fit.params.delta_qp0);
            tls.push(fit.params.f_delta_tls0);
        }
    }
    if qp.len() < 25 {
        return Err(format!("only {}/50 fits succeeded", qp.len()));
    }
    let (e_qp, e_tls) = (rel(median(qp), 5e-3), rel(median(tls), 0.58e-6));
    let detail = format!(
        "median δ⁰_QP error {:.2}%, Fδ error {:.2}%",
        100.0 * e_qp,
        100.0 * e_tls
    );
    if e_qp < 0.15 && e_tls < 0.10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn thermal_factor() -> Outcome {
    let cold = tls_thermal_factor(F0, 25.7e-3).map_err(|e| e.to_string())?;
    let warm = tls_thermal_factor(F0, 0.998).map_err(|e| e.to_string())?;
    let err = rel(warm, THERMAL_998MK);
    let detail =
        format!("tanh at 25.7 mK = {cold:.10}, at 998 mK = {warm:.12} (relative error {err:.1e})");
    if (0.99995..=1.0).contains(&cold) && err < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kinetic_inductance_check() -> Outcome {
    let l_k = kinetic_inductance(2.2, 4.4).map_err(|e| e.to_string())? * 1e12;
    let gap = rel(l_k, 0.64);
    let detail = format!(
        "L_K = {l_k:.4} pH/sq, {:.1}% from the measured 0.64 pH/sq",
        100.0 * gap
    );
    if gap < 0.15 && (l_k - 0.689).abs() < 0.001 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn params_strategy() -> impl Strategy<Value = LossModelParams> {
    (
        -7.0..-4.0f64,
        -1.0..3.0f64,
        0.05..1.0f64,
        -4.0..-1.0f64,
        -9.0..-5.0f64,
        5.5e9..7.0e9f64,
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

fn monotonicity_properties() -> Outcome {
    let cases = 1000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let ordered_n =
        (-2.0..8.0f64, 0.0..3.0f64).prop_map(|(a, d)| (10f64.powf(a), 10f64.powf(a + d)));
    let ordered_t = (0.01..1.2f64, 0.0..0.5f64).prop_map(|(a, d)| (a, (a + d).min(1.2)));
    let mut checks: Vec<(&str, Result<(), String>)> = Vec::new();

    let r = runner.run(
        &(params_strategy(), ordered_n.clone(), 0.01..1.2f64),
        |(p, (n1, n2), t)| {
            prop_assert!(delta_tls(n2, t, &p).unwrap() <= delta_tls(n1, t, &p).unwrap());
            Ok(())
        },
    );
    checks.push(("δ_TLS non-increasing in n", r.map_err(|e| e.to_string())));
    let r = runner.run(
        &(params_strategy(), 0.0..1e8f64, ordered_t.clone()),
        |(p, n, (t1, t2))| {
            prop_assert!(delta_tls(n, t2, &p).unwrap() <= delta_tls(n, t1, &p).unwrap());
            Ok(())
        },
    );
    checks.push(("δ_TLS non-increasing in T", r.map_err(|e| e.to_string())));
    let r = runner.run(&(params_strategy(), ordered_t), |(p, (t1, t2))| {
        prop_assert!(delta_qp(t2, &p).unwrap() >= delta_qp(t1, &p).unwrap());
        Ok(())
    });
    checks.push(("δ_QP non-decreasing in T", r.map_err(|e| e.to_string())));
    let r = runner.run(
        &(params_strategy(), ordered_n, 0.01..1.2f64),
        |(p, (n1, n2), t)| {
            prop_assert!(internal_q(n2, t, &p).unwrap() >= internal_q(n1, t, &p).unwrap());
            Ok(())
        },
    );
    checks.push(("Q_i non-decreasing in n", r.map_err(|e| e.to_string())));

    let failed: Vec<String> = checks
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    if failed.is_empty() {
        Ok(format!("{} properties x {cases} cases", checks.len()))
    } else {
        Err(failed.join("; "))
    }
}

fn run_cli(args: &[&str], dir: &Path) -> Result<(), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_resloss"))
        .args(args)
        .current_dir(dir)
        .env_remove("RESLOSS_CONFIG")
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .map_err(|e| e.to_string())?;
    if output.status.success() {
        Ok(())
    } else {
        Err(format!(
            "resloss {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&output.stderr)
        ))
    }
}

fn pipeline_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    run_cli(
        &[
            "synth",
            "--out",
            "corpus",
            "--seed",
            "11",
            "--samples",
            "T-LA1,T-LA2",
        ],
        dir,
    )?;
    run_cli(
        &[
            "fit",
            "corpus/*/*.csv",
            "--out",
            "jobs1",
            "--jobs",
            "1",
            "--seed",
            "3",
        ],
        dir,
    )?;
    run_cli(
        &[
            "fit",
            "corpus/*/*.csv",
            "--out",
            "jobs8",
            "--jobs",
            "8",
            "--seed",
            "3",
        ],
        dir,
    )?;
    let a = std::fs::read(dir.join("jobs1/report.json")).map_err(|e| e.to_string())?;
    let b = std::fs::read(dir.join("jobs8/report.json")).map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_slice(&a).map_err(|e| e.to_string())?;
    let resonators = report["resonators"].as_array().map_or(0, Vec::len);
    if resonators != 10 {
        return Err(format!(
            "expected 10 resonators in the report, found {resonators}"
        ));
    }
    if a == b {
        Ok(format!(
            "2 samples x 5 resonators, report.json byte-identical ({} bytes)",
            a.len()
        ))
    } else {
        Err("report.json differs between --jobs 1 and --jobs 8".into())
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("circle-fit round-trip grid", circle_round_trip_grid),
        ("circle-fit noise robustness", noise_robustness),
        ("power-sweep Fδ recovery", power_sweep_recovery),
        ("quasiparticle factor oracle", quasiparticle_oracle),
        ("temperature-sweep joint fit", temperature_sweep_recovery),
        ("TLS thermal factor", thermal_factor),
        ("kinetic inductance", kinetic_inductance_check),
        ("monotonicity properties", monotonicity_properties),
        ("pipeline determinism", pipeline_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  criterion {}: {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {}: {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
