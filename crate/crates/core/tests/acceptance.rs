//! End-to-end acceptance checks. Each test prints one PASS/FAIL line (plus
//! the measured quantities behind it) and then asserts, so a plain
//! `cargo test` gives the verdict and `-- --nocapture` shows the numbers.
//!
//! Criterion 2 is asserted at its stated tolerance even though two of the
//! three configurations are known to sit outside it (the closed form is an
//! approximation, and its epsilon = 1 branch deviates substantially from the
//! simulated system); the test reports the measured gaps and fails rather
//! than loosening the bound. See README "Known limitations".

mod support;

use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex;
use pilotcell::analytic::argmax_throughput;
use pilotcell::io::samples_to_csv;
use pilotcell::montecarlo::{run_drops, InterfererMode, SinrMode};
use pilotcell::{
    analytic_ccdf_curve, b_omega, ccdf_theorem1, db_to_linear, i_omega, linear_to_db, p_omega,
    rng_stream, sample_fading, solve_min_delta, spectral_efficiency_analytic, y_of_delta,
    DeploymentModel, SystemConfig,
};
use rand::Rng;
use std::f64::consts::PI;

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Criterion 1: with lambda_B = 2.8e-5, K = 10, Delta = 3, sigma^2 = 0, the
/// empirical coverage of the three deployment models is ordered
/// hex >= guard-region >= random at T in {0, 5, 10} dB for every
/// (M, eps) in {100, 500} x {0, 0.5}, up to 2-sigma binomial noise,
/// at 2000 drops per model.
#[test]
fn criterion_1_model_ordering() {
    let started = Instant::now();
    let thresholds: Vec<f64> = [0.0, 5.0, 10.0].iter().map(|&d| db_to_linear(d)).collect();
    let n_drops = 2000u64;
    let n = n_drops as f64;
    let mut ok = true;
    for (m, eps) in [(100u32, 0.0), (100, 0.5), (500, 0.0), (500, 0.5)] {
        let config = SystemConfig {
            m_antennas: m,
            epsilon: eps,
            ..SystemConfig::default()
        };
        let models = [
            DeploymentModel::Hexagonal,
            DeploymentModel::GuardRegion,
            DeploymentModel::RandomPpp,
        ];
        let mut coverage = Vec::new();
        for model in models {
            let set = run_drops(
                &config,
                model,
                InterfererMode::Voronoi,
                SinrMode::Instantaneous,
                n_drops,
                101,
            )
            .unwrap();
            coverage.push(set.ccdf(&thresholds).unwrap().coverage);
        }
        for (ti, t_db) in [0.0, 5.0, 10.0].iter().enumerate() {
            for (hi_ix, lo_ix, label) in [(0, 1, "hex >= guard"), (1, 2, "guard >= random")] {
                let hi: f64 = coverage[hi_ix][ti];
                let lo: f64 = coverage[lo_ix][ti];
                let sigma = (hi * (1.0 - hi) / n + lo * (1.0 - lo) / n).sqrt();
                let pair_ok = hi >= lo - 2.0 * sigma;
                if !pair_ok {
                    println!(
                        "  ordering violated beyond noise: {label} at T = {t_db} dB, \
                         M = {m}, eps = {eps}: {hi:.4} < {lo:.4} - 2*{sigma:.4}"
                    );
                }
                ok &= pair_ok;
            }
        }
        println!(
            "  (M = {m:3}, eps = {eps}) coverage at 0/5/10 dB: \
             hex {:?}, guard {:?}, random {:?}",
            coverage[0], coverage[1], coverage[2]
        );
    }
    println!(
        "[{}] criterion 1 (model ordering): hex >= guard >= random within 2 sigma \
         at 24 comparison points, elapsed {:.1?}",
        verdict(ok),
        started.elapsed()
    );
    assert!(
        ok,
        "deployment-model coverage ordering violated beyond 2-sigma noise"
    );
}

/// Criterion 2: analytic CCDF vs guard-region Monte Carlo (10^4 drops,
/// exclusion-ball interferers) with sup-norm gap <= 0.05 at
/// (M, Delta, eps) in {(500, 3, 0.5), (64, 1, 0), (500, 1, 1)}.
#[test]
fn criterion_2_closed_form_vs_simulation() {
    let started = Instant::now();
    let grid: Vec<f64> = (-15..=25).map(|d| db_to_linear(f64::from(d))).collect();
    let mut failed: Vec<String> = Vec::new();
    for (m, delta, eps) in [(500u32, 3.0, 0.5), (64, 1.0, 0.0), (500, 1.0, 1.0)] {
        let config = SystemConfig {
            m_antennas: m,
            delta,
            epsilon: eps,
            alzer_n: 5,
            ..SystemConfig::default()
        };
        let analytic = analytic_ccdf_curve(&grid, &config).unwrap();
        let simulated = run_drops(
            &config,
            DeploymentModel::GuardRegion,
            InterfererMode::ExclusionBall,
            SinrMode::Instantaneous,
            10_000,
            202,
        )
        .unwrap()
        .ccdf(&grid)
        .unwrap();
        let sup = analytic.sup_distance(&simulated);
        let pair_ok = sup <= 0.05;
        println!(
            "  [{}] (M = {m:3}, Delta = {delta}, eps = {eps}): sup gap {sup:.4}",
            verdict(pair_ok)
        );
        if !pair_ok {
            failed.push(format!("(M={m}, Delta={delta}, eps={eps}): {sup:.4}"));
        }
    }
    println!(
        "[{}] criterion 2 (closed form vs simulation): sup-norm gap <= 0.05 \
         at 3 configurations, elapsed {:.1?}",
        verdict(failed.is_empty()),
        started.elapsed()
    );
    assert!(
        failed.is_empty(),
        "analytic-vs-simulation sup gap exceeds 0.05 at {failed:?}; the approximation \
         quality at these points is discussed under Known limitations in the README"
    );
}

/// Criterion 3: the reuse-domain coverage equals the general route to 1e-4
/// absolute at 20 randomized parameter points, and the minimum-reuse solver
/// brackets its target against a dense grid scan.
#[test]
fn criterion_3_corollary_consistency() {
    let mut rng = rng_stream(303, 0);
    let mut worst: f64 = 0.0;
    for draw in 0..20u32 {
        let m: u32 = rng.random_range(32..=600);
        let k: u32 = rng.random_range(1..=20);
        let delta: f64 = rng.random_range(1.0..8.0);
        let mut eps: f64 = rng.random_range(0.0..=1.0);
        if draw % 4 == 0 {
            eps = 0.0;
        } else if draw % 4 == 1 {
            eps = 1.0;
        }
        let alpha: f64 = rng.random_range(2.6..4.8);
        let lambda: f64 = rng.random_range(5e-6_f64.ln()..1e-4_f64.ln()).exp();
        let t_lin = db_to_linear(rng.random_range(-10.0..20.0));
        let sigma2 = if draw % 2 == 0 {
            0.0
        } else {
            rng.random_range(1e-12_f64.ln()..1e-9_f64.ln()).exp()
        };
        let config = SystemConfig {
            lambda_b: lambda,
            m_antennas: m,
            k_users: k,
            delta,
            alpha,
            epsilon: eps,
            sigma2,
            guard_radius: None,
            ..SystemConfig::default()
        };
        let diff = (y_of_delta(delta, t_lin, &config).unwrap()
            - ccdf_theorem1(t_lin, &config).unwrap())
        .abs();
        worst = worst.max(diff);
    }
    let routes_ok = worst <= 1e-4;

    let config = SystemConfig {
        m_antennas: 500,
        ..SystemConfig::default()
    };
    let t = db_to_linear(10.0);
    let gamma = 0.5 * (y_of_delta(1.0, t, &config).unwrap() + y_of_delta(2.0, t, &config).unwrap());
    let sol = solve_min_delta(gamma, t, &config, 16.0).unwrap();
    let d = sol
        .delta_real
        .expect("target between y(1) and y(2) is feasible");
    let mut bracket_ok = y_of_delta(d, t, &config).unwrap() >= gamma - 1e-9;
    if d - 0.1 >= 1.0 {
        bracket_ok &= y_of_delta(d - 0.1, t, &config).unwrap() < gamma;
    }
    let mut probe = 1.0;
    while probe < d - 1e-9 {
        bracket_ok &= y_of_delta(probe, t, &config).unwrap() < gamma + 1e-12;
        probe += 0.02;
    }
    println!(
        "[{}] criterion 3 (corollary consistency): sup route gap {worst:.3e} over 20 \
         random points; Delta* = {d:.4} brackets gamma = {gamma:.4} against a 0.02 grid",
        verdict(routes_ok && bracket_ok)
    );
    assert!(routes_ok, "coverage routes disagree by {worst:.3e} > 1e-4");
    assert!(
        bracket_ok,
        "minimum-reuse solution fails the bracketing checks"
    );
}

/// Criterion 4: at M = 500, T = 10 dB, eps = 0.5, K = 10, coverage is
/// non-decreasing in Delta on [1, 8] and the gain from Delta = 2 to 4 is at
/// most 0.05.
#[test]
fn criterion_4_reuse_saturation() {
    let config = SystemConfig {
        m_antennas: 500,
        ..SystemConfig::default()
    };
    let t = db_to_linear(10.0);
    let mut monotone = true;
    let mut prev = 0.0f64;
    let mut d = 1.0f64;
    while d <= 8.0 + 1e-9 {
        let y = y_of_delta(d, t, &config).unwrap();
        monotone &= y >= prev - 1e-9;
        prev = y;
        d += 0.25;
    }
    let y2 = y_of_delta(2.0, t, &config).unwrap();
    let y4 = y_of_delta(4.0, t, &config).unwrap();
    let gain = y4 - y2;
    let ok = monotone && gain <= 0.05;
    println!(
        "[{}] criterion 4 (reuse saturation): non-decreasing on [1, 8] = {monotone}, \
         y(4) - y(2) = {gain:.4}",
        verdict(ok)
    );
    assert!(
        ok,
        "coverage must be non-decreasing with a <= 0.05 gain past Delta = 2"
    );
}

/// Criterion 5: for K = 10, eps = 0.5, T_max = 21 dB, the throughput-optimal
/// integer reuse factor over Delta = 1..8 lies in {1, 2, 3} for every
/// (T_C, M) in {200, 500} x {100, 500}, and Delta = 8 is strictly worse than
/// the optimum.
#[test]
fn criterion_5_throughput_optimum() {
    let deltas: Vec<u32> = (1..=8).collect();
    let mut ok = true;
    for m in [100u32, 500] {
        // tau_0 does not depend on T_C, so share it across the two sweeps.
        let mut tau0_cache: HashMap<u32, f64> = HashMap::new();
        for t_c in [200.0f64, 500.0] {
            let config = SystemConfig {
                m_antennas: m,
                t_coherence: t_c,
                ..SystemConfig::default()
            };
            let sweep = argmax_throughput(config.k_users, t_c, &deltas, |d| {
                if let Some(&tau) = tau0_cache.get(&d) {
                    return Ok(tau);
                }
                let cfg = SystemConfig {
                    delta: f64::from(d),
                    ..config.clone()
                };
                let tau = spectral_efficiency_analytic(&cfg)?;
                tau0_cache.insert(d, tau);
                Ok(tau)
            })
            .unwrap();
            let star = sweep.delta_star;
            let tau_star = sweep.points.iter().find(|p| p.delta == star).unwrap().tau_s;
            let tau_8 = sweep.points.iter().find(|p| p.delta == 8).unwrap().tau_s;
            let case_ok = (1..=3).contains(&star) && tau_8 < tau_star;
            println!(
                "  (M = {m:3}, T_C = {t_c:3}): Delta* = {star}, tau_S(Delta*) = {tau_star:.3}, \
                 tau_S(8) = {tau_8:.3}"
            );
            ok &= case_ok;
        }
    }
    println!(
        "[{}] criterion 5 (throughput optimum): argmax Delta in {{1, 2, 3}} and \
         tau_S(8) < tau_S(Delta*) at 4 configurations",
        verdict(ok)
    );
    assert!(
        ok,
        "throughput optimum escaped {{1, 2, 3}} or Delta = 8 is not strictly worse"
    );
}

/// Criterion 6: the closed-form moments match independent quadrature to 1e-8
/// relative over 50 randomized draws, and the Gaussian moment identities
/// E||w||^2 = M, E|w1^H w2|^2 = M, E|w^H w|^2 = M^2 + M hold within 2% at
/// 10^5 samples, M = 64.
#[test]
fn criterion_6_moment_oracles() {
    let mut rng = rng_stream(606, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let alpha: f64 = rng.random_range(2.5..5.0);
        let eps: f64 = rng.random_range(0.0..=1.0);
        let lambda: f64 = rng.random_range(5e-6_f64.ln()..1e-4_f64.ln()).exp();
        let d_free: f64 = rng.random_range(50.0..2000.0);
        let delta: f64 = rng.random_range(1.0..8.0);
        let cfg = SystemConfig {
            lambda_b: lambda,
            alpha,
            epsilon: eps,
            delta,
            ..SystemConfig::default()
        };
        let d_hex = cfg.guard_radius_for(delta);
        let p_exp = 0.5 * alpha * (1.0 - eps);
        for omega in [1u32, 2] {
            let w = f64::from(omega);
            let r_hi = 12.0 / (PI * lambda).sqrt();
            let p_oracle = support::simpson(
                |r| r.powf(alpha * eps * w) * 2.0 * PI * lambda * r * (-PI * lambda * r * r).exp(),
                0.0,
                r_hi,
                50_000,
            );
            let log_tail = |d_at: f64| {
                let s_lo = d_at.ln();
                support::simpson(
                    |s| 2.0 * PI * lambda * ((2.0 - w * alpha) * s).exp(),
                    s_lo,
                    s_lo + 45.0,
                    24_000,
                )
            };
            let rel = |closed: f64, oracle: f64| (closed - oracle).abs() / oracle.abs();
            worst = worst.max(rel(p_omega(omega, lambda, alpha, eps), p_oracle));
            worst = worst.max(rel(
                i_omega(omega, lambda, alpha, d_free).unwrap(),
                log_tail(d_free),
            ));
            let b_oracle = p_oracle * log_tail(d_hex) * (PI * lambda).powf(-w * p_exp);
            worst = worst.max(rel(b_omega(omega, alpha, eps, delta), b_oracle));
        }
    }
    let moments_ok = worst < 1e-8;

    let m = 64usize;
    let n = 100_000usize;
    let mut rng = rng_stream(606, 1);
    let (mut norm2, mut cross, mut self4) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let w1 = sample_fading(m, &mut rng);
        let w2 = sample_fading(m, &mut rng);
        let n2: f64 = w1.iter().map(Complex::norm_sqr).sum();
        let dot: Complex<f64> = w1.iter().zip(&w2).map(|(a, b)| a.conj() * b).sum();
        norm2 += n2;
        cross += dot.norm_sqr();
        self4 += n2 * n2;
    }
    let mf = m as f64;
    let nf = n as f64;
    let errs = [
        (norm2 / nf - mf).abs() / mf,
        (cross / nf - mf).abs() / mf,
        (self4 / nf - (mf * mf + mf)).abs() / (mf * mf + mf),
    ];
    let gauss_ok = errs.iter().all(|&e| e <= 0.02);
    println!(
        "[{}] criterion 6 (moment oracles): worst quadrature rel err {worst:.3e}; \
         Gaussian moment rel errs {:.4?} at 1e5 samples",
        verdict(moments_ok && gauss_ok),
        errs
    );
    assert!(
        moments_ok,
        "closed-form moment off its quadrature oracle by {worst:.3e}"
    );
    assert!(
        gauss_ok,
        "Gaussian moment identity violated beyond 2%: {errs:?}"
    );
}

/// Criterion 7: the sample standard deviation of SINR in dB strictly
/// decreases across eps = 0 -> 0.5 -> 1 at M = 500, Delta = 3, K = 10,
/// 5000 drops (power control trades mean for fairness).
#[test]
fn criterion_7_fairness_trend() {
    let mut stds = Vec::new();
    for eps in [0.0, 0.5, 1.0] {
        let config = SystemConfig {
            m_antennas: 500,
            epsilon: eps,
            ..SystemConfig::default()
        };
        let set = run_drops(
            &config,
            DeploymentModel::GuardRegion,
            InterfererMode::Voronoi,
            SinrMode::Instantaneous,
            5000,
            707,
        )
        .unwrap();
        let db: Vec<f64> = set.samples.iter().map(|&s| linear_to_db(s)).collect();
        stds.push(support::std_dev(&db));
    }
    let ok = stds[0] > stds[1] && stds[1] > stds[2];
    println!(
        "[{}] criterion 7 (fairness trend): SINR-dB std {:.3} -> {:.3} -> {:.3} \
         across eps = 0 -> 0.5 -> 1",
        verdict(ok),
        stds[0],
        stds[1],
        stds[2]
    );
    assert!(
        ok,
        "SINR spread must strictly shrink as power control tightens: {stds:?}"
    );
}

/// Criterion 8: identical (config, seed) produce byte-identical sample CSVs
/// under 1 and 8 parallel workers.
#[test]
fn criterion_8_determinism() {
    let config = SystemConfig::default();
    let csv_for = |threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let set = pool
            .install(|| {
                run_drops(
                    &config,
                    DeploymentModel::GuardRegion,
                    InterfererMode::Voronoi,
                    SinrMode::Instantaneous,
                    300,
                    808,
                )
            })
            .unwrap();
        samples_to_csv(&set)
    };
    let single = csv_for(1);
    let eight = csv_for(8);
    let ok = single == eight;
    println!(
        "[{}] criterion 8 (determinism): {} CSV bytes, 1 worker == 8 workers: {ok}",
        verdict(ok),
        single.len()
    );
    assert!(ok, "sample CSV must not depend on the worker count");
}
