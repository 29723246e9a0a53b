//! Closed-form evaluation of the SINR coverage approximation, the
//! minimum-reuse solver, and the rate/throughput pipeline.
//!
//! Two coefficient routes feed one integration kernel:
//! * the general (theorem) route builds A and B from the moments P_w and the
//!   annulus integrals I_w at an explicit guard radius D;
//! * the hexagonal-equivalence (corollary) route builds the same exponent
//!   coefficients from the B_w closed forms with D = 2R*sqrt(Delta) folded
//!   in analytically.
//!
//! The two must agree under the change of variables t = pi*lambda*x^2; tests
//! cross-check them.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::montecarlo::{CcdfCurve, Provenance};
use crate::numerics::{
    binomial, eta_alzer, gamma_fn, integrate_finite, integrate_weighted_semiinfinite,
    QuadratureSpec,
};

/// Alternating-binomial weights of the Alzer expansion of the conditional
/// gamma CDF: weight_n = (-1)^(n+1) * binom(N, n), n = 1..N, together with
/// the tightness constant eta = N * (N!)^(-1/N).
#[derive(Debug, Clone)]
pub struct AlzerTerms {
    pub n_order: u32,
    pub eta: f64,
    pub weights: Vec<f64>,
}

impl AlzerTerms {
    pub fn new(n_order: u32) -> Self {
        assert!(n_order >= 1, "Alzer order must be at least 1");
        let weights = (1..=n_order)
            .map(|n| {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                sign * binomial(n_order, n)
            })
            .collect();
        AlzerTerms {
            n_order,
            eta: eta_alzer(n_order),
            weights,
        }
    }
}

/// Rayleigh law of the distance to the nearest point of a PPP of intensity
/// `lambda`: f(x) = 2 pi lambda x exp(-pi lambda x^2).
pub fn rayleigh_nearest_density(lambda: f64, x: f64) -> f64 {
    assert!(lambda > 0.0 && x >= 0.0);
    let pil = std::f64::consts::PI * lambda;
    2.0 * pil * x * (-pil * x * x).exp()
}

/// Fractional-power-control moment P_w = (lambda pi)^(-alpha eps w / 2) *
/// Gamma(alpha eps w / 2 + 1): the w-th moment of the transmit power of a
/// user served at a Rayleigh nearest-BS distance.
pub fn p_omega(omega: u32, lambda_b: f64, alpha: f64, epsilon: f64) -> f64 {
    assert!(omega == 1 || omega == 2, "moment order must be 1 or 2");
    assert!(lambda_b > 0.0 && alpha > 2.0 && (0.0..=1.0).contains(&epsilon));
    let e = 0.5 * alpha * epsilon * f64::from(omega);
    let g = gamma_fn(e + 1.0).expect("argument is >= 1");
    (lambda_b * std::f64::consts::PI).powf(-e) * g
}

/// Annulus interference moment I_w = 2 pi lambda_b D^(2 - w alpha) /
/// (w alpha - 2), the positive value of the far-field integral
/// 2 pi lambda_b int_D^inf x^(1 - w alpha) dx.
pub fn i_omega(omega: u32, lambda_b: f64, alpha: f64, d_guard: f64) -> Result<f64> {
    assert!(omega == 1 || omega == 2, "moment order must be 1 or 2");
    assert!(lambda_b > 0.0 && d_guard >= 0.0);
    let wa = f64::from(omega) * alpha;
    assert!(wa > 2.0, "interference moment requires omega*alpha > 2");
    if d_guard == 0.0 {
        return Err(Error::DivergentInterference);
    }
    Ok(2.0 * std::f64::consts::PI * lambda_b * d_guard.powf(2.0 - wa) / (wa - 2.0))
}

/// Hexagonal-equivalence moment B_w = Gamma(w alpha eps / 2 + 1) *
/// (sqrt(3) / (2 Delta pi))^(w alpha / 2 - 1) / (w alpha / 2 - 1): the
/// density-free combination P_w * I_w * (pi lambda)^(-w p) evaluated at
/// D = 2R*sqrt(Delta).
pub fn b_omega(omega: u32, alpha: f64, epsilon: f64, delta: f64) -> f64 {
    assert!(omega == 1 || omega == 2, "moment order must be 1 or 2");
    assert!(alpha > 2.0 && (0.0..=1.0).contains(&epsilon) && delta >= 1.0);
    let half_wa = 0.5 * f64::from(omega) * alpha;
    let g = gamma_fn(0.5 * f64::from(omega) * alpha * epsilon + 1.0).expect("argument is >= 1");
    let base = 3.0_f64.sqrt() / (2.0 * delta * std::f64::consts::PI);
    g * base.powf(half_wa - 1.0) / (half_wa - 1.0)
}

/// Exponent coefficients of the coverage kernel, all in the substituted
/// t-domain: the conditional coverage factor is
/// exp(-c (e1 t^p + e2 t^(2p))) and the per-interferer mixture uses
/// c1 = -c (t^p + g t^(2p)), c2 = -c t^p.
#[derive(Debug, Clone, Copy)]
struct KernelCoefs {
    e1: f64,
    e2: f64,
    g: f64,
}

/// Scalar intermediates of the coverage formulas for one configuration:
/// the moment products of the general route (at D = guard_radius_eff) and
/// the density-free B_w of the hexagonal-equivalence route (at the
/// configured Delta).
#[derive(Debug, Clone)]
pub struct Intermediates {
    pub p1: f64,
    pub p2: f64,
    pub i1: f64,
    pub i2: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    pub b1: f64,
    pub b2: f64,
    /// p = (alpha/2)(1 - eps); zero means full power control (closed-form
    /// inner mixture).
    pub p_exp: f64,
    pub pi_lambda: f64,
    pub sigma2_norm: f64,
    /// The literal "(K)" factor of A, B, Q2 (K, or K-1 when the
    /// sensitivity switch is on).
    pub k_amb: f64,
}

impl Intermediates {
    pub fn for_config(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        let lambda = config.lambda_b;
        let alpha = config.alpha;
        let eps = config.epsilon;
        let delta = config.delta;
        let d = config.guard_radius_eff();
        let m = f64::from(config.m_antennas);
        let p1 = p_omega(1, lambda, alpha, eps);
        let p2 = p_omega(2, lambda, alpha, eps);
        let i1 = i_omega(1, lambda, alpha, d)?;
        let i2 = i_omega(2, lambda, alpha, d)?;
        let k_amb = if config.k_minus_one {
            f64::from(config.k_users) - 1.0
        } else {
            f64::from(config.k_users)
        };
        let sigma2_norm = config.sigma2_normalized();
        let a_coef = p1 * i1 / delta + k_amb * p1 * i1 + sigma2_norm;
        let b_coef = ((m + 1.0) * p2 * i2 + p1 * i1 * a_coef - (p1 * i1) * (p1 * i1)) / delta;
        Ok(Intermediates {
            p1,
            p2,
            i1,
            i2,
            a_coef,
            b_coef,
            b1: b_omega(1, alpha, eps, delta),
            b2: b_omega(2, alpha, eps, delta),
            p_exp: 0.5 * alpha * (1.0 - eps),
            pi_lambda: std::f64::consts::PI * lambda,
            sigma2_norm,
            k_amb,
        })
    }

    /// General-route kernel coefficients: E1 = A (pi lambda)^(-p),
    /// E2 = B (pi lambda)^(-2p), G = P1 I1 (pi lambda)^(-p).
    fn theorem_coefs(&self) -> KernelCoefs {
        let s = self.pi_lambda.powf(-self.p_exp);
        KernelCoefs {
            e1: self.a_coef * s,
            e2: self.b_coef * s * s,
            g: self.p1 * self.i1 * s,
        }
    }
}

fn outer_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-7,
        abs_floor: 1e-12,
        max_depth: 32,
        truncation: 40.0,
    }
}

fn inner_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-9,
        abs_floor: 1e-13,
        max_depth: 32,
        truncation: 40.0,
    }
}

/// One factor of the per-interferer mixture, exp(cc * u^(-p)) with the
/// end-point limits made explicit: cc = 0 gives 1; u -> 0 with cc < 0
/// gives 0.
fn mixture_factor(cc: f64, u: f64, p: f64) -> f64 {
    if cc == 0.0 {
        1.0
    } else if u == 0.0 {
        0.0
    } else {
        (cc * u.powf(-p)).exp()
    }
}

/// The e^{-u}-weighted mixture L: the pilot-collision branch (weight
/// 1/Delta) carries the contaminated exponent c1, the clean branch the
/// exponent c2. With p = 0 (full power control) the integral collapses.
fn l_mixture(c1: f64, c2: f64, delta: f64, p: f64, spec: &QuadratureSpec) -> Result<f64> {
    let w_coll = 1.0 / delta;
    let w_clean = 1.0 - w_coll;
    if p == 0.0 {
        return Ok(w_coll * c1.exp() + w_clean * c2.exp());
    }
    let q = integrate_weighted_semiinfinite(
        |u| Ok(w_coll * mixture_factor(c1, u, p) + w_clean * mixture_factor(c2, u, p)),
        spec,
    )?;
    Ok(q.value)
}

/// The Alzer-expanded coverage integral shared by both coefficient routes:
/// sum_n w_n e^{-c_n} int_0^inf exp(-c_n (E1 t^p + E2 t^(2p))) *
/// L(t)^(K-1) e^{-t} dt, clamped to [0, 1].
fn kernel_ccdf(
    t_threshold: f64,
    m_antennas: f64,
    k_users: u32,
    delta: f64,
    p: f64,
    coefs: KernelCoefs,
    alzer: &AlzerTerms,
) -> Result<f64> {
    assert!(t_threshold >= 0.0, "threshold must be non-negative");
    if t_threshold == 0.0 {
        return Ok(1.0);
    }
    let km1 = i32::try_from(k_users - 1).expect("k_users fits in i32");
    let o_spec = outer_spec();
    let i_spec = inner_spec();
    let mut total = 0.0;
    for (idx, &w) in alzer.weights.iter().enumerate() {
        let n = (idx + 1) as f64;
        let c = alzer.eta * t_threshold * n / m_antennas;
        let integral = integrate_weighted_semiinfinite(
            |t| {
                let tp = t.powf(p);
                let t2p = tp * tp;
                let z = (-c * (coefs.e1 * tp + coefs.e2 * t2p)).exp();
                let c1 = -c * (tp + coefs.g * t2p);
                let c2 = -c * tp;
                let l = l_mixture(c1, c2, delta, p, &i_spec)?;
                Ok(z * l.powi(km1))
            },
            &o_spec,
        )?;
        total += w * (-c).exp() * integral.value;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Coverage probability P[SINR > T] of the typical user from the general
/// closed-form approximation, with the guard radius taken from the
/// configuration (explicit override, or the hexagonal-equivalence value).
pub fn ccdf_theorem1(t_threshold: f64, config: &SystemConfig) -> Result<f64> {
    let im = Intermediates::for_config(config)?;
    kernel_ccdf(
        t_threshold,
        f64::from(config.m_antennas),
        config.k_users,
        config.delta,
        im.p_exp,
        im.theorem_coefs(),
        &AlzerTerms::new(config.alzer_n),
    )
}

/// Coverage y(Delta) with the hexagonal-equivalence guard radius
/// D = 2R*sqrt(Delta) folded in analytically via the density-free B_w, so
/// Delta may be any real >= 1. Matches `ccdf_theorem1` under the change of
/// variables when the configured guard radius is 2R*sqrt(Delta).
pub fn y_of_delta(delta: f64, t_threshold: f64, config: &SystemConfig) -> Result<f64> {
    config.validate()?;
    if !(delta.is_finite() && delta >= 1.0) {
        return Err(Error::Config(format!(
            "pilot reuse factor must be a real number >= 1, got {delta}"
        )));
    }
    let alpha = config.alpha;
    let eps = config.epsilon;
    let m = f64::from(config.m_antennas);
    let k_amb = if config.k_minus_one {
        f64::from(config.k_users) - 1.0
    } else {
        f64::from(config.k_users)
    };
    let p = 0.5 * alpha * (1.0 - eps);
    let b1 = b_omega(1, alpha, eps, delta);
    let b2 = b_omega(2, alpha, eps, delta);
    // The noise term rides along exactly as in the general route: it is the
    // only place the BS density survives the substitution.
    let noise = config.sigma2_normalized() * (std::f64::consts::PI * config.lambda_b).powf(-p);
    let coefs = KernelCoefs {
        e1: (k_amb + 1.0 / delta) * b1 + noise,
        e2: ((m + 1.0) * b2 + (k_amb - 1.0 + 1.0 / delta) * b1 * b1 + b1 * noise) / delta,
        g: b1,
    };
    kernel_ccdf(
        t_threshold,
        m,
        config.k_users,
        delta,
        p,
        coefs,
        &AlzerTerms::new(config.alzer_n),
    )
}

/// Analytic coverage curve over a linear threshold grid.
pub fn analytic_ccdf_curve(thresholds: &[f64], config: &SystemConfig) -> Result<CcdfCurve> {
    let mut coverage = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        coverage.push(ccdf_theorem1(t, config)?);
    }
    Ok(CcdfCurve {
        thresholds: thresholds.to_vec(),
        coverage,
        provenance: Provenance::Analytic,
        n_samples: 0,
    })
}

/// Result of the minimum-reuse search. `feasible = false` means the target
/// is unattainable on [1, delta_max] (no exception); `grid_fallback = true`
/// means y was not monotone on the scan grid and the reported Delta is the
/// smallest feasible grid point rather than a bisection root.
#[derive(Debug, Clone, PartialEq)]
pub struct MinDeltaResult {
    pub delta_real: Option<f64>,
    pub delta_int: Option<u32>,
    pub y_at_delta: Option<f64>,
    pub feasible: bool,
    pub grid_fallback: bool,
}

/// Smallest Delta in [1, delta_max] with y(Delta) >= gamma for an arbitrary
/// evaluator: coarse monotonicity scan first, then bisection on the
/// bracketing grid interval.
pub fn solve_min_delta_with<F>(mut y: F, gamma: f64, delta_max: f64) -> Result<MinDeltaResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!(
            "target probability must lie strictly inside (0, 1), got {gamma}"
        )));
    }
    if !(delta_max.is_finite() && delta_max >= 1.0) {
        return Err(Error::Config(format!(
            "delta_max must be a real number >= 1, got {delta_max}"
        )));
    }

    let n_grid = if delta_max == 1.0 { 1 } else { 17 };
    let grid: Vec<f64> = (0..n_grid)
        .map(|i| {
            if n_grid == 1 {
                1.0
            } else {
                1.0 + (delta_max - 1.0) * i as f64 / (n_grid - 1) as f64
            }
        })
        .collect();
    let mut vals = Vec::with_capacity(grid.len());
    for &d in &grid {
        vals.push(y(d)?);
    }

    // Tolerate quadrature-level wiggle when checking monotonicity.
    let monotone = vals.windows(2).all(|w| w[1] >= w[0] - 1e-6);
    if !monotone {
        log::warn!("coverage is not monotone in Delta on the scan grid; using grid fallback");
        let hit = grid.iter().zip(vals.iter()).find(|(_, &v)| v >= gamma);
        return Ok(match hit {
            Some((&d, &v)) => MinDeltaResult {
                delta_real: Some(d),
                delta_int: Some((d - 1e-9).ceil().max(1.0) as u32),
                y_at_delta: Some(v),
                feasible: true,
                grid_fallback: true,
            },
            None => MinDeltaResult {
                delta_real: None,
                delta_int: None,
                y_at_delta: None,
                feasible: false,
                grid_fallback: true,
            },
        });
    }

    if *vals.last().unwrap() < gamma {
        return Ok(MinDeltaResult {
            delta_real: None,
            delta_int: None,
            y_at_delta: None,
            feasible: false,
            grid_fallback: false,
        });
    }
    if vals[0] >= gamma {
        return Ok(MinDeltaResult {
            delta_real: Some(grid[0]),
            delta_int: Some(1),
            y_at_delta: Some(vals[0]),
            feasible: true,
            grid_fallback: false,
        });
    }

    let first_ok = vals.iter().position(|&v| v >= gamma).unwrap();
    let mut lo = grid[first_ok - 1];
    let mut hi = grid[first_ok];
    let mut y_hi = vals[first_ok];
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let ym = y(mid)?;
        if ym >= gamma {
            hi = mid;
            y_hi = ym;
        } else {
            lo = mid;
        }
    }
    Ok(MinDeltaResult {
        delta_real: Some(hi),
        delta_int: Some((hi - 1e-9).ceil().max(1.0) as u32),
        y_at_delta: Some(y_hi),
        feasible: true,
        grid_fallback: false,
    })
}

/// Smallest pilot reuse factor meeting P[SINR > T] >= gamma under the
/// hexagonal-equivalence coverage y(Delta).
pub fn solve_min_delta(
    gamma: f64,
    t_threshold: f64,
    config: &SystemConfig,
    delta_max: f64,
) -> Result<MinDeltaResult> {
    config.validate()?;
    solve_min_delta_with(|d| y_of_delta(d, t_threshold, config), gamma, delta_max)
}

/// Average per-user spectrum efficiency tau_0 = (1/ln 2) *
/// int_0^{t_max} P_C(T) / (1 + T) dT for an arbitrary coverage evaluator.
pub fn spectral_efficiency_fn<F>(mut p_c: F, t_max: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    assert!(t_max > 0.0, "t_max must be positive");
    let spec = QuadratureSpec {
        rel_tol: 1e-6,
        abs_floor: 1e-9,
        max_depth: 32,
        truncation: 40.0,
    };
    let q = integrate_finite(|t| Ok(p_c(t)? / (1.0 + t)), 0.0, t_max, &spec)?;
    Ok(q.value / std::f64::consts::LN_2)
}

/// tau_0 from the closed-form coverage at the configuration's own T_max.
pub fn spectral_efficiency_analytic(config: &SystemConfig) -> Result<f64> {
    config.validate()?;
    spectral_efficiency_fn(|t| ccdf_theorem1(t, config), config.t_max_linear())
}

/// tau_0 from an empirical coverage curve: trapezoidal integration of the
/// piecewise-linear interpolant (constant beyond the grid ends) on
/// [0, t_max].
pub fn spectral_efficiency_empirical(curve: &CcdfCurve, t_max: f64) -> Result<f64> {
    assert!(t_max > 0.0, "t_max must be positive");
    if curve.thresholds.is_empty() {
        return Err(Error::EmptySamples);
    }
    debug_assert!(curve.thresholds.windows(2).all(|w| w[0] <= w[1]));
    let coverage_at = |t: f64| -> f64 {
        let ts = &curve.thresholds;
        let cs = &curve.coverage;
        if t <= ts[0] {
            return cs[0];
        }
        if t >= *ts.last().unwrap() {
            return *cs.last().unwrap();
        }
        let j = ts.partition_point(|&x| x <= t);
        let (t0, t1) = (ts[j - 1], ts[j]);
        let (c0, c1) = (cs[j - 1], cs[j]);
        if t1 == t0 {
            c1
        } else {
            c0 + (c1 - c0) * (t - t0) / (t1 - t0)
        }
    };
    let mut knots = vec![0.0];
    knots.extend(
        curve
            .thresholds
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t < t_max),
    );
    knots.push(t_max);
    let f = |t: f64| coverage_at(t) / (1.0 + t);
    let mut acc = 0.0;
    for w in knots.windows(2) {
        acc += 0.5 * (f(w[0]) + f(w[1])) * (w[1] - w[0]);
    }
    Ok(acc / std::f64::consts::LN_2)
}

/// Cell throughput tau_S = K (1 - K Delta / T_C) tau_0. The overhead may
/// consume the whole coherence block (result 0) but never exceed it.
pub fn cell_throughput(k_users: u32, delta: f64, t_coherence: f64, tau_0: f64) -> Result<f64> {
    assert!(t_coherence > 0.0 && delta >= 1.0 && k_users >= 1 && tau_0 >= 0.0);
    let overhead = f64::from(k_users) * delta;
    if overhead > t_coherence {
        return Err(Error::OverheadExceeded {
            overhead,
            t_coherence,
        });
    }
    Ok(f64::from(k_users) * (1.0 - overhead / t_coherence) * tau_0)
}

/// One point of a reuse-factor throughput sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaThroughput {
    pub delta: u32,
    pub tau_0: f64,
    pub tau_s: f64,
}

/// Full sweep plus the argmax (ties broken toward smaller Delta).
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputSweep {
    pub points: Vec<DeltaThroughput>,
    pub delta_star: u32,
}

/// Sweeps tau_S over integer reuse factors for an arbitrary tau_0 source.
pub fn argmax_throughput<F>(
    k_users: u32,
    t_coherence: f64,
    deltas: &[u32],
    mut tau0_of: F,
) -> Result<ThroughputSweep>
where
    F: FnMut(u32) -> Result<f64>,
{
    if deltas.is_empty() {
        return Err(Error::Config("empty reuse-factor range".to_string()));
    }
    let mut sorted: Vec<u32> = deltas.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut points = Vec::with_capacity(sorted.len());
    let mut best: Option<(u32, f64)> = None;
    for &d in &sorted {
        assert!(d >= 1, "reuse factors must be at least 1");
        let tau_0 = tau0_of(d)?;
        let tau_s = cell_throughput(k_users, f64::from(d), t_coherence, tau_0)?;
        if best.is_none_or(|(_, b)| tau_s > b) {
            best = Some((d, tau_s));
        }
        points.push(DeltaThroughput {
            delta: d,
            tau_0,
            tau_s,
        });
    }
    Ok(ThroughputSweep {
        points,
        delta_star: best.unwrap().0,
    })
}

/// Sweeps tau_S over integer reuse factors with tau_0 from the closed-form
/// coverage (the guard radius follows Delta through the hexagonal
/// equivalence unless explicitly overridden).
pub fn optimal_delta_throughput(config: &SystemConfig, deltas: &[u32]) -> Result<ThroughputSweep> {
    config.validate()?;
    argmax_throughput(config.k_users, config.t_coherence, deltas, |d| {
        let mut cfg = config.clone();
        cfg.delta = f64::from(d);
        spectral_efficiency_analytic(&cfg)
    })
}
