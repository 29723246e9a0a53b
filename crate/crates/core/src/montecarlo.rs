//! Drop-based simulation of the typical user's uplink SINR: full Voronoi
//! interference for the three deployment models, plus the analysis-matched
//! exclusion-ball interferer mode, with a stream-per-drop reproducibility
//! contract.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, Weibull};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{inner_product, norm_sqr, path_loss, tx_power, ChannelBlock};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::geometry::{
    build_deployment, build_hexagonal, drop_users, Deployment, DeploymentModel, HEX_SIM_EXTENT,
};
use crate::numerics::rng_stream;

/// Which SINR a drop reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinrMode {
    /// Per-realization ratio of received powers.
    Instantaneous,
    /// Use-and-forget form: the desired-signal term is the analytic mean
    /// square, the deviation moves to the denominator.
    Effective,
}

impl SinrMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SinrMode::Instantaneous => "instantaneous",
            SinrMode::Effective => "effective",
        }
    }
}

/// How interfering users are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfererMode {
    /// Users of every Voronoi cell of the sampled deployment.
    Voronoi,
    /// The analysis-matched abstraction: interfering cells on the annulus
    /// beyond the guard radius, co-located K-user bundles, collision
    /// probability 1/Delta.
    ExclusionBall,
}

impl InterfererMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InterfererMode::Voronoi => "voronoi",
            InterfererMode::ExclusionBall => "exclusion_ball",
        }
    }
}

/// Origin of a CCDF curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Empirical,
    Analytic,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Empirical => "empirical",
            Provenance::Analytic => "analytic",
        }
    }
}

/// SINR realizations of the typical user, one per drop, in drop order.
#[derive(Debug, Clone)]
pub struct SinrSampleSet {
    pub samples: Vec<f64>,
    pub config: SystemConfig,
    pub model: DeploymentModel,
    pub interferers: InterfererMode,
    pub sinr_mode: SinrMode,
    pub seed: u64,
    pub n_drops: u64,
}

impl SinrSampleSet {
    pub fn ccdf(&self, thresholds: &[f64]) -> Result<CcdfCurve> {
        empirical_ccdf(&self.samples, thresholds)
    }
}

/// Coverage curve P[SINR > T] over an ascending linear threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    pub coverage: Vec<f64>,
    pub provenance: Provenance,
    /// Number of samples behind an empirical curve (0 for analytic).
    pub n_samples: u64,
}

impl CcdfCurve {
    /// Largest absolute coverage gap against another curve on a shared grid.
    pub fn sup_distance(&self, other: &CcdfCurve) -> f64 {
        assert_eq!(self.thresholds.len(), other.thresholds.len());
        self.coverage
            .iter()
            .zip(other.coverage.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// An interfering link whose channel never correlates with the estimate:
/// conditioned on h_hat, its received power is p_tx * beta * ||h_hat||^2
/// times a unit exponential, so the vector itself need not be materialized.
#[derive(Debug, Clone, Copy)]
pub struct ReducedInterferer {
    pub p_tx: f64,
    pub beta: f64,
}

/// SINR of the typical user for one assembled coherence block. Draws one
/// unit-exponential per reduced interferer, in order. A zero denominator
/// (no interference, sigma2 = 0) yields the +infinity sentinel.
pub fn uplink_sinr_sample(
    block: &ChannelBlock,
    reduced: &[ReducedInterferer],
    sigma2: f64,
    mode: SinrMode,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let h_hat = &block.h_hat;
    let hn2 = norm_sqr(h_hat);
    let mut interference = 0.0;
    for i in 1..block.n_links() {
        if block.data_interferer[i] {
            interference += block.p_tx[i] * inner_product(h_hat, &block.h[i]).norm_sqr();
        }
    }
    for r in reduced {
        let e: f64 = rng.sample(Exp1);
        interference += r.p_tx * r.beta * hn2 * e;
    }
    let noise = sigma2 * hn2;
    match mode {
        SinrMode::Instantaneous => {
            let num = block.p_tx[0] * inner_product(h_hat, &block.h[0]).norm_sqr();
            let den = interference + noise;
            if den == 0.0 {
                f64::INFINITY
            } else {
                num / den
            }
        }
        SinrMode::Effective => {
            let m = block.m_antennas as f64;
            let p00 = block.p_tx[0];
            let b00 = block.beta[0];
            let mean = num_complex::Complex::new(p00.sqrt() * b00 * m, 0.0);
            let dev = p00 * (inner_product(h_hat, &block.h[0]) - mean).norm_sqr();
            let num = p00 * p00 * b00 * b00 * m * m;
            let den = dev + interference + noise;
            if den == 0.0 {
                f64::INFINITY
            } else {
                num / den
            }
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// One full-interference drop on an existing deployment: place users, form
/// the estimate from the desired user plus every same-pilot user of a
/// co-group cell, take exact inner products for those contaminated links,
/// and fold every other user in as a reduced interferer.
///
/// Draw order: user placement, then fading (desired link first, then
/// contaminators in user order), then one exponential per reduced
/// interferer in user order.
pub fn simulate_drop_full(
    config: &SystemConfig,
    deployment: &Deployment,
    sinr_mode: SinrMode,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let users = drop_users(deployment, config.k_users, rng)?;
    let typical_bs = deployment.typical_index;
    let rx = deployment.bs_positions[typical_bs];
    let tu = users
        .typical_user(deployment)
        .ok_or_else(|| Error::Config("user drop lacks a typical user".to_string()))?;
    let group1 = deployment.pilot_group[typical_bs];

    let mut betas_rx = Vec::with_capacity(users.len());
    let mut powers = Vec::with_capacity(users.len());
    for u in 0..users.len() {
        let p = users.positions[u];
        let beta_rx = path_loss(dist(p, rx), config.c_pl, config.alpha, config.delta_ref)?;
        let serving = deployment.bs_positions[users.serving_bs[u]];
        let beta_serv = path_loss(
            dist(p, serving),
            config.c_pl,
            config.alpha,
            config.delta_ref,
        )?;
        betas_rx.push(beta_rx);
        powers.push(tx_power(beta_serv, config.epsilon, config.p_t));
    }

    let mut link_beta = vec![betas_rx[tu]];
    let mut link_p = vec![powers[tu]];
    let mut link_coll = vec![true];
    let mut link_data = vec![false];
    let mut reduced = Vec::new();
    for u in 0..users.len() {
        if u == tu {
            continue;
        }
        let contaminator = users.pilot_index[u] == users.pilot_index[tu]
            && users.serving_bs[u] != typical_bs
            && deployment.pilot_group[users.serving_bs[u]] == group1;
        if contaminator {
            link_beta.push(betas_rx[u]);
            link_p.push(powers[u]);
            link_coll.push(true);
            link_data.push(true);
        } else {
            reduced.push(ReducedInterferer {
                p_tx: powers[u],
                beta: betas_rx[u],
            });
        }
    }
    let block = ChannelBlock::assemble(
        config.m_antennas as usize,
        link_beta,
        link_p,
        link_coll,
        link_data,
        rng,
    );
    Ok(uplink_sinr_sample(
        &block,
        &reduced,
        config.sigma2,
        sinr_mode,
        rng,
    ))
}

fn poisson_count(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64
}

/// One exclusion-ball drop: the serving distance is Rayleigh, interfering
/// cells form an annulus PPP beyond the guard radius with all K users
/// co-located at the cell's distance, and each cell collides on the
/// typical pilot with probability 1/Delta. Cells of a far annulus (out to
/// `xball_far_radius`) enter the estimate exactly through one aggregated
/// Gaussian pseudo-link; their data interference is drawn as if
/// independent of the estimate, which is immaterial at that distance.
///
/// Draw order: serving distance; K-1 companion serving distances; near
/// cells (radius, K serving distances, collision flag, in cell order); far
/// cells likewise; fading (desired, near contaminators, far aggregate);
/// one exponential per reduced interferer (companions, near-cell users,
/// far-cell users).
pub fn simulate_drop_xball(
    config: &SystemConfig,
    d_guard: f64,
    sinr_mode: SinrMode,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let lambda = config.lambda_b;
    // Nearest-BS distance is Rayleigh with scale 1/sqrt(2 pi lambda), i.e.
    // Weibull with shape 2 and scale 1/sqrt(pi lambda).
    let rayleigh =
        Weibull::new(1.0 / (std::f64::consts::PI * lambda).sqrt(), 2.0).expect("positive scale");
    let w_near = config.window_radius_eff().max(d_guard);
    let w_far = config.xball_far_radius().max(w_near);
    let k = config.k_users as usize;
    let collision_prob = 1.0 / config.delta;
    let pl = |r: f64| path_loss(r, config.c_pl, config.alpha, config.delta_ref);

    let x = rayleigh.sample(rng);
    let b00 = pl(x)?;
    let p00 = tx_power(b00, config.epsilon, config.p_t);

    let mut reduced = Vec::new();
    for _ in 1..config.k_users {
        let r = rayleigh.sample(rng);
        let b = pl(r)?;
        reduced.push(ReducedInterferer {
            p_tx: tx_power(b, config.epsilon, config.p_t),
            beta: b,
        });
    }

    let mut link_beta = vec![b00];
    let mut link_p = vec![p00];
    let mut link_coll = vec![true];
    let mut link_data = vec![false];

    let annulus = |r_in: f64,
                   r_out: f64,
                   near: bool,
                   link_beta: &mut Vec<f64>,
                   link_p: &mut Vec<f64>,
                   link_coll: &mut Vec<bool>,
                   link_data: &mut Vec<bool>,
                   reduced: &mut Vec<ReducedInterferer>,
                   far_agg: &mut f64,
                   rng: &mut ChaCha8Rng|
     -> Result<()> {
        let mean = lambda * std::f64::consts::PI * (r_out * r_out - r_in * r_in);
        let n_cells = poisson_count(mean, rng);
        for _ in 0..n_cells {
            let u: f64 = rng.random();
            let d = (r_in * r_in + u * (r_out * r_out - r_in * r_in)).sqrt();
            let beta_rx = pl(d)?;
            let mut cell_powers = Vec::with_capacity(k);
            for _ in 0..k {
                let s = rayleigh.sample(rng);
                cell_powers.push(tx_power(pl(s)?, config.epsilon, config.p_t));
            }
            let collides = rng.random::<f64>() < collision_prob;
            for (j, &p) in cell_powers.iter().enumerate() {
                if near && collides && j == 0 {
                    link_beta.push(beta_rx);
                    link_p.push(p);
                    link_coll.push(true);
                    link_data.push(true);
                } else {
                    if !near && collides && j == 0 {
                        *far_agg += p * beta_rx;
                    }
                    reduced.push(ReducedInterferer {
                        p_tx: p,
                        beta: beta_rx,
                    });
                }
            }
        }
        Ok(())
    };

    let mut far_agg = 0.0;
    annulus(
        d_guard,
        w_near,
        true,
        &mut link_beta,
        &mut link_p,
        &mut link_coll,
        &mut link_data,
        &mut reduced,
        &mut far_agg,
        rng,
    )?;
    annulus(
        w_near,
        w_far,
        false,
        &mut link_beta,
        &mut link_p,
        &mut link_coll,
        &mut link_data,
        &mut reduced,
        &mut far_agg,
        rng,
    )?;
    if far_agg > 0.0 {
        link_beta.push(far_agg);
        link_p.push(1.0);
        link_coll.push(true);
        link_data.push(false);
    }

    let block = ChannelBlock::assemble(
        config.m_antennas as usize,
        link_beta,
        link_p,
        link_coll,
        link_data,
        rng,
    );
    Ok(uplink_sinr_sample(
        &block,
        &reduced,
        config.sigma2,
        sinr_mode,
        rng,
    ))
}

/// Runs `n_drops` independent drops. Drop i consumes the random stream
/// (seed, i) and nothing else, so the sample vector is identical at any
/// parallelism level; samples are ordered by drop index. The hexagonal
/// lattice and its pilot coloring are built once and shared across drops.
pub fn run_drops(
    config: &SystemConfig,
    model: DeploymentModel,
    interferers: InterfererMode,
    sinr_mode: SinrMode,
    n_drops: u64,
    seed: u64,
) -> Result<SinrSampleSet> {
    config.validate()?;
    let _ = config.delta_int()?;
    if n_drops < 1 {
        return Err(Error::Config("n_drops must be at least 1".to_string()));
    }
    let samples: Result<Vec<f64>> = match interferers {
        InterfererMode::Voronoi => {
            let fixed = if model == DeploymentModel::Hexagonal {
                Some(build_hexagonal(config, HEX_SIM_EXTENT)?)
            } else {
                None
            };
            (0..n_drops)
                .into_par_iter()
                .map(|i| {
                    let mut rng = rng_stream(seed, i);
                    match &fixed {
                        Some(dep) => simulate_drop_full(config, dep, sinr_mode, &mut rng),
                        None => {
                            let dep = build_deployment(config, model, &mut rng)?;
                            simulate_drop_full(config, &dep, sinr_mode, &mut rng)
                        }
                    }
                })
                .collect()
        }
        InterfererMode::ExclusionBall => {
            let d_guard = match model {
                DeploymentModel::RandomPpp => 0.0,
                _ => config.guard_radius_eff(),
            };
            (0..n_drops)
                .into_par_iter()
                .map(|i| {
                    let mut rng = rng_stream(seed, i);
                    simulate_drop_xball(config, d_guard, sinr_mode, &mut rng)
                })
                .collect()
        }
    };
    Ok(SinrSampleSet {
        samples: samples?,
        config: config.clone(),
        model,
        interferers,
        sinr_mode,
        seed,
        n_drops,
    })
}

/// Empirical coverage: the fraction of samples strictly greater than each
/// threshold. +infinity sentinels count at every threshold.
pub fn empirical_ccdf(samples: &[f64], thresholds: &[f64]) -> Result<CcdfCurve> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    assert!(
        thresholds.windows(2).all(|w| w[0] <= w[1]),
        "thresholds must be ascending"
    );
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let coverage = thresholds
        .iter()
        .map(|&t| {
            let idx = sorted.partition_point(|&s| s <= t);
            (sorted.len() - idx) as f64 / n
        })
        .collect();
    Ok(CcdfCurve {
        thresholds: thresholds.to_vec(),
        coverage,
        provenance: Provenance::Empirical,
        n_samples: samples.len() as u64,
    })
}
