//! All scalar model parameters of the uplink system, with validation and the
//! derived geometric quantities (hexagon inradius, guard radius, simulation
//! window) used throughout the simulator and the closed-form evaluators.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics;

/// Largest Alzer approximation order accepted by the evaluators; the
/// alternating binomial sum becomes ill-conditioned beyond this.
pub const ALZER_N_MAX: u32 = 5;

/// Full parameter set of the model.
///
/// Distances are in meters, densities in BS per square meter, powers in
/// linear scale. `delta` is the pilot reuse factor: the closed-form analysis
/// accepts any real value >= 1, while the drop simulator requires an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Base-station density lambda_B.
    pub lambda_b: f64,
    /// Number of BS antennas M.
    pub m_antennas: u32,
    /// Users per cell K (one orthogonal pilot each).
    pub k_users: u32,
    /// Pilot reuse factor Delta >= 1.
    pub delta: f64,
    /// Path-loss exponent alpha > 2.
    pub alpha: f64,
    /// Fractional power-control compensation epsilon in [0, 1].
    pub epsilon: f64,
    /// Near-field reference distance (meters); gains clamp below it.
    pub delta_ref: f64,
    /// Path-loss constant C.
    pub c_pl: f64,
    /// Open-loop transmit power P_t.
    pub p_t: f64,
    /// Noise power sigma^2 (0 for interference-limited studies).
    pub sigma2: f64,
    /// Guard-region radius D; derived as 2R*sqrt(Delta) when absent.
    pub guard_radius: Option<f64>,
    /// Simulation window radius; derived from lambda_b and D when absent.
    pub window_radius: Option<f64>,
    /// Coherence block length T_C in symbols (K*Delta of them train pilots).
    pub t_coherence: f64,
    /// Rate cap threshold T_max in dB.
    pub t_max_db: f64,
    /// Alzer approximation order N (1..=5).
    pub alzer_n: u32,
    /// Use K-1 instead of K in the analytic interference coefficients
    /// (sensitivity switch; the default keeps the literal K grouping).
    pub k_minus_one: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            lambda_b: 2.8e-5,
            m_antennas: 100,
            k_users: 10,
            delta: 3.0,
            alpha: 4.0,
            epsilon: 0.5,
            delta_ref: 1.0,
            c_pl: 1.0,
            p_t: 1.0,
            sigma2: 0.0,
            guard_radius: None,
            window_radius: None,
            t_coherence: 200.0,
            t_max_db: 21.0,
            alzer_n: 3,
            k_minus_one: false,
        }
    }
}

impl SystemConfig {
    /// Checks every invariant a loaded configuration must satisfy.
    pub fn validate(&self) -> Result<()> {
        fn want(ok: bool, msg: String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg))
            }
        }
        want(
            self.lambda_b > 0.0 && self.lambda_b.is_finite(),
            format!("lambda_b must be positive, got {}", self.lambda_b),
        )?;
        want(
            self.m_antennas >= 1,
            "m_antennas must be at least 1".to_string(),
        )?;
        want(self.k_users >= 1, "k_users must be at least 1".to_string())?;
        want(
            self.delta >= 1.0 && self.delta.is_finite(),
            format!(
                "delta (pilot reuse factor) must be >= 1, got {}",
                self.delta
            ),
        )?;
        want(
            self.alpha > 2.0 && self.alpha.is_finite(),
            format!(
                "alpha must exceed 2 for the interference moments to converge, got {}",
                self.alpha
            ),
        )?;
        want(
            (0.0..=1.0).contains(&self.epsilon),
            format!("epsilon must lie in [0, 1], got {}", self.epsilon),
        )?;
        want(
            self.delta_ref >= 0.0 && self.delta_ref.is_finite(),
            format!("delta_ref must be non-negative, got {}", self.delta_ref),
        )?;
        want(
            self.c_pl > 0.0 && self.c_pl.is_finite(),
            format!("c_pl must be positive, got {}", self.c_pl),
        )?;
        want(
            self.p_t > 0.0 && self.p_t.is_finite(),
            format!("p_t must be positive, got {}", self.p_t),
        )?;
        want(
            self.sigma2 >= 0.0 && self.sigma2.is_finite(),
            format!("sigma2 must be non-negative, got {}", self.sigma2),
        )?;
        if let Some(d) = self.guard_radius {
            want(
                d >= 0.0 && d.is_finite(),
                format!("guard_radius must be non-negative, got {d}"),
            )?;
        }
        if let Some(w) = self.window_radius {
            want(
                w > 0.0 && w.is_finite(),
                format!("window_radius must be positive, got {w}"),
            )?;
        }
        want(
            self.t_coherence > 0.0 && self.t_coherence.is_finite(),
            format!("t_coherence must be positive, got {}", self.t_coherence),
        )?;
        want(
            self.t_max_db.is_finite(),
            format!("t_max_db must be finite, got {}", self.t_max_db),
        )?;
        want(
            (1..=ALZER_N_MAX).contains(&self.alzer_n),
            format!(
                "alzer_n must lie in 1..={ALZER_N_MAX}, got {}",
                self.alzer_n
            ),
        )?;
        Ok(())
    }

    /// Additional check for throughput runs: the pilot overhead K*Delta must
    /// leave positive airtime in the coherence block.
    pub fn validate_for_throughput(&self) -> Result<()> {
        self.validate()?;
        let overhead = f64::from(self.k_users) * self.delta;
        if overhead < self.t_coherence {
            Ok(())
        } else {
            Err(Error::OverheadExceeded {
                overhead,
                t_coherence: self.t_coherence,
            })
        }
    }

    /// The reuse factor as the integer the drop simulator needs.
    pub fn delta_int(&self) -> Result<u32> {
        if self.delta.fract() == 0.0 && self.delta >= 1.0 && self.delta <= u32::MAX as f64 {
            Ok(self.delta as u32)
        } else {
            Err(Error::Config(format!(
                "simulation requires an integer pilot reuse factor, got {}",
                self.delta
            )))
        }
    }

    /// Hexagon inradius R fixed by the density identity: a hexagonal cell of
    /// inradius R has area 2*sqrt(3)*R^2 = 1/lambda_B.
    pub fn hex_inradius(&self) -> f64 {
        (2.0 * 3.0_f64.sqrt() * self.lambda_b).powf(-0.5)
    }

    /// Guard radius the hexagonal-equivalence rule D = 2R*sqrt(Delta)
    /// assigns to a reuse factor.
    pub fn guard_radius_for(&self, delta: f64) -> f64 {
        2.0 * self.hex_inradius() * delta.sqrt()
    }

    /// Effective guard radius D.
    pub fn guard_radius_eff(&self) -> f64 {
        self.guard_radius
            .unwrap_or_else(|| self.guard_radius_for(self.delta))
    }

    /// Effective simulation window radius: explicit override, otherwise
    /// max(6/sqrt(pi*lambda_B), 3D), sized so the truncated far field is a
    /// small fraction of the total interference.
    pub fn window_radius_eff(&self) -> f64 {
        self.window_radius.unwrap_or_else(|| {
            let base = 6.0 / (std::f64::consts::PI * self.lambda_b).sqrt();
            base.max(3.0 * self.guard_radius_eff())
        })
    }

    /// Outer radius of the exclusion-ball interferer annulus. Co-pilot
    /// interference decays slowly enough (D^{2-alpha} tail) that the annulus
    /// extends well past the materialized window; cells beyond
    /// `window_radius_eff` are handled in an aggregated far-field form.
    pub fn xball_far_radius(&self) -> f64 {
        self.window_radius_eff().max(15.0 * self.guard_radius_eff())
    }

    /// Alzer sharpness constant for the configured order.
    pub fn eta(&self) -> f64 {
        numerics::eta_alzer(self.alzer_n)
    }

    /// Rate cap threshold in linear scale.
    pub fn t_max_linear(&self) -> f64 {
        10.0_f64.powf(self.t_max_db / 10.0)
    }

    /// Noise power normalized by the transmit scale P_t * C^{1-epsilon} that
    /// multiplies every signal and interference term; with the default
    /// C = P_t = 1 this is sigma2 itself.
    pub fn sigma2_normalized(&self) -> f64 {
        self.sigma2 / (self.p_t * self.c_pl.powf(1.0 - self.epsilon))
    }

    /// Stable hex digest of the full parameter set, embedded in output files
    /// so results can be traced back to their exact configuration.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialization cannot fail");
        let digest = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}
