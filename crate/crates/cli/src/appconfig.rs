//! Configuration loading and flag resolution.
//!
//! Precedence, lowest to highest: built-in defaults, then the TOML config
//! file (`[system]` and `[run]` tables, all keys optional), then flags given
//! explicitly on the command line. Unknown keys in the file are rejected so
//! typos fail loudly instead of silently running the defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use pilotcell::montecarlo::{InterfererMode, SinrMode};
use pilotcell::{DeploymentModel, SystemConfig};

/// `[system]` table: physical and analytic model parameters, each falling
/// back to `SystemConfig::default()` when absent.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemTable {
    pub lambda_b: Option<f64>,
    pub m_antennas: Option<u32>,
    pub k_users: Option<u32>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta_ref: Option<f64>,
    pub c_pl: Option<f64>,
    pub p_t: Option<f64>,
    pub sigma2: Option<f64>,
    pub guard_radius: Option<f64>,
    pub window_radius: Option<f64>,
    pub t_coherence: Option<f64>,
    pub t_max_db: Option<f64>,
    pub alzer_n: Option<u32>,
    pub k_minus_one: Option<bool>,
}

/// `[run]` table: execution parameters shared by the subcommands.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunTable {
    pub seed: Option<u64>,
    pub drops: Option<u64>,
    pub model: Option<String>,
    pub interferers: Option<String>,
    pub sinr_mode: Option<String>,
    pub thresholds_db: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub t_db: Option<f64>,
    pub delta_max: Option<f64>,
}

/// Whole config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub system: SystemTable,
    #[serde(default)]
    pub run: RunTable,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let parsed: FileConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))?;
        Ok(parsed)
    }

    /// System parameters with the file's overrides applied over defaults.
    pub fn system_config(&self) -> SystemConfig {
        let mut cfg = SystemConfig::default();
        let t = &self.system;
        if let Some(v) = t.lambda_b {
            cfg.lambda_b = v;
        }
        if let Some(v) = t.m_antennas {
            cfg.m_antennas = v;
        }
        if let Some(v) = t.k_users {
            cfg.k_users = v;
        }
        if let Some(v) = t.delta {
            cfg.delta = v;
        }
        if let Some(v) = t.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = t.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = t.delta_ref {
            cfg.delta_ref = v;
        }
        if let Some(v) = t.c_pl {
            cfg.c_pl = v;
        }
        if let Some(v) = t.p_t {
            cfg.p_t = v;
        }
        if let Some(v) = t.sigma2 {
            cfg.sigma2 = v;
        }
        if let Some(v) = t.guard_radius {
            cfg.guard_radius = Some(v);
        }
        if let Some(v) = t.window_radius {
            cfg.window_radius = Some(v);
        }
        if let Some(v) = t.t_coherence {
            cfg.t_coherence = v;
        }
        if let Some(v) = t.t_max_db {
            cfg.t_max_db = v;
        }
        if let Some(v) = t.alzer_n {
            cfg.alzer_n = v;
        }
        if let Some(v) = t.k_minus_one {
            cfg.k_minus_one = v;
        }
        cfg
    }
}

/// Which output formats to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub fn from_names<'a>(names: impl Iterator<Item = &'a str>) -> Result<Formats> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for name in names {
            match name {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => bail!("unknown output format {other:?} (expected csv, json or svg)"),
            }
        }
        Ok(f)
    }
}

/// A fully resolved experiment: everything a subcommand needs, validated.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: SystemConfig,
    pub model: DeploymentModel,
    pub interferers: InterfererMode,
    pub sinr_mode: SinrMode,
    /// Threshold grid in dB, strictly ascending.
    pub grid_db: Vec<f64>,
    pub n_drops: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Formats,
    /// Minimum-reuse target coverage probability.
    pub gamma: f64,
    /// Minimum-reuse threshold (dB).
    pub t_db: f64,
    /// Upper end of the reuse search / sweep range.
    pub delta_max: f64,
}

impl ExperimentSpec {
    /// Validates the cross-cutting invariants that do not belong to
    /// `SystemConfig` itself.
    pub fn validate(&self) -> Result<()> {
        self.config
            .validate()
            .context("invalid system configuration")?;
        if self.grid_db.len() < 2 {
            bail!("threshold grid needs at least two points");
        }
        if !self.grid_db.windows(2).all(|w| w[0] < w[1]) {
            bail!("threshold grid must be strictly ascending (dB)");
        }
        if self.n_drops == 0 {
            bail!("drop count must be at least 1");
        }
        Ok(())
    }

    /// The threshold grid converted to linear scale once, as every internal
    /// API expects.
    pub fn grid_linear(&self) -> Vec<f64> {
        self.grid_db
            .iter()
            .map(|&d| pilotcell::db_to_linear(d))
            .collect()
    }
}

pub fn parse_model(name: &str) -> Result<DeploymentModel> {
    match name {
        "random" => Ok(DeploymentModel::RandomPpp),
        "hex" => Ok(DeploymentModel::Hexagonal),
        "guard" => Ok(DeploymentModel::GuardRegion),
        other => bail!("unknown deployment model {other:?} (expected random, hex or guard)"),
    }
}

pub fn parse_interferers(name: &str) -> Result<InterfererMode> {
    match name {
        "voronoi" => Ok(InterfererMode::Voronoi),
        "xball" => Ok(InterfererMode::ExclusionBall),
        other => bail!("unknown interferer mode {other:?} (expected voronoi or xball)"),
    }
}

pub fn parse_sinr_mode(name: &str) -> Result<SinrMode> {
    match name {
        "instantaneous" => Ok(SinrMode::Instantaneous),
        "effective" => Ok(SinrMode::Effective),
        other => bail!("unknown SINR mode {other:?} (expected instantaneous or effective)"),
    }
}

/// Default threshold grid: -15 to 25 dB in 1 dB steps.
pub fn default_grid_db() -> Vec<f64> {
    (-15..=25).map(f64::from).collect()
}
