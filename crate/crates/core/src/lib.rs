//! Pilot-contamination analysis for uplink massive MIMO under stochastic
//! geometry: deployment models (random PPP, hexagonal lattice, guard-region
//! PPP), drop-based SINR simulation, the closed-form coverage approximation
//! with its minimum-reuse solver, and the rate/throughput pipeline.

pub mod analytic;
pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod io;
pub mod montecarlo;
pub mod numerics;

pub use analytic::{
    analytic_ccdf_curve, b_omega, ccdf_theorem1, cell_throughput, i_omega,
    optimal_delta_throughput, p_omega, solve_min_delta, spectral_efficiency_analytic,
    spectral_efficiency_empirical, y_of_delta, AlzerTerms, MinDeltaResult, ThroughputSweep,
};
pub use channel::{estimate_channel, path_loss, sample_fading, tx_power, ChannelBlock};
pub use config::SystemConfig;
pub use error::{Error, Result};
pub use geometry::{
    build_deployment, build_hexagonal, drop_users, Deployment, DeploymentModel, UserDrop,
};
pub use montecarlo::{
    empirical_ccdf, run_drops, CcdfCurve, InterfererMode, Provenance, SinrMode, SinrSampleSet,
};
pub use numerics::{db_to_linear, linear_to_db, rng_stream, QuadratureSpec};
