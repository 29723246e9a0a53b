use thiserror::Error;

/// Errors surfaced by the simulator and the closed-form evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "pilot reuse factor {delta} cannot tile a hexagonal lattice; \
         nearest valid cluster sizes are {lower} and {upper}"
    )]
    InvalidHexReuse { delta: u32, lower: u32, upper: u32 },

    #[error(
        "quadrature did not converge: requested relative tolerance {requested:.3e}, \
         achieved {achieved:.3e} (partial value {partial:.6e})"
    )]
    QuadratureNoConvergence {
        requested: f64,
        achieved: f64,
        partial: f64,
    },

    #[error("gamma function domain error: argument {0} is not positive")]
    GammaDomain(f64),

    #[error("interference moment diverges: guard radius must be positive when omega*alpha > 2")]
    DivergentInterference,

    #[error("infinite path-loss gain: distance and reference distance are both zero")]
    InfinitePathLoss,

    #[error(
        "pilot overhead K*Delta = {overhead} exceeds the coherence block length {t_coherence}"
    )]
    OverheadExceeded { overhead: f64, t_coherence: f64 },

    #[error("empty sample set")]
    EmptySamples,

    /// Generic numerical failure (non-finite integrand values and the like).
    #[error("numerical error: {0}")]
    Numerics(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
