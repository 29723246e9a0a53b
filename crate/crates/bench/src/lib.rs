//! Shared fixtures for the criterion benchmarks; this crate has no runtime
//! code of its own.

use pilotcell::config::SystemConfig;

/// Baseline configuration used across benchmark groups: the library default
/// with the Alzer order raised to the value the comparison figures use.
pub fn bench_config() -> SystemConfig {
    SystemConfig {
        alzer_n: 5,
        ..SystemConfig::default()
    }
}
