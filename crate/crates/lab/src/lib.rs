//! Experiment driver: configuration, cached family sweeps, CSV and SVG output.

pub mod cache;
pub mod config;
pub mod pipeline;
pub mod plot;
pub mod sweep;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] dnlab_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("cache entry {0}: {1}")]
    Cache(String, String),
}
