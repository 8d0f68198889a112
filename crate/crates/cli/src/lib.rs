//! Experiment runner for the subspace-sampling laboratory: configuration,
//! deterministic seeding, report emission, and the acceptance-suite driver.

pub mod config;
pub mod experiments;
pub mod report;
pub mod suite;

/// Runner-level errors: configuration and descriptor problems on top of the
/// numerical errors from the core crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Core(#[from] orthosphere::Error),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
