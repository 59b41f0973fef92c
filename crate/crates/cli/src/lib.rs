//! Files, evaluation harness and plotting for `visuomotor-core`.
//!
//! - [`binfmt`]: binary network and association-table files
//! - [`dataset`]: line-delimited JSON datasets with a schema header
//! - [`config`]: TOML run configuration and its digest
//! - [`bundle`]: model bundle directories with a manifest
//! - [`harness`]: parallel stage evaluation, adaptation comparison, metrics files
//! - [`plot`]: SVG figures rendered from metrics and network files
//! - [`pipeline`]: the dataset, training and adaptation steps behind the CLI

pub mod binfmt;
pub mod bundle;
pub mod config;
pub mod dataset;
pub mod harness;
pub mod pipeline;
pub mod plot;

use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    TomlDe(#[from] toml::de::Error),
    #[error("toml: {0}")]
    TomlSer(#[from] toml::ser::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("plot: {0}")]
    Plot(String),
    #[error("bad magic number")]
    BadMagic,
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("file is truncated")]
    Truncated,
    #[error("corrupt file: {0}")]
    Corrupt(&'static str),
    #[error("unknown dataset schema `{0}`")]
    Schema(String),
    #[error("expected a {expected} dataset, found `{found}`")]
    Kind { expected: &'static str, found: String },
    #[error("bundles were built for different robots")]
    RobotMismatch,
    #[error(transparent)]
    Core(#[from] visuomotor_core::Error),
}

impl FormatError {
    /// Short machine-readable error code.
    pub fn code(&self) -> &'static str {
        use visuomotor_core::Error as E;
        match self {
            FormatError::Io(_) => "io",
            FormatError::Json(_) | FormatError::TomlDe(_) | FormatError::TomlSer(_) | FormatError::Csv(_) => "parse",
            FormatError::Plot(_) => "plot",
            FormatError::BadMagic
            | FormatError::Version(_)
            | FormatError::Truncated
            | FormatError::Corrupt(_)
            | FormatError::Schema(_)
            | FormatError::Kind { .. } => "format",
            FormatError::RobotMismatch => "robot_mismatch",
            FormatError::Core(E::MissingModel(_)) => "missing_model",
            FormatError::Core(E::StaleTable(_)) => "stale_table",
            FormatError::Core(_) => "core",
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Derives an independent seed for one purpose from the run seed.
pub fn sub_seed(seed: u64, purpose: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(purpose.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}
