use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{quantity} = {value} outside valid range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no phase matching in range [{lo}, {hi}] {unit}")]
    NoPhaseMatching { lo: f64, hi: f64, unit: &'static str },

    #[error("grid coverage: {0}")]
    GridCoverage(String),

    #[error("expected {expected} domain, got {found}")]
    Domain {
        expected: &'static str,
        found: &'static str,
    },

    #[error("axis {axis} is not uniformly spaced (max relative deviation {deviation:e})")]
    NonUniformAxis { axis: &'static str, deviation: f64 },

    #[error("expected event count {expected:e} exceeds memory guard {limit:e}")]
    MemoryGuard { expected: f64, limit: f64 },

    #[error("channel {channel} timestamps not strictly increasing at index {index}")]
    Unsorted { channel: usize, index: usize },

    #[error("undefined g2 estimate: R_h={r_h}, R_h12={r_h12}, R_h1={r_h1}, R_h2={r_h2}")]
    UndefinedEstimate {
        r_h: f64,
        r_h12: f64,
        r_h1: f64,
        r_h2: f64,
    },

    #[error("topology {0} does not provide the required channels")]
    Topology(&'static str),

    #[error("incompatible dimensions: {left} vs {right}")]
    Dimension { left: String, right: String },

    #[error("rank-deficient design matrix: {0}")]
    RankDeficient(String),

    #[error("tables are not row-aligned; unmatched rows: {0:?}")]
    Alignment(Vec<String>),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty table: {0}")]
    EmptyTable(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
