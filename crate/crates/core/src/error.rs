use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed document, missing required key, or unknown key. The serde
    /// message names the offending key.
    #[error("invalid config document: {0}")]
    Parse(String),

    #[error("config value `{key}` = {value} is out of range: {reason}")]
    OutOfRange {
        key: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("config value `{key}` is not finite")]
    NonFinite { key: &'static str },

    #[error("unknown override key `{0}`")]
    UnknownKey(String),

    #[error("cannot parse override `{0}` (expected KEY=VALUE with a numeric value)")]
    BadOverride(String),

    #[error("mode grid: {0}")]
    Grid(String),

    #[error("conjugate pairing index {index} out of range for {len} modes")]
    PairingOutOfRange { index: usize, len: usize },

    #[error("invalid detector id {0} (expected 1 or 2)")]
    InvalidDetector(u8),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("resource exhaustion: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
