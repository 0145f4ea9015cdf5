use std::path::PathBuf;

use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too coarse: {cells} cells (need at least {min})")]
    GridTooCoarse { cells: usize, min: usize },

    #[error("bad domain: {0}")]
    BadDomain(String),

    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("numeric fault: {0}")]
    NumericFault(String),

    #[error("degenerate pair: {0}")]
    DegeneratePair(String),

    #[error("divergent integral: s = {s}, p = {p} (need p > (s + 1) / 2)")]
    DivergentIntegral { s: f64, p: f64 },

    #[error("N = 4 has no finite K3; the L2 mass of the bubble scales like eps |ln eps|")]
    LogScaledRegime,

    #[error("weight sample {value} at r = {r} is not positive")]
    IndefiniteWeight { r: f64, value: f64 },

    #[error("inverse iteration stalled after {iterations} iterations (last Rayleigh quotient {rayleigh})")]
    SpectralStall { iterations: usize, rayleigh: f64 },

    #[error("lambda = {lambda} is below the eigenfunction threshold {threshold} (pair energy {value})")]
    ThresholdNotReached { lambda: f64, threshold: f64, value: f64 },

    #[error("bad spectrum: {0}")]
    BadSpectrum(String),

    #[error("bubble with eps = {epsilon} has only {nodes} nodes inside sqrt(eps) (need {min})")]
    UnderResolvedBubble { epsilon: f64, nodes: usize, min: usize },

    #[error("parameters outside the expansion table: {0}")]
    OutsideTable(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("degenerate denominator: integral of u v vanishes")]
    DegenerateDenominator,

    #[error("config error: {0}")]
    ConfigError(String),

    #[error("i/o error on {path}: {source}")]
    IoError {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("refusing to write an empty report")]
    EmptyReport,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoError {
            path: path.into(),
            source,
        }
    }
}
