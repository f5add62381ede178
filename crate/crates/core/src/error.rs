use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: config, data files, contract violations on arguments.
    Input,
    /// A numerical procedure failed (no root, no convergence, singular system).
    Numerical,
    /// Filesystem or persistence failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{quantity} = {value} outside validity interval [{lo}, {hi}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("mass fractions sum to {sum}, expected 1")]
    NonNormalized { sum: f64 },

    #[error("{quantity} must be non-negative, got {value}")]
    NegativeInput { quantity: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no root in bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("bad subgrid mesh specification: {0}")]
    BadMeshSpec(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("not converged after {iterations} iterations (last change {last:e})")]
    NotConverged { iterations: usize, last: f64, history: Vec<f64> },

    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("insufficient data for {what}: need {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("negative driving force: bulk concentration {c_bulk} below saturation {c_sat}")]
    NegativeDriving { c_bulk: f64, c_sat: f64 },

    #[error("frozen flow file version {found}, expected {expected}")]
    VersionMismatch { found: String, expected: u32 },

    #[error("corrupt frozen flow file: {0}")]
    CorruptFile(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("target {target:e} not bracketed: rate(lo) = {rate_lo:e}, rate(hi) = {rate_hi:e}")]
    NotBracketed {
        target: f64,
        rate_lo: f64,
        rate_hi: f64,
    },

    #[error("runs do not share stations: {0}")]
    GridMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Ingest { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Io { .. } => ErrorKind::Io,
            NoBracket { .. }
            | SingularSystem(_)
            | NotConverged { .. }
            | FitDiverged(_)
            | InsufficientData { .. }
            | NegativeDriving { .. }
            | NotBracketed { .. } => ErrorKind::Numerical,
            OutOfRange { .. }
            | NonNormalized { .. }
            | NegativeInput { .. }
            | InvalidArgument(_)
            | BadMeshSpec(_)
            | VersionMismatch { .. }
            | CorruptFile(_)
            | EmptyInput(_)
            | GridMismatch(_)
            | Config(_)
            | Ingest { .. } => ErrorKind::Input,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
