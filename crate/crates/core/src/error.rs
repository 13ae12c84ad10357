use thiserror::Error;

/// Errors raised by the structural, design and numeric layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("system is not generically observable: {0}")]
    NotObservable(String),

    /// The state-fusion-only design needs a system matrix of full S-rank.
    #[error("system matrix has S-rank {srank} < {n}; the state-fusion-only design needs full S-rank, use the main or output design")]
    SRankDeficient { srank: usize, n: usize },

    /// A parent SCC that no agent measures.
    #[error("parent SCC {states:?} is not measured by any agent")]
    Placement { states: Vec<usize> },

    #[error("no stabilizing block-diagonal gain found (best spectral radius {best_rho:.6})")]
    NoStabilizingGainFound { best_rho: f64 },

    /// The distributed structure is not observable, so no gain can exist generically.
    #[error("distributed structure is not generically observable: {0}")]
    Structural(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
