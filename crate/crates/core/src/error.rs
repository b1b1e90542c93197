use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into two families: domain rejections (the input is outside
/// what the algorithm accepts) and invariant breaches (something that the
/// geometry guarantees did not happen, which signals a numerical bug).
/// [`Error::is_domain_rejection`] tells them apart; the CLI maps them to exit
/// codes 1 and 2 respectively.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("interior fold vertex gives a closed chain; only boundary (open-chain) origami is supported")]
    ClosedChainUnsupported,

    #[error("sector {index} has angle {angle} >= pi; subdivide it with a flat crease")]
    SectorTooLarge { index: usize, angle: f64 },

    #[error("arc {index} has length {length}, outside the open interval (0, pi)")]
    ArcLength { index: usize, length: f64 },

    #[error("total length {total} >= 2*pi: chains of length >= 2*pi may not be reconfigurable")]
    ChainTooLong { total: f64 },

    #[error("edge {edge}: vertex distance {actual} does not match arc length {expected}")]
    LengthMismatch {
        edge: usize,
        expected: f64,
        actual: f64,
    },

    #[error("configuration self-intersects (edges {first} and {second})")]
    SelfIntersecting { first: usize, second: usize },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("random chain sampling failed after {attempts} attempts: {reason}")]
    SamplingFailed { attempts: usize, reason: String },

    #[error("internal invariant breached: {0}")]
    Invariant(String),

    #[error("document error at `{path}`: {message}")]
    Document { path: String, message: String },
}

impl Error {
    /// True for input the algorithm legitimately refuses, false for failures
    /// that contradict a proven property.
    pub fn is_domain_rejection(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
