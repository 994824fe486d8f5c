use thiserror::Error;

/// Error type shared by every module in the crate.
///
/// The variants separate caller mistakes (bad inputs, bad parameters) from
/// hypothesis failures of the closed-form theorems and from genuine
/// numerical breakdowns, so that front ends can map them to distinct exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix or vector fails a structural state check
    /// (hermiticity, trace, positivity, normalization).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An operation needs a bipartite split that the state does not carry.
    #[error("missing bipartite split: {0}")]
    MissingSplit(String),

    /// A scalar parameter lies outside the supported domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A full-rank state was required but a (numerically) singular one was
    /// supplied.
    #[error("singular state: {0}")]
    Singular(String),

    /// A closed-form routine was invoked outside the hypotheses of the
    /// theorem backing it.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// A numerical routine failed to reach its target tolerance; the
    /// message records the tolerance actually achieved.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A registry spec string or other textual input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
