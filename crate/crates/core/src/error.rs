use thiserror::Error;

/// Errors produced by the library. Variants distinguish structural problems
/// (malformed inputs) from domain problems (values outside an operation's
/// mathematical domain) and from search/iteration failures that carry
/// diagnostic payloads.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: non-square matrix, non-finite entry, dimension
    /// mismatch, bad serialization.
    #[error("structural error: {0}")]
    Structural(String),

    /// Input is syntactically fine but degenerate for the operation
    /// (e.g. duplicate points when building a metric).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input rejected because a precondition on the snowflaking function
    /// fails (axiom violation on the probed range).
    #[error("rejected input: {0}")]
    RejectedInput(String),

    /// The halving threshold T(t) does not exist because h(t)/t does not
    /// decay to a small enough value at infinity.
    #[error("unbounded threshold: {0}")]
    UnboundedThreshold(String),

    /// The threshold T~(S) does not exist because h(t)/t does not blow up
    /// near zero.
    #[error("zero threshold: {0}")]
    ZeroThreshold(String),

    /// No certified t_i was found inside the configured search range.
    #[error("search range exhausted: {0}")]
    SearchRange(String),

    /// The active linear segment of a piecewise function is too short to
    /// host the requested construction.
    #[error("segment too short: need length >= {required:.6e}, have {available:.6e}")]
    SegmentTooShort { required: f64, available: f64 },

    /// Iterative solver hit its iteration cap before reaching tolerance.
    #[error("iteration limit reached after {iterations} iterations, residual {residual:.6e}")]
    IterationLimit { iterations: usize, residual: f64 },

    /// No Ramsey-N provider was configured for a cardinality bound.
    #[error("bound unavailable: {0}")]
    BoundUnavailable(String),

    /// The requested norm is outside the supported family.
    #[error("unsupported norm: {0}")]
    UnsupportedNorm(String),
}

pub type Result<T> = std::result::Result<T, Error>;
