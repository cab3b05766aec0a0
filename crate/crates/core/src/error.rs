use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The iterated-logarithm chain is undefined at the requested level.
    #[error("chain level {level} undefined at a = {a} (denominator {denominator:e} <= 0)")]
    ChainUndefined { level: usize, a: f64, denominator: f64 },

    /// A bracketed root search could not be completed.
    #[error("root solver failed on [{lo}, {hi}]: {reason}")]
    Solver { lo: f64, hi: f64, reason: String },

    /// Non-finite input or intermediate values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Grid construction or grid/profile mismatch.
    #[error("grid error: {0}")]
    Grid(String),

    /// A profile was evaluated on a frame the operation does not accept.
    #[error("frame mismatch: expected {expected}, found {found}")]
    FrameMismatch { expected: String, found: String },

    /// Quotient with a vanishing denominator.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Iterative minimization failed.
    #[error("minimization diverged: {0}")]
    Divergence(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
