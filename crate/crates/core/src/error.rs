use thiserror::Error;

/// Errors surfaced by the library. Contract violations (slice length
/// mismatches, out-of-range indices) panic instead: they are programming
/// errors, not runtime conditions.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or unusable run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A requested computation exceeds a built-in resource cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// The propagation produced a non-finite value.
    #[error("diverged at step {step}: {detail}")]
    Diverged { step: usize, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file (tabulated potential).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
