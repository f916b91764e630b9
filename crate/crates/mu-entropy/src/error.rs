//! Error type shared across the library.
//!
//! Every fallible operation returns [`Result`]. The variants map onto the CLI
//! exit codes: configuration/parse problems exit 2, budget exhaustion exits 3,
//! numerical diagnostics (rank ambiguity, invariant violations) exit 4.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must share a dimension or measure do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An explicit measure whose weights do not sum to 1 within tolerance.
    /// Inputs are rejected, never silently renormalized.
    #[error("measure not normalized: weights sum to {sum} (tolerance {tol})")]
    NotNormalized { sum: f64, tol: f64 },

    /// A measure weight that is zero or negative; all atoms must carry
    /// strictly positive mass.
    #[error("weight at index {index} is not strictly positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    /// Partition blocks that are empty, overlapping, out of range, or fail to
    /// cover {0..J-1}.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// An index argument outside the matrix dimension.
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    /// An operator spec whose parameters cannot produce the requested number
    /// of columns.
    #[error("operator spec cannot produce {requested} columns: {reason}")]
    InsufficientSpec { requested: usize, reason: String },

    /// A Koopman permutation that is not a bijection or moves mass between
    /// atoms of unequal measure.
    #[error("inadmissible permutation: {0}")]
    InadmissiblePermutation(String),

    /// A matrix failing the semibistochastic invariants (nonnegative entries,
    /// row and column sums at most 1).
    #[error("matrix is not semibistochastic: {0}")]
    NotSemibistochastic(String),

    /// Path enumeration exceeded its configured budget.
    #[error("enumeration budget exceeded: {needed} paths requested, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    /// A numerical diagnostic: unstable kernel dimension, projector identity
    /// violation, non-convergence.
    #[error("numerical diagnostic: {0}")]
    Numerical(String),

    /// Configuration file problems (I/O or JSON shape).
    #[error("config error: {0}")]
    Config(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
