//! Error types shared across the solver modules.

use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by symbol arithmetic, the bulk/boundary pipeline and the
/// dense reference routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two symbols with different block sizes were combined.
    #[error("block size mismatch: {0} vs {1}")]
    BlockSizeMismatch(usize, usize),

    /// An operation that requires a nonzero symbol received the zero symbol.
    #[error("operation undefined for the zero symbol")]
    ZeroSymbol,

    /// The (possibly shifted) symbol has an identically vanishing determinant,
    /// so the banded solution theory does not apply at this shift.
    #[error("singular symbol at shift {0}")]
    SingularSymbol(Complex64),

    /// The matrix dimension is too small for the requested structural
    /// construction to be valid.
    #[error("N = {actual} too small; need N >= {required}")]
    NTooSmall { required: usize, actual: usize },

    /// A dense reference computation would exceed the configured size cap.
    #[error("dense size {actual} exceeds cap {cap}")]
    OracleCapExceeded { actual: usize, cap: usize },

    /// A non-finite number reached an API boundary.
    #[error("non-finite value in input")]
    NonFinite,

    /// Structural validation of a problem description failed.
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    /// The eigenvalue search terminated without accounting for the full
    /// spectrum (only detectable when cross-checking is enabled).
    #[error("eigenvalue search incomplete: found {found} of {expected}")]
    SearchIncomplete { found: usize, expected: usize },

    /// Input rejected at evaluation time (e.g. z = 0 for a Laurent symbol).
    #[error("invalid evaluation point: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
