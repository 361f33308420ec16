//! Exact eigensystem solver for corner-modified banded block-Toeplitz
//! matrices.
//!
//! A banded block-Toeplitz matrix is determined by a matrix Laurent
//! polynomial (the symbol); a corner modification is an arbitrary
//! perturbation confined to the boundary rows. The solver works in the bulk
//! solution space: kernel vectors of the symbol's translation action,
//! spanned by exponential (and polynomially modulated) sequences plus
//! edge-localized finite-support sequences. Projecting the full kernel
//! condition onto the boundary rows yields a small boundary matrix whose
//! size is independent of N; eigenvalues, eigenvectors and generalized
//! eigenvectors all reduce to dense linear algebra on that matrix.
//!
//! Modules:
//! - [`laurent`]: matrix Laurent polynomials, evaluation maps, determinants.
//! - [`rootfind`]: clustered polynomial root finding with multiplicities.
//! - [`bulk`]: the bulk solution basis (extended + finite-support).
//! - [`boundary`]: boundary matrix assembly, kernels, reconstruction.
//! - [`eigensystem`]: products, eigenvalue search, generalized eigenspaces.
//! - [`oracle`]: dense brute-force references for desk-scale verification.
//! - [`semiinfinite`]: bound states of half-infinite problems.
//! - [`models`]: the Kitaev chain with its closed-form checks.
//! - [`doc`]: the JSON problem-document format used by the CLI.

pub mod boundary;
pub mod bulk;
pub mod doc;
pub mod eigensystem;
pub mod error;
pub mod laurent;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod rootfind;
pub mod semiinfinite;

pub use error::{Error, Result};
