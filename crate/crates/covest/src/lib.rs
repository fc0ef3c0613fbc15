//! Optimal covariant estimation of unknown unitary actions drawn from a
//! projective representation of a compact group.
//!
//! The crate is organized in layers:
//!
//! * [`matcore`] — dense complex matrices/vectors and the spectral solvers.
//! * [`groups`] — finite groups and U(1), projective representations,
//!   Choi vectors and Haar averaging.
//! * [`irreps`] — isotypic decomposition with aligned multiplicity bases,
//!   plus the compressed pair-space machinery built on top of it.
//! * [`gpovm`] — generalized measurements normalized against the average
//!   state, covariance, covariantization, comb constraints and risks.
//! * [`optimal`] — risk/normalization operators, the optimal covariant seed,
//!   the canonical parallel scheme and the seed-to-input simulation map.
//! * [`cli`] — configuration loading and the subcommand implementations
//!   behind the `covest` binary.

pub mod cli;
pub mod gpovm;
pub mod groups;
pub mod irreps;
pub mod matcore;
pub mod optimal;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dim(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numerical degeneracy: {0}")]
    Degeneracy(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default absolute tolerance for operator comparisons. All operators in
/// scope are O(1) in max-norm after the stated normalizations, so absolute
/// comparisons are meaningful.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default relative cutoff for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
