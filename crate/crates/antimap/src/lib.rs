//! Optimal physical approximations of the transposition map.
//!
//! The transposition `rho -> rho^T` is positive but not completely positive,
//! so no quantum channel implements it exactly. This crate builds the best
//! completely positive approximations and every standard realization of them:
//!
//! * [`transpose`] — the optimal universal machine for a `d`-dimensional
//!   system (Choi operator `2/(d+1) P_S`, Kraus set, Stinespring isometry)
//!   together with the 1-to-2 cloning map realized by the same isometry.
//! * [`dilation`] — a unitary on three copies of the system plus a fixed
//!   symmetric ancilla state that dilates the isometry; tracing out different
//!   subsystems yields the transpose approximation or the optimal cloner.
//! * [`cv`] — the displacement-covariant construction for a single bosonic
//!   mode at a finite Fock cutoff: beam-splitter form of the Choi operator,
//!   seed-dependent eigenproblem, fidelity 1/2 for coherent seeds.
//! * [`channels`] — Choi/Kraus/Stinespring representations, conversions and
//!   physicality checks used by all of the above.
//! * [`linalg`] — the dense complex matrix layer and the operator/vector
//!   (double-ket) calculus.
//! * [`cli`] — the `antimap` command-line surface with JSON/CSV reports and
//!   a full verification suite.

pub mod channels;
pub mod cli;
pub mod cv;
pub mod dilation;
pub mod linalg;
pub mod transpose;

use thiserror::Error;

/// Default absolute tolerance for numerical equality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("Choi operator is not completely positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },
    #[error("Choi operator is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },
    #[error("empty Kraus set")]
    EmptyKrausSet,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("Fock-space leakage {leakage:.3e} exceeds tolerance {tol:.3e}")]
    Leakage { leakage: f64, tol: f64 },
    #[error("invalid seed spec `{0}` (expected `vacuum`, `coherent:<re>,<im>` or `squeezed:<r>`)")]
    SeedSpec(String),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
