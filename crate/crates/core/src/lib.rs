//! Fast least-squares approximation in enriched bases.
//!
//! An enriched basis is a conventional basis (Fourier, Chebyshev, homogenized
//! Jacobi) augmented with a handful of extra functions that capture a known
//! feature of the target: a non-periodic boundary, a logarithmic singularity,
//! a corner singularity of a PDE solution. The resulting least-squares
//! systems are ill-conditioned, but the AZ algorithm solves them stably and
//! fast by reusing a solver for the conventional part.
//!
//! Layout:
//!
//! * [`linalg`]: dense SVD, TSVD least squares, randomized low-rank solvers
//!   and the [`LinearOperator`] contract.
//! * [`bases`]: function families, sampling grids, block-system assembly and
//!   FFT/DCT-backed partial inverses.
//! * [`az`]: the generic AZ algorithm, the enriched block simplifications,
//!   Schur complement solves and error-bound factors.
//! * [`diagnostics`]: change-of-basis functions, inverse Christoffel
//!   function, singular value profiles and interlacing checks.
//! * [`galerkin`]: enriched spectral-Galerkin solvers for the Poisson problem.
//! * [`studies`]: desk-scale experiment drivers shared by the CLI, benches and
//!   acceptance tests.

pub mod az;
pub mod bases;
pub mod diagnostics;
mod error;
pub mod galerkin;
pub mod linalg;
pub mod studies;

pub use error::{Error, Result};

pub use az::{
    az_solve, enriched_az_solve, error_bound_factors, first_az_matrix, schur_solve, AzProblem,
    ErrorBoundFactors, FirstAzForm, FirstAzMatrix, SolveReport,
};
pub use bases::{
    assemble_block_system, BlockSystem, ConventionalFamily, Enrichment, EnrichedBasis, Grid,
    InverseKind, PartialInverse, Points,
};
pub use linalg::{CMatrix, CVector, LinearOperator, TsvdConfig, C64};
