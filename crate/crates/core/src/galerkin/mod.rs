//! Enriched spectral-Galerkin solvers for `-lap u = f` on `[-1, 1]^2` with
//! homogeneous Dirichlet data.
//!
//! The conventional basis is `phi_i(x) phi_j(y)` with
//! `phi_i(z) = (1 - z^2) J_{i-1}^{(1,1)}(z)`; enrichment functions are corner
//! singular terms at `(-1, -1)`. `A11^{-1}` is applied through a dense
//! Cholesky factorization.

mod assemble;
mod problem;
pub mod quadrature;
mod singular;
mod solve;

pub use assemble::{assemble_galerkin, GalerkinSystem, QUADRATURE_TOLERANCE};
pub use problem::{smooth_part, EllipticProblem};
pub use singular::{Jet, SingularTerm};
pub use solve::{
    default_quad_order, method_system, error_study, esg1_solve, esg2_solve, esg_collocation_solve,
    interior_grid, solve_method, ErrorRow, GalerkinSolution, GalerkinSolve, Method, Reference,
};
