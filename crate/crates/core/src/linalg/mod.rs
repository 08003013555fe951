//! Dense and structured linear algebra.
//!
//! Everything is complex: the Fourier family needs it, and real problems embed
//! with zero imaginary parts. Dense storage is nalgebra's column-major
//! [`DMatrix`](nalgebra::DMatrix).

mod norm;
mod operator;
mod random;
mod randomized;
mod svd;

pub use norm::{operator_norm, NormEstimate};
pub use operator::{check_adjoint, densify, FnOperator, LinearOperator, ZeroOperator};
pub use random::{gaussian_matrix, gaussian_vector, seeded_rng};
pub use randomized::{adaptive_rank_probe, randomized_tsvd_solve, RandomizedSolution};
pub use svd::{
    cholesky_inverse_operator, ensure_finite, numerical_rank, pseudo_inverse, qr_left_inverse,
    qr_least_squares, svd, tsvd_solve, tsvd_solve_ranked, CholeskySolver, Svd, TsvdSolution,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type C64 = num_complex::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// Lift a real vector into the complex field.
pub fn complexify(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}

/// Truncation and randomization settings shared by every TSVD-based solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsvdConfig {
    /// Singular values `<= epsilon * sigma_max` are discarded.
    pub epsilon: f64,
    /// Extra Gaussian probe columns in the randomized range finder.
    pub oversampling: usize,
    /// Subspace iterations applied to the sampled range.
    pub power_iters: usize,
    pub seed: u64,
}

impl Default for TsvdConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-12,
            oversampling: 10,
            power_iters: 1,
            seed: 0,
        }
    }
}

impl TsvdConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}
