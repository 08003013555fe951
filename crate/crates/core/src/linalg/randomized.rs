//! Randomized range finding and low-rank TSVD on matrix-free operators.
//!
//! The range finder draws Gaussian probes, doubling the probe count from 8
//! until the detected numerical rank leaves at least `oversampling` spare
//! directions. The cost of a solve is `O(R T_mult + M R^2)` for an operator
//! of numerical rank `R`.

use rand::Rng;

use super::{
    densify, gaussian_matrix, gaussian_vector, seeded_rng, svd, CMatrix, CVector, LinearOperator,
    TsvdConfig,
};
use crate::{Error, Result};

const INITIAL_PROBES: usize = 8;
const CERTIFY_PROBES: usize = 10;

#[derive(Debug, Clone)]
pub struct RandomizedSolution {
    pub x: CVector,
    /// Detected numerical rank of the operator.
    pub rank: usize,
    /// The range finder ran out of room and the operator was densified.
    pub dense_fallback: bool,
}

fn orthonormalize(y: CMatrix) -> CMatrix {
    if y.ncols() == 0 {
        return y;
    }
    y.qr().q()
}

/// Orthonormal basis of `range(A Omega)` refined by subspace iteration.
fn sample_range<A, R>(op: &A, probes: usize, power_iters: usize, rng: &mut R) -> CMatrix
where
    A: LinearOperator + ?Sized,
    R: Rng + ?Sized,
{
    let omega = gaussian_matrix(op.ncols(), probes, rng);
    let mut q = orthonormalize(op.apply_columns(&omega));
    for _ in 0..power_iters {
        let w = orthonormalize(op.apply_adjoint_columns(&q));
        q = orthonormalize(op.apply_columns(&w));
    }
    q
}

/// Low-rank factorization `A ~ (Q U_b) diag(sigma) V*` from a sampled range.
struct Sketch {
    q: CMatrix,
    inner: super::Svd,
}

impl Sketch {
    fn new<A: LinearOperator + ?Sized>(op: &A, q: CMatrix) -> Result<Self> {
        // B = Q* A, computed as (A* Q)*.
        let b = op.apply_adjoint_columns(&q).adjoint();
        let inner = svd(&b)?;
        Ok(Self { q, inner })
    }

    fn rank(&self, epsilon: f64) -> usize {
        self.inner.rank(epsilon)
    }

    fn solve(&self, b: &CVector, rank: usize) -> CVector {
        let qb = self.q.ad_mul(b);
        self.inner.truncated_solve(&qb, rank)
    }

    fn sigma_max(&self) -> f64 {
        self.inner.sigma_max()
    }

    fn leading_basis(&self, rank: usize) -> CMatrix {
        &self.q * self.inner.u.columns(0, rank)
    }
}

fn check_rhs<A: LinearOperator + ?Sized>(op: &A, b: &CVector) -> Result<()> {
    if b.len() != op.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has length {} but operator has {} rows",
            b.len(),
            op.nrows()
        )));
    }
    Ok(())
}

/// TSVD least squares for a matrix-free operator of low numerical rank.
///
/// Deterministic for a fixed `cfg.seed`. Falls back to densifying the
/// operator (and flags it) when the rank cannot be bracketed below
/// `min(rows, cols)`.
pub fn randomized_tsvd_solve<A: LinearOperator + ?Sized>(
    op: &A,
    b: &CVector,
    cfg: &TsvdConfig,
) -> Result<RandomizedSolution> {
    cfg.validate()?;
    check_rhs(op, b)?;
    let limit = op.nrows().min(op.ncols());
    let mut rng = seeded_rng(cfg.seed);
    let mut target = INITIAL_PROBES;
    loop {
        let probes = target + cfg.oversampling;
        if probes >= limit {
            let dense = densify(op);
            let dec = svd(&dense)?;
            let rank = dec.rank(cfg.epsilon);
            return Ok(RandomizedSolution {
                x: dec.truncated_solve(b, rank),
                rank,
                dense_fallback: true,
            });
        }
        let sketch = Sketch::new(op, sample_range(op, probes, cfg.power_iters, &mut rng))?;
        if sketch.sigma_max() == 0.0 {
            return Ok(RandomizedSolution {
                x: CVector::zeros(op.ncols()),
                rank: 0,
                dense_fallback: false,
            });
        }
        let rank = sketch.rank(cfg.epsilon);
        if rank <= target {
            return Ok(RandomizedSolution {
                x: sketch.solve(b, rank),
                rank,
                dense_fallback: false,
            });
        }
        target *= 2;
    }
}

/// Numerical rank `R` with `||A - Q_R Q_R* A||_2 <= epsilon * sigma_max`,
/// certified on 10 Gaussian probe vectors.
pub fn adaptive_rank_probe<A: LinearOperator + ?Sized>(op: &A, cfg: &TsvdConfig) -> Result<usize> {
    cfg.validate()?;
    let limit = op.nrows().min(op.ncols());
    if limit == 0 {
        return Ok(0);
    }
    let mut rng = seeded_rng(cfg.seed);
    let mut target = INITIAL_PROBES;
    // Halko-Martinsson-Tropp a posteriori factor: ||E|| <= 10 sqrt(2/pi) max ||E w_i||
    // with probability 1 - 10^-10.
    let factor = 10.0 * (2.0 / std::f64::consts::PI).sqrt();
    loop {
        let probes = target + cfg.oversampling;
        if probes >= limit {
            return Ok(svd(&densify(op))?.rank(cfg.epsilon));
        }
        let sketch = Sketch::new(op, sample_range(op, probes, cfg.power_iters, &mut rng))?;
        let sigma_max = sketch.sigma_max();
        if sigma_max == 0.0 {
            return Ok(0);
        }
        let rank = sketch.rank(cfg.epsilon);
        let basis = sketch.leading_basis(rank);
        let mut worst: f64 = 0.0;
        for _ in 0..CERTIFY_PROBES {
            let w = gaussian_vector(op.ncols(), &mut rng);
            let aw = op.apply(&w);
            let resid = &aw - &basis * basis.ad_mul(&aw);
            worst = worst.max(resid.norm());
        }
        if rank < probes && factor * worst <= cfg.epsilon * sigma_max {
            return Ok(rank);
        }
        target *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{tsvd_solve, ZeroOperator, C64};

    fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> CMatrix {
        let mut rng = seeded_rng(seed);
        gaussian_matrix(m, r, &mut rng) * gaussian_matrix(r, n, &mut rng)
    }

    #[test]
    fn zero_operator_gives_zero() {
        let op = ZeroOperator { rows: 50, cols: 40 };
        let b = CVector::from_element(50, C64::new(1.0, 0.0));
        let sol = randomized_tsvd_solve(&op, &b, &TsvdConfig::default()).unwrap();
        assert_eq!(sol.rank, 0);
        assert_eq!(sol.x.norm(), 0.0);
        assert_eq!(adaptive_rank_probe(&op, &TsvdConfig::default()).unwrap(), 0);
    }

    #[test]
    fn rank_three_matches_dense_residual() {
        let a = low_rank(50, 40, 3, 11);
        let mut rng = seeded_rng(12);
        let b = gaussian_vector(50, &mut rng);
        let cfg = TsvdConfig::default();
        let sol = randomized_tsvd_solve(&a, &b, &cfg).unwrap();
        assert_eq!(sol.rank, 3);
        assert!(!sol.dense_fallback);
        let dense = tsvd_solve(&a, &b, &cfg).unwrap();
        let r_rand = (&b - &a * &sol.x).norm();
        let r_dense = (&b - &a * dense).norm();
        assert!((r_rand - r_dense).abs() < 1e-10, "{r_rand} vs {r_dense}");
    }

    #[test]
    fn deterministic_given_seed() {
        let a = low_rank(50, 40, 3, 13);
        let b = CVector::from_element(50, C64::new(0.5, -1.0));
        let cfg = TsvdConfig {
            seed: 99,
            ..TsvdConfig::default()
        };
        let x1 = randomized_tsvd_solve(&a, &b, &cfg).unwrap().x;
        let x2 = randomized_tsvd_solve(&a, &b, &cfg).unwrap().x;
        assert_eq!(x1, x2);
    }

    #[test]
    fn full_rank_square_falls_back_to_dense() {
        let mut rng = seeded_rng(21);
        let a = gaussian_matrix(20, 20, &mut rng);
        let b = gaussian_vector(20, &mut rng);
        let sol = randomized_tsvd_solve(&a, &b, &TsvdConfig::default()).unwrap();
        assert!(sol.dense_fallback);
        assert_eq!(sol.rank, 20);
    }

    #[test]
    fn rank_probe_on_known_factors() {
        let cfg = TsvdConfig::with_epsilon(1e-10);
        assert_eq!(adaptive_rank_probe(&low_rank(80, 60, 5, 31), &cfg).unwrap(), 5);
        assert_eq!(adaptive_rank_probe(&low_rank(200, 150, 23, 32), &cfg).unwrap(), 23);
    }

    #[test]
    fn rank_probe_full_rank_matches_dense_svd() {
        let mut rng = seeded_rng(41);
        // Well-conditioned: identity plus a small perturbation.
        let a = CMatrix::identity(20, 20) + gaussian_matrix(20, 20, &mut rng) * C64::new(0.05, 0.0);
        let cfg = TsvdConfig::with_epsilon(1e-10);
        assert_eq!(svd(&a).unwrap().rank(1e-10), 20);
        assert_eq!(adaptive_rank_probe(&a, &cfg).unwrap(), 20);
    }
}
