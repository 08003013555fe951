use nalgebra::DVector;

use super::{CMatrix, CVector, LinearOperator, TsvdConfig, C64};
use crate::{Error, Result};

/// Thin SVD `A = U diag(sigma) V*` with `sigma` sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let s = DVector::from_iterator(
            self.singular_values.len(),
            self.singular_values.iter().map(|&s| C64::new(s, 0.0)),
        );
        let us = CMatrix::from_fn(self.u.nrows(), self.u.ncols(), |i, j| self.u[(i, j)] * s[j]);
        us * self.v.adjoint()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values strictly above `epsilon * sigma_max`.
    pub fn rank(&self, epsilon: f64) -> usize {
        let cut = epsilon * self.sigma_max();
        self.singular_values.iter().take_while(|&&s| s > cut && s > 0.0).count()
    }

    /// `V_r diag(1/sigma_r) U_r* b` restricted to the leading `rank` triplets.
    pub fn truncated_solve(&self, b: &CVector, rank: usize) -> CVector {
        let mut x = CVector::zeros(self.v.nrows());
        if rank == 0 {
            return x;
        }
        let ub = self.u.columns(0, rank).ad_mul(b);
        for k in 0..rank {
            let coef = ub[k] / self.singular_values[k];
            x.axpy(coef, &self.v.column(k), C64::new(1.0, 0.0));
        }
        x
    }
}

pub fn ensure_finite(a: &CMatrix) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let z = a[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Thin singular value decomposition of a finite matrix.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    ensure_finite(a)?;
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(Svd {
            u: CMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(n, 0),
        });
    }
    // Tall-skinny inputs go through a QR first so the bidiagonalization works
    // on an n x n factor.
    if m > 2 * n {
        let qr = a.clone().qr();
        let q = qr.q();
        let r = qr.r();
        let inner = svd(&r)?;
        return Ok(Svd {
            u: q * inner.u,
            singular_values: inner.singular_values,
            v: inner.v,
        });
    }
    let dec = a
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = dec.u.expect("u requested");
    let v = dec.v_t.expect("v requested").adjoint();
    let singular_values: Vec<f64> = dec.singular_values.iter().copied().collect();
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

#[derive(Debug, Clone)]
pub struct TsvdSolution {
    pub x: CVector,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Truncated-SVD least squares: discard `sigma_i <= epsilon * sigma_max`.
pub fn tsvd_solve(a: &CMatrix, b: &CVector, cfg: &TsvdConfig) -> Result<CVector> {
    tsvd_solve_ranked(a, b, cfg).map(|s| s.x)
}

pub fn tsvd_solve_ranked(a: &CMatrix, b: &CVector, cfg: &TsvdConfig) -> Result<TsvdSolution> {
    cfg.validate()?;
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has length {} but matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    let dec = svd(a)?;
    let rank = dec.rank(cfg.epsilon);
    Ok(TsvdSolution {
        x: dec.truncated_solve(b, rank),
        rank,
        singular_values: dec.singular_values,
    })
}

pub fn numerical_rank(a: &CMatrix, epsilon: f64) -> Result<usize> {
    Ok(svd(a)?.rank(epsilon))
}

/// Moore-Penrose pseudo-inverse with relative cutoff `epsilon`.
pub fn pseudo_inverse(a: &CMatrix, epsilon: f64) -> Result<CMatrix> {
    let dec = svd(a)?;
    let r = dec.rank(epsilon);
    let mut p = CMatrix::zeros(a.ncols(), a.nrows());
    for k in 0..r {
        let vk = dec.v.column(k);
        let uk = dec.u.column(k);
        let s = 1.0 / dec.singular_values[k];
        p += (vk * uk.adjoint()) * C64::new(s, 0.0);
    }
    Ok(p)
}

/// Dense least squares by Householder QR (full column rank assumed).
pub fn qr_least_squares(a: &CMatrix, b: &CVector) -> Result<CVector> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch("qr_least_squares rhs".into()));
    }
    if a.nrows() < a.ncols() {
        return Err(Error::InvalidArgument(
            "QR least squares needs rows >= cols".into(),
        ));
    }
    let qr = a.clone().qr();
    let qtb = qr.q().ad_mul(b);
    let r = qr.r();
    r.solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Factorization("R factor is singular".into()))
}

/// Left inverse `R^{-1} Q*` from a Householder QR of a full-column-rank matrix.
pub fn qr_left_inverse(a: &CMatrix) -> Result<CMatrix> {
    if a.nrows() < a.ncols() {
        return Err(Error::InvalidArgument(
            "a left inverse needs rows >= cols".into(),
        ));
    }
    let qr = a.clone().qr();
    let qa = qr.q().adjoint();
    qr.r()
        .solve_upper_triangular(&qa)
        .ok_or_else(|| Error::Factorization("R factor is singular".into()))
}

/// Applies `A^{-1}` for a Hermitian positive definite `A` via a stored
/// Cholesky factor. Self-adjoint, so the adjoint apply is the same solve.
#[derive(Debug, Clone)]
pub struct CholeskySolver {
    factor: nalgebra::Cholesky<C64, nalgebra::Dyn>,
    n: usize,
}

impl CholeskySolver {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("Cholesky needs a square matrix".into()));
        }
        ensure_finite(a)?;
        let n = a.nrows();
        let factor = a
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Factorization("matrix is not positive definite".into()))?;
        // nalgebra takes complex square roots of the pivots, so a negative
        // pivot shows up as an imaginary diagonal entry rather than a failure.
        let l = factor.l_dirty();
        for i in 0..n {
            let d = l[(i, i)];
            if !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re {
                return Err(Error::Factorization(format!(
                    "matrix is not positive definite (pivot {i})"
                )));
            }
        }
        Ok(Self { factor, n })
    }

    pub fn solve(&self, b: &CVector) -> CVector {
        self.factor.solve(b)
    }
}

impl LinearOperator for CholeskySolver {
    fn nrows(&self) -> usize {
        self.n
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &CVector) -> CVector {
        self.factor.solve(x)
    }
    fn apply_adjoint(&self, y: &CVector) -> CVector {
        self.factor.solve(y)
    }
    fn cost_hint(&self) -> f64 {
        2.0 * (self.n * self.n) as f64
    }
    fn apply_columns(&self, x: &CMatrix) -> CMatrix {
        self.factor.solve(x)
    }
    fn apply_adjoint_columns(&self, y: &CMatrix) -> CMatrix {
        self.factor.solve(y)
    }
}

pub fn cholesky_inverse_operator(a: &CMatrix) -> Result<CholeskySolver> {
    CholeskySolver::new(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, gaussian_vector, seeded_rng};

    fn real_diag(d: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            d.len(),
            d.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    #[test]
    fn identity_singular_values() {
        let s = svd(&CMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.singular_values.len(), 3);
        for v in s.singular_values {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_singular_values_sorted() {
        let s = svd(&real_diag(&[1.0, 3.0, 2.0])).unwrap();
        let expect = [3.0, 2.0, 1.0];
        for (a, b) in s.singular_values.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = seeded_rng(7);
        for (m, n) in [(20, 10), (10, 20), (60, 5)] {
            let a = gaussian_matrix(m, n, &mut rng);
            let s = svd(&a).unwrap();
            let diff = (s.reconstruct() - &a).camax();
            assert!(diff < 1e-12, "{m}x{n}: {diff}");
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = CMatrix::identity(2, 2);
        a[(1, 0)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(svd(&a), Err(Error::NonFinite { row: 1, col: 0 })));
    }

    #[test]
    fn tsvd_identity_and_truncation() {
        let b = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
        let x = tsvd_solve(&CMatrix::identity(3, 3), &b, &TsvdConfig::with_epsilon(1e-12)).unwrap();
        assert!((x - &b).norm() < 1e-15);

        let a = real_diag(&[1.0, 1e-16]);
        let b = CVector::from_element(2, C64::new(1.0, 0.0));
        let sol = tsvd_solve_ranked(&a, &b, &TsvdConfig::with_epsilon(1e-10)).unwrap();
        assert_eq!(sol.rank, 1);
        assert!((sol.x[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(sol.x[1], C64::new(0.0, 0.0));
    }

    #[test]
    fn tsvd_tie_is_truncated() {
        // sigma = 1e-3 equals epsilon * sigma_max exactly; strictly greater survives.
        let a = real_diag(&[1.0, 1e-3]);
        let b = CVector::from_element(2, C64::new(1.0, 0.0));
        let sol = tsvd_solve_ranked(&a, &b, &TsvdConfig::with_epsilon(1e-3)).unwrap();
        assert_eq!(sol.rank, 1);
    }

    #[test]
    fn tsvd_dimension_mismatch() {
        let b = CVector::zeros(4);
        assert!(matches!(
            tsvd_solve(&CMatrix::identity(3, 3), &b, &TsvdConfig::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn qr_least_squares_matches_tsvd_on_full_rank() {
        let mut rng = seeded_rng(3);
        let a = gaussian_matrix(30, 12, &mut rng);
        let b = gaussian_vector(30, &mut rng);
        let x1 = qr_least_squares(&a, &b).unwrap();
        let x2 = tsvd_solve(&a, &b, &TsvdConfig::with_epsilon(1e-14)).unwrap();
        assert!((x1 - x2).norm() < 1e-11);
    }

    #[test]
    fn qr_left_inverse_is_left_inverse() {
        let mut rng = seeded_rng(4);
        let a = gaussian_matrix(15, 6, &mut rng);
        let z = qr_left_inverse(&a).unwrap();
        let err = (z * &a - CMatrix::identity(6, 6)).camax();
        assert!(err < 1e-12);
    }

    #[test]
    fn cholesky_solver_inverts_spd() {
        let mut rng = seeded_rng(5);
        let g = gaussian_matrix(8, 8, &mut rng);
        let a = g.ad_mul(&g) + CMatrix::identity(8, 8);
        let solver = CholeskySolver::new(&a).unwrap();
        let b = gaussian_vector(8, &mut rng);
        let x = solver.apply(&b);
        assert!((&a * x - b).norm() < 1e-12);
        assert!(CholeskySolver::new(&(-a)).is_err());
    }
}
