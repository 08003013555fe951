//! Schur complement solve of a square block system.

use crate::bases::BlockSystem;
use crate::linalg::{svd, CVector, LinearOperator, TsvdConfig};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SchurSolution {
    pub x: CVector,
    /// The Schur complement was numerically singular and was solved by TSVD.
    pub tsvd_fallback: bool,
}

/// Solve `A x = b` for a square block system via
/// `S = A22 - A21 A11^{-1} A12`. `a11_inverse` applies `A11^{-1}`.
pub fn schur_solve(
    sys: &BlockSystem,
    a11_inverse: &dyn LinearOperator,
    b: &CVector,
    cfg: &TsvdConfig,
) -> Result<SchurSolution> {
    let d = sys.dims();
    if d.m_n != d.n || d.m_k != d.k {
        return Err(Error::DimensionMismatch(format!(
            "Schur complement needs square blocks, got {d:?}"
        )));
    }
    if a11_inverse.nrows() != d.n || a11_inverse.ncols() != d.n || b.len() != d.rows() {
        return Err(Error::DimensionMismatch("A11 inverse or b has the wrong size".into()));
    }
    let (b_n, b_k) = sys.split_rows(b);
    let c = a11_inverse.apply_columns(&sys.a12);
    let s = &sys.a22 - &sys.a21 * &c;
    let y = a11_inverse.apply(&b_n);
    let rhs = &b_k - &sys.a21 * &y;
    let (x_k, tsvd_fallback) = if d.k == 0 {
        (CVector::zeros(0), false)
    } else {
        let f = svd(&s)?;
        let rank = f.rank(cfg.epsilon);
        (f.truncated_solve(&rhs, rank), rank < d.k)
    };
    let x_n = a11_inverse.apply(&(&b_n - &sys.a12 * &x_k));
    let mut x = CVector::zeros(d.cols());
    x.rows_mut(0, d.n).copy_from(&x_n);
    x.rows_mut(d.n, d.k).copy_from(&x_k);
    Ok(SchurSolution { x, tsvd_fallback })
}
