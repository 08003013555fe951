//! Change-of-basis functions, the inverse Christoffel function, singular
//! value profiles and interlacing counts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bases::{EnrichedBasis, Grid, InverseKind, PartialInverse, Points};
use crate::linalg::{densify, svd, CMatrix, LinearOperator, C64};
use crate::{Error, Result};

/// Directions below this fraction of the largest singular value are dropped
/// when orthonormalizing.
pub const ORTHONORMAL_CUTOFF: f64 = 1e-12;

/// `psi~_k = psi_k - sum_n c_{n,k} phi_n` with `c = Z11* psi_k(structured)`,
/// sampled at `eval_points` (one column per enrichment function).
///
/// Extra points of `grid` play no role.
pub fn change_of_basis_functions(
    basis: &EnrichedBasis,
    grid: &Grid,
    z11: &PartialInverse,
    eval_points: &Points,
) -> Result<CMatrix> {
    if !matches!(z11.kind(), InverseKind::TwoSided | InverseKind::Left) {
        return Err(Error::Unsupported(format!(
            "change of basis needs an inverse or left inverse, got {}",
            z11.kind().name()
        )));
    }
    if basis.k() == 0 {
        return Ok(CMatrix::zeros(eval_points.len(), 0));
    }
    let psi_structured = basis.eval_enrichment(&grid.structured)?;
    let coeffs = z11.op().apply_columns(&psi_structured);
    let phi = basis.eval_conventional(eval_points)?;
    let psi = basis.eval_enrichment(eval_points)?;
    Ok(psi - phi * coeffs)
}

/// Equispaced fine grid on `[a, b]` with trapezoid weights.
pub fn trapezoid_grid(points: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(points >= 2, "trapezoid rule needs two points");
    let h = (b - a) / (points - 1) as f64;
    let t = (0..points).map(|i| a + i as f64 * h).collect();
    let w = (0..points)
        .map(|i| if i == 0 || i == points - 1 { 0.5 * h } else { h })
        .collect();
    (t, w)
}

/// The inverse Christoffel function of a sampled function space.
#[derive(Debug, Clone)]
pub struct Christoffel {
    /// Values on the fine grid.
    pub values: Vec<f64>,
    /// Maps sampled spanning functions to an orthonormal basis.
    pub combination: CMatrix,
    pub rank: usize,
}

impl Christoffel {
    /// Evaluate from samples of the same spanning functions at new points.
    pub fn eval(&self, samples: &CMatrix) -> Vec<f64> {
        let q = samples * &self.combination;
        q.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect()
    }
}

/// Orthonormalize the columns of `samples` under the discrete inner product
/// with `weights` and return the pointwise sum of squares.
pub fn inverse_christoffel(samples: &CMatrix, weights: &[f64]) -> Result<Christoffel> {
    if samples.nrows() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples but {} weights",
            samples.nrows(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidArgument("quadrature weights must be positive".into()));
    }
    let mut scaled = samples.clone();
    for (i, &w) in weights.iter().enumerate() {
        scaled.row_mut(i).scale_mut(w.sqrt());
    }
    let f = svd(&scaled)?;
    let rank = f.rank(ORTHONORMAL_CUTOFF);
    if rank == 0 {
        return Err(Error::Numerical("function space has numerical rank zero".into()));
    }
    let combination = CMatrix::from_fn(samples.ncols(), rank, |i, j| {
        f.v[(i, j)] / C64::new(f.singular_values[j], 0.0)
    });
    let values: Vec<f64> = (0..samples.nrows())
        .map(|i| (0..rank).map(|j| f.u[(i, j)].norm_sqr()).sum::<f64>() / weights[i])
        .collect();
    Ok(Christoffel { values, combination, rank })
}

/// Descending singular values with optional marker indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularProfile {
    pub values: Vec<f64>,
    pub markers: Vec<usize>,
}

impl SingularProfile {
    /// Markers at `K + M_K` from the top and `total - K` from the bottom.
    pub fn with_markers(mut self, k: usize, m_k: usize) -> Self {
        let total = self.values.len();
        self.markers = vec![k + m_k, total.saturating_sub(k)];
        self
    }

    pub fn to_csv(&self) -> String {
        two_column_csv(
            "index",
            "sigma",
            &(1..=self.values.len()).map(|i| i as f64).collect::<Vec<_>>(),
            &self.values,
        )
    }
}

/// Singular values of a dense matrix.
pub fn singular_profile(a: &CMatrix) -> Result<SingularProfile> {
    Ok(SingularProfile {
        values: svd(a)?.singular_values,
        markers: Vec::new(),
    })
}

/// Singular values of `A - A Z* A`, where `z` has the shape of `a`.
pub fn plunge_profile(a: &dyn LinearOperator, z: &dyn LinearOperator) -> Result<SingularProfile> {
    if a.nrows() != z.nrows() || a.ncols() != z.ncols() {
        return Err(Error::DimensionMismatch("A and Z differ in shape".into()));
    }
    let ad = densify(a);
    let zs = densify(z).adjoint();
    singular_profile(&(&ad - &ad * zs * &ad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interlacing {
    pub count_below_a: usize,
    pub count_above_b: usize,
    pub k: usize,
    pub m_k: usize,
    /// `count_below_a <= K` and `count_above_b <= K + M_K`.
    pub pass: bool,
    /// `M_N + M_K >= N + K`; without it the counts carry no guarantee.
    pub precondition_met: bool,
}

/// Count singular values of `A` outside `[a, b]`, where `A11` is the leading
/// `sub_dims = (M_N, N)` block. `A` has `N + K` singular values, padded with
/// zeros when it has fewer rows than columns.
pub fn interlacing_check(a_full: &CMatrix, sub_dims: (usize, usize), a: f64, b: f64) -> Result<Interlacing> {
    let (m_n, n) = sub_dims;
    let (rows, cols) = a_full.shape();
    if m_n > rows || n > cols {
        return Err(Error::DimensionMismatch("A11 does not fit inside A".into()));
    }
    let (k, m_k) = (cols - n, rows - m_n);
    let mut sigma = svd(a_full)?.singular_values;
    sigma.resize(cols, 0.0);
    let tol = 1e-12;
    let count_below_a = sigma.iter().filter(|&&s| s < a * (1.0 - tol)).count();
    let count_above_b = sigma.iter().filter(|&&s| s > b * (1.0 + tol)).count();
    Ok(Interlacing {
        count_below_a,
        count_above_b,
        k,
        m_k,
        pass: count_below_a <= k && count_above_b <= k + m_k,
        precondition_met: rows >= cols,
    })
}

/// [`interlacing_check`] with `a`, `b` the extreme singular values of `A11`.
pub fn interlacing_check_auto(a_full: &CMatrix, sub_dims: (usize, usize)) -> Result<Interlacing> {
    let (m_n, n) = sub_dims;
    let s = svd(&a_full.view((0, 0), (m_n, n)).into_owned())?;
    let mut sv = s.singular_values;
    sv.resize(n, 0.0);
    let a = sv.last().copied().unwrap_or(0.0);
    interlacing_check(a_full, sub_dims, a, sv[0])
}

/// Two-column CSV with a header row.
pub fn two_column_csv(x_name: &str, y_name: &str, x: &[f64], y: &[f64]) -> String {
    let mut out = format!("{x_name},{y_name}\n");
    for (a, b) in x.iter().zip(y) {
        let _ = writeln!(out, "{a:e},{b:e}");
    }
    out
}
