//! Partial inverses `Z11*` of the conventional block, verified at construction.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::families::{chebyshev_pairs_eval, chebyshev_values, lexicographic_pairs};
use super::fast::{ChebAxis, ChebyshevOperator, FourierOperator, ScaledAdjoint};
use super::grid::{grid_equispaced, Grid, GridKind, Points};
use crate::linalg::{
    densify, gaussian_vector, qr_left_inverse, seeded_rng, svd, CMatrix, LinearOperator, C64,
};
use crate::{Error, Result};

/// How `Z11*` relates to `A11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InverseKind {
    TwoSided,
    Left,
    Right,
    /// `A11 - A11 Z11* A11` has rank `rank_deficit`.
    Generalized { rank_deficit: usize },
}

impl InverseKind {
    pub fn name(&self) -> &'static str {
        match self {
            InverseKind::TwoSided => "two_sided",
            InverseKind::Left => "left",
            InverseKind::Right => "right",
            InverseKind::Generalized { .. } => "generalized",
        }
    }
}

/// Tolerance on `Z11* A11 - I` and `A11 Z11* - I`.
pub const KIND_TOLERANCE: f64 = 1e-10;

/// Above this many entries in `A11` the identity checks use random probes
/// instead of the full product.
pub const DENSE_VERIFY_LIMIT: usize = 1 << 20;

const PROBES: usize = 8;

/// `Z11*` together with its verified kind.
#[derive(Clone)]
pub struct PartialInverse {
    kind: InverseKind,
    op: Arc<dyn LinearOperator>,
    residual: f64,
    dense_fallback: bool,
}

impl std::fmt::Debug for PartialInverse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PartialInverse")
            .field("kind", &self.kind)
            .field("shape", &(self.op.nrows(), self.op.ncols()))
            .field("residual", &self.residual)
            .field("dense_fallback", &self.dense_fallback)
            .finish()
    }
}

impl PartialInverse {
    /// Wrap `op` after checking the claimed `kind` against `a11`.
    pub fn new(
        kind: InverseKind,
        op: Arc<dyn LinearOperator>,
        a11: &dyn LinearOperator,
    ) -> Result<Self> {
        if op.nrows() != a11.ncols() || op.ncols() != a11.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "Z11* is {}x{}, A11 is {}x{}",
                op.nrows(),
                op.ncols(),
                a11.nrows(),
                a11.ncols()
            )));
        }
        let residual = verify(kind, op.as_ref(), a11)?;
        Ok(PartialInverse {
            kind,
            op,
            residual,
            dense_fallback: false,
        })
    }

    pub fn from_dense(kind: InverseKind, z: CMatrix, a11: &dyn LinearOperator) -> Result<Self> {
        Self::new(kind, Arc::new(z), a11)
    }

    fn flag_dense(mut self) -> Self {
        self.dense_fallback = true;
        self
    }

    pub fn kind(&self) -> InverseKind {
        self.kind
    }

    pub fn op(&self) -> &dyn LinearOperator {
        self.op.as_ref()
    }

    pub fn shared_op(&self) -> Arc<dyn LinearOperator> {
        Arc::clone(&self.op)
    }

    /// Largest identity defect measured during verification (zero for the
    /// generalized kind, which is checked by rank).
    pub fn verification_residual(&self) -> f64 {
        self.residual
    }

    /// True when no fast transform applies and a dense left inverse was
    /// built instead; apply cost is then `O(N M_N)`.
    pub fn dense_fallback(&self) -> bool {
        self.dense_fallback
    }
}

fn identity_defect_dense(product: &CMatrix) -> f64 {
    let n = product.nrows();
    (product - CMatrix::identity(n, n)).camax()
}

/// `max |(Z A - I)|` either entrywise (small) or over random probes (large).
fn left_defect(z: &dyn LinearOperator, a: &dyn LinearOperator, seed: u64) -> f64 {
    let n = a.ncols();
    if n * a.nrows() <= DENSE_VERIFY_LIMIT {
        let za = z.apply_columns(&densify(a));
        identity_defect_dense(&za)
    } else {
        probe_defect(n, |x| z.apply(&a.apply(x)), seed)
    }
}

fn right_defect(z: &dyn LinearOperator, a: &dyn LinearOperator, seed: u64) -> f64 {
    let m = a.nrows();
    if m * a.ncols() <= DENSE_VERIFY_LIMIT {
        let az = a.apply_columns(&densify(z));
        identity_defect_dense(&az)
    } else {
        probe_defect(m, |y| a.apply(&z.apply(y)), seed)
    }
}

fn probe_defect(n: usize, f: impl Fn(&crate::linalg::CVector) -> crate::linalg::CVector, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..PROBES {
        let x = gaussian_vector(n, &mut rng);
        let r = f(&x) - &x;
        worst = worst.max(r.camax() / x.camax().max(f64::MIN_POSITIVE));
    }
    worst
}

fn verify(kind: InverseKind, z: &dyn LinearOperator, a: &dyn LinearOperator) -> Result<f64> {
    let fail = |residual: f64| Error::KindVerification {
        kind: kind.name().into(),
        residual,
        tolerance: KIND_TOLERANCE,
    };
    let check = |r: f64| if r <= KIND_TOLERANCE { Ok(r) } else { Err(fail(r)) };
    match kind {
        InverseKind::Left => check(left_defect(z, a, 0x5eed)),
        InverseKind::Right => check(right_defect(z, a, 0x5eed)),
        InverseKind::TwoSided => {
            if a.nrows() != a.ncols() {
                return Err(fail(f64::INFINITY));
            }
            let l = check(left_defect(z, a, 0x5eed))?;
            let r = check(right_defect(z, a, 0x5eee))?;
            Ok(l.max(r))
        }
        InverseKind::Generalized { rank_deficit } => {
            if a.nrows() * a.ncols() > DENSE_VERIFY_LIMIT {
                return Err(Error::Unsupported(
                    "generalized inverse verification needs a densifiable A11".into(),
                ));
            }
            let ad = densify(a);
            let defect = &ad - &ad * z.apply_columns(&ad);
            let scale = svd(&ad)?.sigma_max();
            let s = svd(&defect)?;
            let rank = s
                .singular_values
                .iter()
                .filter(|&&v| v > KIND_TOLERANCE * scale)
                .count();
            if rank == rank_deficit {
                Ok(0.0)
            } else {
                Err(Error::KindVerification {
                    kind: format!("generalized (rank {rank}, expected {rank_deficit})"),
                    residual: rank as f64,
                    tolerance: rank_deficit as f64,
                })
            }
        }
    }
}

/// `Z11* = A11* / M_N` on the periodic equispaced grid with `M_N` points.
pub fn fourier_left_inverse(n: usize, m_n: usize) -> Result<PartialInverse> {
    fourier_left_inverse_on(n, &grid_equispaced(m_n)?)
}

/// As [`fourier_left_inverse`], for an existing grid; only equispaced grids
/// are accepted.
pub fn fourier_left_inverse_on(n: usize, grid: &Grid) -> Result<PartialInverse> {
    let GridKind::Equispaced { m } = grid.kind else {
        return Err(Error::Unsupported(
            "the FFT left inverse needs a periodic equispaced grid".into(),
        ));
    };
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "left inverse needs M_N >= N, got M_N = {m}, N = {n}"
        )));
    }
    let a11 = FourierOperator::new(n, m)?;
    let z = ScaledAdjoint::new(FourierOperator::new(n, m)?, 1.0 / m as f64);
    let kind = if m == n { InverseKind::TwoSided } else { InverseKind::Left };
    PartialInverse::new(kind, Arc::new(z), &a11)
}

/// Fast Chebyshev left inverse for node, extrema or node-by-extrema tensor
/// grids. `sqrt_n` is the number of polynomials per dimension. Any other
/// grid gets a dense QR left inverse (flagged); `range` maps its points onto
/// `[-1, 1]`.
pub fn chebyshev_left_inverse(
    sqrt_n: usize,
    grid: &Grid,
    range: (f64, f64),
) -> Result<PartialInverse> {
    let fast = match grid.kind {
        GridKind::ChebyshevNodes { m } if m >= sqrt_n => {
            Some((ChebAxis::nodes(sqrt_n, m)?, None))
        }
        GridKind::ChebyshevExtremae { m } if m >= sqrt_n => {
            Some((ChebAxis::extremae(sqrt_n, m)?, None))
        }
        GridKind::ChebyshevTensor { nodes, extremae, .. } if nodes >= sqrt_n && extremae >= sqrt_n => {
            Some((
                ChebAxis::nodes(sqrt_n, nodes)?,
                Some(ChebAxis::extremae(sqrt_n, extremae)?),
            ))
        }
        _ => None,
    };
    if let Some((x, y)) = fast {
        let a11 = ChebyshevOperator::synthesis(x.clone(), y.clone());
        let z = ChebyshevOperator::left_inverse(x, y);
        return PartialInverse::new(InverseKind::Left, Arc::new(z), &a11);
    }
    let a11 = match &grid.structured {
        Points::Line(t) => CMatrix::from_fn(t.len(), sqrt_n, |m, i| {
            let x = super::families::to_reference(t[m], range);
            C64::new(chebyshev_values(sqrt_n, x)[i], 0.0)
        }),
        Points::Plane(p) => chebyshev_pairs_eval(&lexicographic_pairs(sqrt_n), p, range),
    };
    dense_left_inverse(&a11)
}

/// QR-based left inverse of a dense, full column rank `A11`.
pub fn dense_left_inverse(a11: &CMatrix) -> Result<PartialInverse> {
    if a11.nrows() < a11.ncols() {
        return Err(Error::InvalidArgument(
            "a left inverse needs at least as many rows as columns".into(),
        ));
    }
    let z = qr_left_inverse(a11)?;
    let kind = if a11.is_square() { InverseKind::TwoSided } else { InverseKind::Left };
    Ok(PartialInverse::from_dense(kind, z, a11)?.flag_dense())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::families::{chebyshev_tensor_eval, fourier_eval};
    use crate::bases::grid::{
        equispaced_points, grid_chebyshev_nodes, grid_chebyshev_tensor, grid_chebyshev_nodes as nodes,
    };
    use crate::linalg::{complexify, gaussian_matrix, CVector};

    #[test]
    fn fourier_left_inverse_identity() {
        let z = fourier_left_inverse(17, 34).unwrap();
        assert_eq!(z.kind(), InverseKind::Left);
        let a = fourier_eval(17, &equispaced_points(34)).unwrap();
        let za = densify(z.op()) * &a;
        assert!((za - CMatrix::identity(17, 17)).camax() < 1e-12);
        let col = a.column(3).into_owned();
        let e = z.op().apply(&col);
        for (i, v) in e.iter().enumerate() {
            let expect = if i == 3 { 1.0 } else { 0.0 };
            assert!((v - C64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_square_is_two_sided() {
        let z = fourier_left_inverse(17, 17).unwrap();
        assert_eq!(z.kind(), InverseKind::TwoSided);
        let a = fourier_eval(17, &equispaced_points(17)).unwrap();
        assert!((&a * densify(z.op()) - CMatrix::identity(17, 17)).camax() < 1e-12);
    }

    #[test]
    fn fourier_rejects_other_grids() {
        let g = grid_chebyshev_nodes(40).unwrap();
        assert!(matches!(fourier_left_inverse_on(17, &g), Err(Error::Unsupported(_))));
        assert!(fourier_left_inverse(17, 10).is_err());
    }

    #[test]
    fn fourier_large_uses_probes() {
        let z = fourier_left_inverse(2049, 4098).unwrap();
        assert!(z.verification_residual() < 1e-12);
    }

    #[test]
    fn chebyshev_1d() {
        let g = nodes(8).unwrap();
        let z = chebyshev_left_inverse(4, &g, (-1.0, 1.0)).unwrap();
        assert!(!z.dense_fallback());
        assert!(z.verification_residual() < 1e-12);
        let ones = complexify(&[1.0; 8]);
        let c = z.op().apply(&ones);
        assert!((c[0] - C64::new(1.0, 0.0)).norm() < 1e-13);
        assert!(c.rows(1, 3).camax() < 1e-13);
    }

    #[test]
    fn chebyshev_2d_tensor() {
        let g = grid_chebyshev_tensor(10, 10, (0.0, 0.5)).unwrap();
        let z = chebyshev_left_inverse(5, &g, (0.0, 0.5)).unwrap();
        let Points::Plane(p) = &g.structured else { panic!() };
        let a = chebyshev_tensor_eval(5, p, (0.0, 0.5));
        let za = densify(z.op()) * &a;
        assert!((za - CMatrix::identity(25, 25)).camax() < 1e-10);
        let c = z.op().apply(&CVector::from_element(100, C64::new(1.0, 0.0)));
        assert!((c[0] - C64::new(1.0, 0.0)).norm() < 1e-12 && c.rows(1, 24).camax() < 1e-12);
    }

    #[test]
    fn chebyshev_scattered_falls_back() {
        let pts: Vec<f64> = (0..30).map(|i| -0.95 + 1.9 * i as f64 / 29.0).collect();
        let g = Grid::scattered(Points::Line(pts));
        let z = chebyshev_left_inverse(6, &g, (-1.0, 1.0)).unwrap();
        assert!(z.dense_fallback());
        assert_eq!(z.kind(), InverseKind::Left);
    }

    #[test]
    fn kind_verification_rejects_wrong_claims() {
        let mut rng = seeded_rng(4);
        let a = gaussian_matrix(12, 8, &mut rng);
        let z = qr_left_inverse(&a).unwrap();
        assert!(PartialInverse::from_dense(InverseKind::Left, z.clone(), &a).is_ok());
        assert!(PartialInverse::from_dense(InverseKind::Right, z.clone(), &a).is_err());
        assert!(PartialInverse::from_dense(InverseKind::TwoSided, z, &a).is_err());
        let bad = CMatrix::zeros(8, 12);
        assert!(PartialInverse::from_dense(InverseKind::Left, bad, &a).is_err());
    }

    #[test]
    fn generalized_rank() {
        let mut rng = seeded_rng(5);
        let a = gaussian_matrix(10, 10, &mut rng);
        let s = svd(&a).unwrap();
        // pseudo-inverse with the two smallest directions removed
        let mut z = CMatrix::zeros(10, 10);
        for i in 0..8 {
            z += s.v.column(i) * s.u.column(i).adjoint() * C64::new(1.0 / s.singular_values[i], 0.0);
        }
        let ok = PartialInverse::from_dense(InverseKind::Generalized { rank_deficit: 2 }, z.clone(), &a);
        assert!(ok.is_ok());
        assert!(PartialInverse::from_dense(InverseKind::Generalized { rank_deficit: 1 }, z, &a).is_err());
    }
}
