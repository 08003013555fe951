//! Function families, sampling grids and the enriched block system
//!
//! ```text
//! [ A11  A12 ] [x_N]   [b_N]   structured samples
//! [ A21  A22 ] [x_K] = [b_K]   extra samples
//! ```
//!
//! with conventional basis functions in the first block column and
//! enrichment functions in the second.

pub mod families;
pub mod fast;
pub mod grid;
pub mod partial;
pub mod weight;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use grid::{
    grid_chebyshev_extremae, grid_chebyshev_nodes, grid_chebyshev_tensor, grid_clustered_boundary,
    grid_equispaced, grid_near_diagonal, FunctionalKind, Grid, GridKind, Points,
};
pub use partial::{
    chebyshev_left_inverse, dense_left_inverse, fourier_left_inverse, fourier_left_inverse_on,
    InverseKind, PartialInverse,
};
pub use weight::{greens_weight, scaled_greens_weight, Weight};

use crate::linalg::{densify, svd, CMatrix, CVector, LinearOperator, C64};
use crate::{Error, Result};
use families::{expect_line, expect_plane};
use fast::{ChebAxis, ChebyshevOperator, FourierOperator};

/// The conventional part of an enriched basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ConventionalFamily {
    /// `exp(2 pi i n t)` on `[0, 1]`, `n` odd.
    Fourier1D { n: usize },
    /// `T_i(s_x) T_j(s_y)` on `range^2`, lexicographic order.
    ChebyshevTensor2D { sqrt_n: usize, range: (f64, f64) },
    /// `phi_i(x) phi_j(y)` on `[-1, 1]^2`, total-degree order.
    JacobiHomogenizedTensor2D { sqrt_n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Interval(f64, f64),
    Rectangle { x: (f64, f64), y: (f64, f64) },
}

impl ConventionalFamily {
    pub fn size(&self) -> usize {
        match *self {
            ConventionalFamily::Fourier1D { n } => n,
            ConventionalFamily::ChebyshevTensor2D { sqrt_n, .. }
            | ConventionalFamily::JacobiHomogenizedTensor2D { sqrt_n } => sqrt_n * sqrt_n,
        }
    }

    pub fn domain(&self) -> Domain {
        match *self {
            ConventionalFamily::Fourier1D { .. } => Domain::Interval(0.0, 1.0),
            ConventionalFamily::ChebyshevTensor2D { range, .. } => Domain::Rectangle { x: range, y: range },
            ConventionalFamily::JacobiHomogenizedTensor2D { .. } => Domain::Rectangle {
                x: (-1.0, 1.0),
                y: (-1.0, 1.0),
            },
        }
    }

    pub fn eval(&self, points: &Points) -> Result<CMatrix> {
        match *self {
            ConventionalFamily::Fourier1D { n } => families::fourier_eval(n, expect_line(points)?),
            ConventionalFamily::ChebyshevTensor2D { sqrt_n, range } => Ok(
                families::chebyshev_tensor_eval(sqrt_n, expect_plane(points)?, range),
            ),
            ConventionalFamily::JacobiHomogenizedTensor2D { sqrt_n } => Ok(
                families::homogenized_jacobi_tensor_eval(sqrt_n, expect_plane(points)?),
            ),
        }
    }
}

/// A user-supplied enrichment function of one or two variables.
#[derive(Clone)]
pub struct EnrichmentFn {
    pub name: String,
    pub f: Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>,
}

impl std::fmt::Debug for EnrichmentFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EnrichmentFn({})", self.name)
    }
}

impl EnrichmentFn {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> C64 + Send + Sync + 'static) -> Self {
        EnrichmentFn { name: name.into(), f: Arc::new(f) }
    }
}

/// The enrichment functions `psi_k`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "enrichment", rename_all = "snake_case")]
pub enum Enrichment {
    #[default]
    None,
    /// Legendre polynomials of degree `1..=k` on `[0, 1]`.
    Legendre { k: usize },
    /// `w(s_x, s_y) T_i(s_x) T_j(s_y)` for `0 <= i, j < q`, total-degree
    /// order, on the parameter range of the conventional family.
    WeightedChebyshev { weight: Weight, q: usize },
    #[serde(skip)]
    Functions(Vec<EnrichmentFn>),
}

impl Enrichment {
    pub fn count(&self) -> usize {
        match self {
            Enrichment::None => 0,
            Enrichment::Legendre { k } => *k,
            Enrichment::WeightedChebyshev { q, .. } => q * q,
            Enrichment::Functions(f) => f.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnrichedBasis {
    pub conventional: ConventionalFamily,
    pub enrichment: Enrichment,
}

impl EnrichedBasis {
    pub fn new(conventional: ConventionalFamily, enrichment: Enrichment) -> Result<Self> {
        let basis = EnrichedBasis { conventional, enrichment };
        basis.validate()?;
        Ok(basis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.conventional.size() == 0 {
            return Err(Error::InvalidArgument("conventional basis is empty".into()));
        }
        if let ConventionalFamily::Fourier1D { n } = self.conventional {
            families::fourier_modes(n)?;
        }
        match (&self.conventional, &self.enrichment) {
            (ConventionalFamily::Fourier1D { .. }, Enrichment::WeightedChebyshev { .. }) => Err(
                Error::InvalidArgument("weighted Chebyshev enrichment needs a 2D family".into()),
            ),
            (ConventionalFamily::Fourier1D { .. }, Enrichment::Legendre { .. }) | (_, Enrichment::None) => Ok(()),
            (_, Enrichment::Legendre { .. }) => Err(Error::InvalidArgument(
                "Legendre enrichment is defined on the unit interval".into(),
            )),
            (ConventionalFamily::ChebyshevTensor2D { .. }, Enrichment::WeightedChebyshev { .. }) => Ok(()),
            (_, Enrichment::WeightedChebyshev { .. }) => Err(Error::InvalidArgument(
                "weighted Chebyshev enrichment needs the Chebyshev tensor family".into(),
            )),
            (_, Enrichment::Functions(_)) => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.conventional.size()
    }

    pub fn k(&self) -> usize {
        self.enrichment.count()
    }

    pub fn eval_conventional(&self, points: &Points) -> Result<CMatrix> {
        self.conventional.eval(points)
    }

    /// Enrichment functions at `points`; fails on the first singular or
    /// non-finite value with the offending point.
    pub fn eval_enrichment(&self, points: &Points) -> Result<CMatrix> {
        let out = match &self.enrichment {
            Enrichment::None => CMatrix::zeros(points.len(), 0),
            Enrichment::Legendre { k } => families::legendre_eval(*k, expect_line(points)?)?,
            Enrichment::WeightedChebyshev { weight, q } => {
                let ConventionalFamily::ChebyshevTensor2D { range, .. } = self.conventional else {
                    unreachable!("validated")
                };
                let pts = expect_plane(points)?;
                let mut a = families::chebyshev_pairs_eval(&families::total_degree_pairs(*q), pts, range);
                for (m, p) in pts.iter().enumerate() {
                    let w = weight.eval(p[0], p[1])?;
                    a.row_mut(m).scale_mut(w);
                }
                a
            }
            Enrichment::Functions(fs) => {
                let mut a = CMatrix::zeros(points.len(), fs.len());
                for m in 0..points.len() {
                    let p: Vec<f64> = match points {
                        Points::Line(t) => vec![t[m]],
                        Points::Plane(q) => q[m].to_vec(),
                    };
                    for (k, f) in fs.iter().enumerate() {
                        let v = (f.f)(&p);
                        if !v.is_finite() {
                            return Err(Error::SingularPoint {
                                point: p,
                                reason: format!("enrichment `{}` is not finite", f.name),
                            });
                        }
                        a[(m, k)] = v;
                    }
                }
                a
            }
        };
        Ok(out)
    }
}

/// The 2x2 block least-squares matrix.
#[derive(Clone)]
pub struct BlockSystem {
    pub a11: Arc<dyn LinearOperator>,
    pub a12: CMatrix,
    pub a21: CMatrix,
    pub a22: CMatrix,
}

/// `(M_N, M_K, N, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDims {
    pub m_n: usize,
    pub m_k: usize,
    pub n: usize,
    pub k: usize,
}

impl BlockDims {
    pub fn rows(&self) -> usize {
        self.m_n + self.m_k
    }

    pub fn cols(&self) -> usize {
        self.n + self.k
    }
}

impl std::fmt::Debug for BlockSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BlockSystem({:?})", self.dims())
    }
}

impl BlockSystem {
    pub fn new(a11: Arc<dyn LinearOperator>, a12: CMatrix, a21: CMatrix, a22: CMatrix) -> Result<Self> {
        let (m_n, n) = (a11.nrows(), a11.ncols());
        let k = a12.ncols();
        let m_k = a21.nrows();
        if a12.nrows() != m_n || a21.ncols() != n || a22.shape() != (m_k, k) {
            return Err(Error::DimensionMismatch(format!(
                "blocks A11 {m_n}x{n}, A12 {:?}, A21 {:?}, A22 {:?} are inconsistent",
                a12.shape(),
                a21.shape(),
                a22.shape()
            )));
        }
        Ok(BlockSystem { a11, a12, a21, a22 })
    }

    /// All four blocks dense.
    pub fn from_dense(a11: CMatrix, a12: CMatrix, a21: CMatrix, a22: CMatrix) -> Result<Self> {
        Self::new(Arc::new(a11), a12, a21, a22)
    }

    pub fn dims(&self) -> BlockDims {
        BlockDims {
            m_n: self.a11.nrows(),
            m_k: self.a21.nrows(),
            n: self.a11.ncols(),
            k: self.a12.ncols(),
        }
    }

    pub fn a11_dense(&self) -> CMatrix {
        densify(self.a11.as_ref())
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = self.dims();
        let mut a = CMatrix::zeros(d.rows(), d.cols());
        a.view_mut((0, 0), (d.m_n, d.n)).copy_from(&self.a11_dense());
        a.view_mut((0, d.n), (d.m_n, d.k)).copy_from(&self.a12);
        a.view_mut((d.m_n, 0), (d.m_k, d.n)).copy_from(&self.a21);
        a.view_mut((d.m_n, d.n), (d.m_k, d.k)).copy_from(&self.a22);
        a
    }

    /// `sigma_max / sigma_min` of the densified `A11`.
    pub fn a11_condition(&self) -> Result<f64> {
        let s = svd(&self.a11_dense())?;
        let min = s.singular_values.last().copied().unwrap_or(0.0);
        Ok(if min > 0.0 { s.sigma_max() / min } else { f64::INFINITY })
    }

    /// Split a coefficient vector into `(x_N, x_K)`.
    pub fn split_cols(&self, x: &CVector) -> (CVector, CVector) {
        let n = self.dims().n;
        (x.rows(0, n).into_owned(), x.rows(n, x.len() - n).into_owned())
    }

    /// Split a data vector into `(b_N, b_K)`.
    pub fn split_rows(&self, b: &CVector) -> (CVector, CVector) {
        let m_n = self.dims().m_n;
        (b.rows(0, m_n).into_owned(), b.rows(m_n, b.len() - m_n).into_owned())
    }
}

fn stack(top: CVector, bottom: CVector) -> CVector {
    let mut out = CVector::zeros(top.len() + bottom.len());
    out.rows_mut(0, top.len()).copy_from(&top);
    out.rows_mut(top.len(), bottom.len()).copy_from(&bottom);
    out
}

impl LinearOperator for BlockSystem {
    fn nrows(&self) -> usize {
        self.dims().rows()
    }

    fn ncols(&self) -> usize {
        self.dims().cols()
    }

    fn apply(&self, x: &CVector) -> CVector {
        let (xn, xk) = self.split_cols(x);
        let top = self.a11.apply(&xn) + &self.a12 * &xk;
        let bottom = &self.a21 * &xn + &self.a22 * &xk;
        stack(top, bottom)
    }

    fn apply_adjoint(&self, y: &CVector) -> CVector {
        let (yn, yk) = self.split_rows(y);
        let left = self.a11.apply_adjoint(&yn) + self.a21.ad_mul(&yk);
        let right = self.a12.ad_mul(&yn) + self.a22.ad_mul(&yk);
        stack(left, right)
    }

    fn cost_hint(&self) -> f64 {
        let d = self.dims();
        self.a11.cost_hint() + (d.m_n * d.k + d.m_k * (d.n + d.k)) as f64
    }
}

fn fast_a11(basis: &EnrichedBasis, grid: &Grid) -> Result<Option<Arc<dyn LinearOperator>>> {
    match (&basis.conventional, &grid.kind) {
        (ConventionalFamily::Fourier1D { n }, GridKind::Equispaced { m }) => {
            Ok(Some(Arc::new(FourierOperator::new(*n, *m)?)))
        }
        (
            ConventionalFamily::ChebyshevTensor2D { sqrt_n, range },
            GridKind::ChebyshevTensor { nodes, extremae, range: grid_range },
        ) if range == grid_range && nodes >= sqrt_n && extremae >= sqrt_n => Ok(Some(Arc::new(
            ChebyshevOperator::synthesis(
                ChebAxis::nodes(*sqrt_n, *nodes)?,
                Some(ChebAxis::extremae(*sqrt_n, *extremae)?),
            ),
        ))),
        _ => Ok(None),
    }
}

/// Sample the enriched basis on the grid. `A11` is FFT/DCT backed on
/// matching structured grids and dense otherwise.
pub fn assemble_block_system(basis: &EnrichedBasis, grid: &Grid) -> Result<BlockSystem> {
    basis.validate()?;
    if grid.functional != FunctionalKind::PointEvaluation {
        return Err(Error::Unsupported(
            "Galerkin functionals are assembled by the galerkin module".into(),
        ));
    }
    let a11 = match fast_a11(basis, grid)? {
        Some(op) => op,
        None => Arc::new(basis.eval_conventional(&grid.structured)?),
    };
    let a12 = basis.eval_enrichment(&grid.structured)?;
    let a21 = basis.eval_conventional(&grid.extra)?;
    let a22 = basis.eval_enrichment(&grid.extra)?;
    BlockSystem::new(a11, a12, a21, a22)
}
