//! Galerkin matrices for `a(u, v) = int grad u . grad v` in the homogenized
//! Jacobi tensor basis, enriched by corner singular terms.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::problem::EllipticProblem;
use super::quadrature::{gauss_legendre, graded_panels, Grading, Panel};
use super::singular::SingularTerm;
use crate::bases::families::{homogenized_jacobi, homogenized_jacobi_pairs};
use crate::bases::{BlockSystem, InverseKind, PartialInverse};
use crate::linalg::{CMatrix, CVector, CholeskySolver, LinearOperator, C64};
use crate::{Error, Result};

/// Largest relative change of an `A22` entry under doubled quadrature
/// order that still counts as converged.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

type RMatrix = DMatrix<f64>;

/// 1D tables of `phi_i`, `phi_i'`, `phi_i''` at the given points (rows).
pub(crate) struct Table {
    pub v: RMatrix,
    pub d1: RMatrix,
    pub d2: RMatrix,
}

pub(crate) fn table(count: usize, pts: &[f64]) -> Table {
    let mut t = Table {
        v: RMatrix::zeros(pts.len(), count),
        d1: RMatrix::zeros(pts.len(), count),
        d2: RMatrix::zeros(pts.len(), count),
    };
    for (a, &z) in pts.iter().enumerate() {
        let h = homogenized_jacobi(count, z);
        for i in 0..count {
            t.v[(a, i)] = h.value[i];
            t.d1[(a, i)] = h.d1[i];
            t.d2[(a, i)] = h.d2[i];
        }
    }
    t
}

/// Flatten a `sqrt_n x sqrt_n` table indexed by degrees into basis order.
pub(crate) fn flatten(pairs: &[(usize, usize)], t: &RMatrix) -> Vec<f64> {
    pairs.iter().map(|&(i, j)| t[(i - 1, j - 1)]).collect()
}

/// Enriched Galerkin system with its `A11` factorization.
#[derive(Clone)]
pub struct GalerkinSystem {
    pub sqrt_n: usize,
    /// Basis order: `(i, j)` degrees, total-degree order.
    pub pairs: Vec<(usize, usize)>,
    pub terms: Vec<SingularTerm>,
    pub a11: CMatrix,
    /// `a(psi_k, phi_n)` at `(n, k)`.
    pub a12: CMatrix,
    pub a22: CMatrix,
    pub f_n: CVector,
    pub f_k: CVector,
    pub a11_inverse: Arc<CholeskySolver>,
    pub quad_order: usize,
    /// Largest relative change of `A22` when the graded rule order doubles.
    pub a22_relative_change: f64,
    pub quadrature_converged: bool,
    pub(crate) panels: Arc<Vec<Panel>>,
}

impl std::fmt::Debug for GalerkinSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GalerkinSystem")
            .field("sqrt_n", &self.sqrt_n)
            .field("k", &self.terms.len())
            .field("quad_order", &self.quad_order)
            .field("quadrature_converged", &self.quadrature_converged)
            .finish()
    }
}

impl GalerkinSystem {
    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn k(&self) -> usize {
        self.terms.len()
    }

    /// The square system `[[A11, A12], [A12^T, A22]]`.
    pub fn block_system(&self) -> Result<BlockSystem> {
        BlockSystem::from_dense(
            self.a11.clone(),
            self.a12.clone(),
            self.a12.transpose(),
            self.a22.clone(),
        )
    }

    pub fn rhs(&self) -> CVector {
        let mut b = CVector::zeros(self.n() + self.k());
        b.rows_mut(0, self.n()).copy_from(&self.f_n);
        b.rows_mut(self.n(), self.k()).copy_from(&self.f_k);
        b
    }

    /// `A11^{-1}` through the Cholesky factor, as a verified two-sided inverse.
    pub fn partial_inverse(&self) -> Result<PartialInverse> {
        let op: Arc<dyn LinearOperator> = self.a11_inverse.clone();
        PartialInverse::new(InverseKind::TwoSided, op, &self.a11)
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }
}

fn complex(m: &RMatrix) -> CMatrix {
    m.map(|v| C64::new(v, 0.0))
}

/// Stiffness and mass matrices of the 1D basis.
fn one_d(count: usize, order: usize) -> Result<(RMatrix, RMatrix)> {
    let (x, w) = gauss_legendre(order)?;
    let t = table(count, &x);
    let wd = RMatrix::from_diagonal(&nalgebra::DVector::from_vec(w));
    let s = t.d1.transpose() * &wd * &t.d1;
    let m = t.v.transpose() * &wd * &t.v;
    Ok((s, m))
}

/// Graded-quadrature integrals involving the singular terms and `f`.
struct Singular {
    f_n: RMatrix,
    a12: Vec<RMatrix>,
    a22: RMatrix,
    f_k: Vec<f64>,
}

fn singular_integrals(
    prob: &EllipticProblem,
    sqrt_n: usize,
    panels: &[Panel],
    with_rhs: bool,
) -> Singular {
    let k = prob.k();
    let mut out = Singular {
        f_n: RMatrix::zeros(sqrt_n, sqrt_n),
        a12: vec![RMatrix::zeros(sqrt_n, sqrt_n); k],
        a22: RMatrix::zeros(k, k),
        f_k: vec![0.0; k],
    };
    for p in panels {
        let (qx, qy) = (p.x.len(), p.y.len());
        let tx = table(sqrt_n, &p.x);
        let ty = table(sqrt_n, &p.y);
        let mut f = RMatrix::zeros(qx, qy);
        let mut gx = vec![RMatrix::zeros(qx, qy); k];
        let mut gy = vec![RMatrix::zeros(qx, qy); k];
        let mut val = vec![RMatrix::zeros(qx, qy); k];
        for a in 0..qx {
            for b in 0..qy {
                let w = p.wx[a] * p.wy[b];
                if with_rhs {
                    f[(a, b)] = w * (prob.rhs)(p.x[a], p.y[b]);
                }
                for (t, term) in prob.singular_terms.iter().enumerate() {
                    let j = term.jet(p.x[a], p.y[b]);
                    gx[t][(a, b)] = j.dx;
                    gy[t][(a, b)] = j.dy;
                    val[t][(a, b)] = j.value;
                }
            }
        }
        let weights = RMatrix::from_fn(qx, qy, |a, b| p.wx[a] * p.wy[b]);
        if with_rhs {
            out.f_n += tx.v.transpose() * &f * &ty.v;
        }
        for t in 0..k {
            let wgx = gx[t].component_mul(&weights);
            let wgy = gy[t].component_mul(&weights);
            out.a12[t] += tx.d1.transpose() * &wgx * &ty.v + tx.v.transpose() * &wgy * &ty.d1;
            for s in 0..k {
                out.a22[(t, s)] += wgx.dot(&gx[s]) + wgy.dot(&gy[s]);
            }
            if with_rhs {
                out.f_k[t] += f.dot(&val[t]);
            }
        }
    }
    out
}

/// Assemble the enriched Galerkin system.
///
/// `A11` uses a tensor Gauss-Legendre rule of `quad_order` points per
/// dimension; every integral involving `f` or a singular term uses
/// composite panels graded toward the corner with the same order per panel.
pub fn assemble_galerkin(prob: &EllipticProblem, sqrt_n: usize, quad_order: usize) -> Result<GalerkinSystem> {
    if sqrt_n == 0 {
        return Err(Error::InvalidArgument("sqrt_n must be positive".into()));
    }
    if quad_order < sqrt_n + 2 {
        return Err(Error::InvalidArgument(format!(
            "quad_order {quad_order} cannot integrate the basis products exactly; need at least sqrt_n + 2"
        )));
    }
    let pairs = homogenized_jacobi_pairs(sqrt_n);
    let n = pairs.len();
    let (s, m) = one_d(sqrt_n, quad_order)?;
    let a11r = RMatrix::from_fn(n, n, |p, q| {
        let ((i, j), (u, v)) = (pairs[p], pairs[q]);
        s[(i - 1, u - 1)] * m[(j - 1, v - 1)] + m[(i - 1, u - 1)] * s[(j - 1, v - 1)]
    });
    let asym = (&a11r - a11r.transpose()).amax();
    if asym > 1e-10 {
        return Err(Error::Numerical(format!("A11 asymmetry {asym:e} exceeds 1e-10")));
    }
    let a11 = complex(&a11r);
    let chol = CholeskySolver::new(&a11)?;

    let panels = graded_panels(quad_order, Grading::default())?;
    let sing = singular_integrals(prob, sqrt_n, &panels, true);
    let k = prob.k();
    let mut a12 = CMatrix::zeros(n, k);
    for t in 0..k {
        let col = flatten(&pairs, &sing.a12[t]);
        for (p, v) in col.into_iter().enumerate() {
            a12[(p, t)] = C64::new(v, 0.0);
        }
    }
    let f_n = CVector::from_iterator(n, flatten(&pairs, &sing.f_n).into_iter().map(|v| C64::new(v, 0.0)));
    let f_k = CVector::from_iterator(k, sing.f_k.iter().map(|&v| C64::new(v, 0.0)));

    let (change, converged) = if k == 0 {
        (0.0, true)
    } else {
        let finer = graded_panels(2 * quad_order, Grading::default())?;
        let check = singular_integrals(prob, sqrt_n, &finer, false);
        let mut worst: f64 = 0.0;
        for (a, b) in sing.a22.iter().zip(check.a22.iter()) {
            worst = worst.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
        (worst, worst <= QUADRATURE_TOLERANCE)
    };

    Ok(GalerkinSystem {
        sqrt_n,
        pairs,
        terms: prob.singular_terms.clone(),
        a11,
        a12,
        a22: complex(&sing.a22),
        f_n,
        f_k,
        a11_inverse: Arc::new(chol),
        quad_order,
        a22_relative_change: change,
        quadrature_converged: converged,
        panels: Arc::new(panels),
    })
}
