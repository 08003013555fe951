//! AZ for enriched block systems with `Z* = [[Z11*, 0], [0, 0]]`.
//!
//! Writing `C = Z11* A12` and `D = A11 C`,
//!
//! ```text
//! A - A Z* A = [ A11 - A11 Z11* A11   A12 - D         ]
//!              [ A21 - A21 Z11* A11   A22 - A21 C     ]
//! ```
//!
//! and the kind of `Z11*` decides which blocks vanish.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{finish, seconds, solve_step1, zero, SolveReport, WallTimes, DENSE_STEP1_LIMIT};
use crate::bases::{BlockDims, BlockSystem, InverseKind, PartialInverse};
use crate::linalg::{
    densify, operator_norm, svd, CMatrix, CVector, FnOperator, LinearOperator, TsvdConfig,
};
use crate::{Error, Result};

/// Power-iteration settings for operator norms. Clustered top singular
/// values converge slowly, so the stagnation test is much tighter than the
/// accuracy needed.
const NORM_ITERS: usize = 2000;
const NORM_TOL: f64 = 1e-10;

/// Which blocks of `A - A Z* A` survive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstAzForm {
    /// Only `A22 - A21 Z11* A12`, size `M_K x K`.
    CornerBlock,
    /// The last block column, size `(M_N + M_K) x K`.
    ColumnBlock,
    /// The last block row, size `M_K x (N + K)`.
    RowBlock,
    /// Everything; rank at most `L + M_K + K`.
    Full,
}

impl FirstAzForm {
    pub fn for_kind(kind: InverseKind) -> Self {
        match kind {
            InverseKind::TwoSided => FirstAzForm::CornerBlock,
            InverseKind::Left => FirstAzForm::ColumnBlock,
            InverseKind::Right => FirstAzForm::RowBlock,
            InverseKind::Generalized { .. } => FirstAzForm::Full,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FirstAzForm::CornerBlock => "corner_block",
            FirstAzForm::ColumnBlock => "column_block",
            FirstAzForm::RowBlock => "row_block",
            FirstAzForm::Full => "full",
        }
    }
}

pub enum FirstAzBlock {
    Dense(CMatrix),
    Operator(Arc<dyn LinearOperator>),
}

/// The nonzero part of `A - A Z* A`.
pub struct FirstAzMatrix {
    pub form: FirstAzForm,
    pub dims: BlockDims,
    pub block: FirstAzBlock,
}

impl FirstAzMatrix {
    /// Shape of the stored block.
    pub fn block_shape(&self) -> (usize, usize) {
        match &self.block {
            FirstAzBlock::Dense(m) => m.shape(),
            FirstAzBlock::Operator(op) => (op.nrows(), op.ncols()),
        }
    }

    /// The full `(M_N + M_K) x (N + K)` matrix with explicit zeros.
    pub fn densify(&self) -> CMatrix {
        let d = self.dims;
        let mut out = CMatrix::zeros(d.rows(), d.cols());
        match (&self.block, self.form) {
            (FirstAzBlock::Dense(b), FirstAzForm::CornerBlock) => {
                out.view_mut((d.m_n, d.n), (d.m_k, d.k)).copy_from(b)
            }
            (FirstAzBlock::Dense(b), FirstAzForm::ColumnBlock) => {
                out.view_mut((0, d.n), (d.rows(), d.k)).copy_from(b)
            }
            (FirstAzBlock::Dense(b), FirstAzForm::RowBlock) => {
                out.view_mut((d.m_n, 0), (d.m_k, d.cols())).copy_from(b)
            }
            (FirstAzBlock::Dense(b), FirstAzForm::Full) => out.copy_from(b),
            (FirstAzBlock::Operator(op), _) => out.copy_from(&densify(op.as_ref())),
        }
        out
    }
}

/// The `Z` operator with the shape of `A` whose adjoint is `[[Z11*, 0], [0, 0]]`.
pub fn embedded_z(sys: &BlockSystem, z11: &PartialInverse) -> FnOperator<'static> {
    let d = sys.dims();
    let zf = z11.shared_op();
    let za = z11.shared_op();
    FnOperator::new(
        d.rows(),
        d.cols(),
        move |x: &CVector| {
            let mut out = CVector::zeros(d.rows());
            out.rows_mut(0, d.m_n)
                .copy_from(&zf.apply_adjoint(&x.rows(0, d.n).into_owned()));
            out
        },
        move |y: &CVector| {
            let mut out = CVector::zeros(d.cols());
            out.rows_mut(0, d.n).copy_from(&za.apply(&y.rows(0, d.m_n).into_owned()));
            out
        },
    )
    .with_cost(z11.op().cost_hint())
}

fn check(sys: &BlockSystem, z11: &PartialInverse) -> Result<BlockDims> {
    let d = sys.dims();
    let z = z11.op();
    if z.nrows() != d.n || z.ncols() != d.m_n {
        return Err(Error::DimensionMismatch(format!(
            "Z11* is {}x{}, expected {}x{}",
            z.nrows(),
            z.ncols(),
            d.n,
            d.m_n
        )));
    }
    Ok(d)
}

/// `(C, D) = (Z11* A12, A11 Z11* A12)`: K applications of each operator.
fn c_and_d(sys: &BlockSystem, z11: &PartialInverse) -> (CMatrix, CMatrix) {
    let c = z11.op().apply_columns(&sys.a12);
    let d = sys.a11.apply_columns(&c);
    (c, d)
}

/// `A21 - A21 Z11* A11`, built from `M_K` adjoint applications.
fn row_defect(sys: &BlockSystem, z11: &PartialInverse) -> CMatrix {
    let t = sys.a11.apply_adjoint_columns(&z11.op().apply_adjoint_columns(&sys.a21.adjoint()));
    &sys.a21 - t.adjoint()
}

/// The brute-force `A - A Z* A` as an operator, for the generalized case.
fn full_operator(sys: &BlockSystem, z11: &PartialInverse) -> FnOperator<'static> {
    let a = Arc::new(sys.clone());
    let z = Arc::new(embedded_z(sys, z11));
    let (a2, z2) = (Arc::clone(&a), Arc::clone(&z));
    let d = sys.dims();
    FnOperator::new(
        d.rows(),
        d.cols(),
        move |x: &CVector| {
            let ax = a.apply(x);
            let back = a.apply(&z.apply_adjoint(&ax));
            ax - back
        },
        move |y: &CVector| {
            let ay = a2.apply_adjoint(y);
            let back = a2.apply_adjoint(&z2.apply(&ay));
            ay - back
        },
    )
    .with_cost(2.0 * sys.cost_hint())
}

/// Only the nonzero blocks of `A - A Z* A`.
pub fn first_az_matrix(sys: &BlockSystem, z11: &PartialInverse) -> Result<FirstAzMatrix> {
    let dims = check(sys, z11)?;
    let form = FirstAzForm::for_kind(z11.kind());
    let block = match form {
        FirstAzForm::CornerBlock => {
            let (c, _) = c_and_d(sys, z11);
            FirstAzBlock::Dense(&sys.a22 - &sys.a21 * c)
        }
        FirstAzForm::ColumnBlock => {
            let (c, d) = c_and_d(sys, z11);
            let mut b = CMatrix::zeros(dims.rows(), dims.k);
            b.view_mut((0, 0), (dims.m_n, dims.k)).copy_from(&(&sys.a12 - d));
            b.view_mut((dims.m_n, 0), (dims.m_k, dims.k))
                .copy_from(&(&sys.a22 - &sys.a21 * c));
            FirstAzBlock::Dense(b)
        }
        FirstAzForm::RowBlock => {
            let (c, _) = c_and_d(sys, z11);
            let mut b = CMatrix::zeros(dims.m_k, dims.cols());
            b.view_mut((0, 0), (dims.m_k, dims.n)).copy_from(&row_defect(sys, z11));
            b.view_mut((0, dims.n), (dims.m_k, dims.k))
                .copy_from(&(&sys.a22 - &sys.a21 * c));
            FirstAzBlock::Dense(b)
        }
        FirstAzForm::Full => {
            let op = full_operator(sys, z11);
            if dims.rows().max(dims.cols()) <= DENSE_STEP1_LIMIT {
                FirstAzBlock::Dense(densify(&op))
            } else {
                FirstAzBlock::Operator(Arc::new(op))
            }
        }
    };
    Ok(FirstAzMatrix { form, dims, block })
}

/// AZ on an enriched block system, exploiting the block structure of
/// `A - A Z* A` for the kind of `z11`.
pub fn enriched_az_solve(
    sys: &BlockSystem,
    z11: &PartialInverse,
    b: &CVector,
    cfg: &TsvdConfig,
) -> Result<SolveReport> {
    let dims = check(sys, z11)?;
    cfg.validate()?;
    if b.len() != dims.rows() {
        return Err(Error::DimensionMismatch(format!(
            "b has length {}, system has {} rows",
            b.len(),
            dims.rows()
        )));
    }
    let start = Instant::now();
    let first = first_az_matrix(sys, z11)?;
    let (b_n, b_k) = sys.split_rows(b);
    let zb = z11.op().apply(&b_n);
    let rhs_k = &b_k - &sys.a21 * &zb;
    let rhs = match first.form {
        FirstAzForm::CornerBlock | FirstAzForm::RowBlock => rhs_k,
        FirstAzForm::ColumnBlock | FirstAzForm::Full => {
            let mut r = CVector::zeros(dims.rows());
            r.rows_mut(0, dims.m_n).copy_from(&(&b_n - sys.a11.apply(&zb)));
            r.rows_mut(dims.m_n, dims.m_k).copy_from(&rhs_k);
            r
        }
    };
    let assembled = seconds(start);

    let t = Instant::now();
    let s1 = match &first.block {
        FirstAzBlock::Dense(m) => solve_step1(m, Some(m), &rhs, cfg, 0.0)?,
        FirstAzBlock::Operator(op) => solve_step1(op.as_ref(), None, &rhs, cfg, 0.0)?,
    };
    let solved = seconds(t);

    let t = Instant::now();
    let mut x = match first.form {
        FirstAzForm::CornerBlock | FirstAzForm::ColumnBlock => {
            let mut x = CVector::from_element(dims.cols(), zero());
            x.rows_mut(dims.n, dims.k).copy_from(&s1.x);
            x
        }
        FirstAzForm::RowBlock | FirstAzForm::Full => s1.x.clone(),
    };
    let r = b - sys.apply(&x);
    let x2 = z11.op().apply(&r.rows(0, dims.m_n).into_owned());
    let mut head = x.rows_mut(0, dims.n);
    head += x2;
    let step2 = seconds(t);

    let shape = first.block_shape();
    finish(
        x,
        |v| sys.apply(v),
        b,
        s1,
        shape,
        cfg.epsilon,
        first.form.name(),
        WallTimes {
            step1_assembly: assembled,
            step1_solve: solved,
            step2,
            total: seconds(start),
        },
    )
}

/// Quantities in the bound `||I - A Z*|| <= 1 + ||Z11*|| (||A11|| + ||A21||)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorBoundFactors {
    /// `1 + ||Z11*|| (||A11|| + ||A21||)`.
    pub bound_i_minus_az: f64,
    /// `||Z*|| = ||Z11*||`.
    pub norm_z: f64,
    pub norm_a11: f64,
    pub norm_a21: f64,
    /// `||I - A Z*||` computed directly, for comparison with the bound.
    pub actual_i_minus_az: f64,
}

pub fn error_bound_factors(sys: &BlockSystem, z11: &PartialInverse) -> Result<ErrorBoundFactors> {
    let dims = check(sys, z11)?;
    let norm_z = operator_norm(z11.op(), NORM_ITERS, NORM_TOL, 17).value;
    let norm_a11 = operator_norm(sys.a11.as_ref(), NORM_ITERS, NORM_TOL, 19).value;
    let norm_a21 = if sys.a21.is_empty() { 0.0 } else { svd(&sys.a21)?.sigma_max() };
    let z = embedded_z(sys, z11);
    let m = dims.rows();
    let sys_ref = sys;
    let i_minus = FnOperator::new(
        m,
        m,
        |y: &CVector| y - sys_ref.apply(&z.apply_adjoint(y)),
        |y: &CVector| y - z.apply(&sys_ref.apply_adjoint(y)),
    );
    let actual = if m <= DENSE_STEP1_LIMIT {
        svd(&densify(&i_minus))?.sigma_max()
    } else {
        operator_norm(&i_minus, NORM_ITERS, NORM_TOL, 23).value
    };
    Ok(ErrorBoundFactors {
        bound_i_minus_az: 1.0 + norm_z * (norm_a11 + norm_a21),
        norm_z,
        norm_a11,
        norm_a21,
        actual_i_minus_az: actual,
    })
}
