//! The AZ algorithm.
//!
//! Given `A` and an incomplete generalized inverse `Z*`:
//!
//! 1. solve `(A - A Z* A) x1 = (I - A Z*) b` with truncated SVD,
//! 2. `x2 = Z* (b - A x1)`, `x = x1 + x2`.
//!
//! The residual of `x` equals the residual of step 1, and step 1 is cheap
//! whenever `A - A Z* A` has low rank.

mod enriched;
mod schur;

pub use enriched::{
    embedded_z, enriched_az_solve, error_bound_factors, first_az_matrix, ErrorBoundFactors,
    FirstAzBlock, FirstAzForm, FirstAzMatrix,
};
pub use schur::{schur_solve, SchurSolution};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::linalg::{
    densify, operator_norm, randomized_tsvd_solve, svd, CMatrix, CVector, FnOperator,
    LinearOperator, TsvdConfig, C64,
};
use crate::{Error, Result};

/// Reduced systems with both dimensions at most this size are densified
/// and solved by dense TSVD; larger ones go through the randomized solver.
pub const DENSE_STEP1_LIMIT: usize = 2000;

/// Relative tolerance of the residual identity.
pub const RESIDUAL_IDENTITY_TOLERANCE: f64 = 1e-12;

/// Input to [`az_solve`]. `z` has the shape of `a`; the algorithm uses its
/// adjoint `Z*`.
pub struct AzProblem<'a> {
    pub a: &'a dyn LinearOperator,
    pub z: &'a dyn LinearOperator,
    pub b: CVector,
    pub cfg: TsvdConfig,
}

/// Per-step wall-clock durations in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WallTimes {
    pub step1_assembly: f64,
    pub step1_solve: f64,
    pub step2: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    /// `x1 + x2`.
    #[serde(skip)]
    pub x: CVector,
    /// `||b - A x||_2`, recomputed from `x`.
    pub residual_norm: f64,
    /// `||b||_2`.
    #[serde(default)]
    pub rhs_norm: f64,
    /// `||r1 - B x1||_2` for the step-1 system `B x1 = r1` as solved.
    pub step1_residual: f64,
    pub coeff_norm: f64,
    pub step1_rank: usize,
    /// Shape of the reduced step-1 system.
    pub step1_shape: (usize, usize),
    pub epsilon: f64,
    /// Which block structure step 1 exploited.
    pub form: String,
    /// Step 1 went through the randomized range finder.
    pub randomized: bool,
    /// The randomized range finder gave up and densified.
    pub dense_fallback: bool,
    pub wall_times: WallTimes,
    /// `(re, im)` pairs of `x`, filled by [`SolveReport::with_coefficients`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
}

impl SolveReport {
    pub fn with_coefficients(mut self) -> Self {
        self.coefficients = Some(self.x.iter().map(|z| [z.re, z.im]).collect());
        self
    }

    /// `|residual - step-1 residual|`, which should be at rounding level.
    pub fn residual_identity_gap(&self) -> f64 {
        (self.residual_norm - self.step1_residual).abs()
    }

    /// The gap is within `RESIDUAL_IDENTITY_TOLERANCE * (1 + ||b||)`.
    pub fn residual_identity_holds(&self) -> bool {
        self.residual_identity_gap() <= RESIDUAL_IDENTITY_TOLERANCE * (1.0 + self.rhs_norm)
    }
}

pub(crate) struct Step1 {
    pub x: CVector,
    pub rank: usize,
    pub residual: f64,
    pub randomized: bool,
    pub dense_fallback: bool,
}

/// TSVD solve of a reduced system, dense when small, randomized otherwise.
///
/// Singular values at or below `max(epsilon * sigma_max, floor)` are
/// dropped. `floor` is an absolute level, the rounding noise left by
/// forming the reduced matrix; pass zero for a purely relative cutoff.
pub(crate) fn solve_step1(
    op: &dyn LinearOperator,
    dense: Option<&CMatrix>,
    rhs: &CVector,
    cfg: &TsvdConfig,
    floor: f64,
) -> Result<Step1> {
    let (rows, cols) = (op.nrows(), op.ncols());
    let empty = || Step1 {
        x: CVector::zeros(cols),
        rank: 0,
        residual: rhs.norm(),
        randomized: false,
        dense_fallback: false,
    };
    if rows == 0 || cols == 0 {
        return Ok(empty());
    }
    if rows.max(cols) <= DENSE_STEP1_LIMIT || dense.is_some() {
        let owned;
        let m = match dense {
            Some(m) => m,
            None => {
                owned = densify(op);
                &owned
            }
        };
        cfg.validate()?;
        let dec = svd(m)?;
        let cut = (cfg.epsilon * dec.sigma_max()).max(floor);
        let rank = dec.singular_values.iter().take_while(|&&s| s > cut && s > 0.0).count();
        let x = dec.truncated_solve(rhs, rank);
        let residual = (rhs - m * &x).norm();
        Ok(Step1 {
            x,
            rank,
            residual,
            randomized: false,
            dense_fallback: false,
        })
    } else {
        let mut cfg = *cfg;
        if floor > 0.0 {
            let sigma = operator_norm(op, 30, 1e-3, cfg.seed).value;
            if sigma <= floor {
                return Ok(empty());
            }
            cfg.epsilon = cfg.epsilon.max(floor / sigma);
        }
        let sol = randomized_tsvd_solve(op, rhs, &cfg)?;
        let residual = (rhs - op.apply(&sol.x)).norm();
        Ok(Step1 {
            x: sol.x,
            rank: sol.rank,
            residual,
            randomized: true,
            dense_fallback: sol.dense_fallback,
        })
    }
}

/// Rounding level of `A - A Z* A`: about `u (m + n) ||A|| (1 + ||A|| ||Z||)`.
/// Below it the reduced matrix carries no information, which matters when
/// `Z` annihilates `A` exactly and the reduced matrix is pure noise.
fn rounding_floor(a: &dyn LinearOperator, z: &dyn LinearOperator, seed: u64) -> f64 {
    let na = operator_norm(a, 30, 1e-3, seed).value;
    let nz = operator_norm(z, 30, 1e-3, seed).value;
    // power iteration underestimates; the factor 2 covers it
    2.0 * f64::EPSILON * (a.nrows() + a.ncols()) as f64 * na * (1.0 + na * nz)
}

pub(crate) fn seconds(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn check_shapes(p: &AzProblem) -> Result<()> {
    if p.a.nrows() != p.z.nrows() || p.a.ncols() != p.z.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but Z is {}x{}",
            p.a.nrows(),
            p.a.ncols(),
            p.z.nrows(),
            p.z.ncols()
        )));
    }
    if p.b.len() != p.a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "b has length {}, A has {} rows",
            p.b.len(),
            p.a.nrows()
        )));
    }
    p.cfg.validate()
}

/// Generic AZ solve with matrix-free `A` and `Z`.
pub fn az_solve(p: &AzProblem) -> Result<SolveReport> {
    check_shapes(p)?;
    let start = Instant::now();
    let (a, z) = (p.a, p.z);
    let (m, n) = (a.nrows(), a.ncols());
    let step1 = FnOperator::new(
        m,
        n,
        move |x: &CVector| {
            let ax = a.apply(x);
            let back = a.apply(&z.apply_adjoint(&ax));
            ax - back
        },
        move |y: &CVector| {
            let ay = a.apply_adjoint(y);
            let back = a.apply_adjoint(&z.apply(&ay));
            ay - back
        },
    )
    .with_cost(2.0 * a.cost_hint() + z.cost_hint());
    let rhs = &p.b - a.apply(&z.apply_adjoint(&p.b));
    let dense = (m.max(n) <= DENSE_STEP1_LIMIT).then(|| densify(&step1));
    let floor = rounding_floor(a, z, p.cfg.seed);
    let assembled = seconds(start);

    let t = Instant::now();
    let s1 = solve_step1(&step1, dense.as_ref(), &rhs, &p.cfg, floor)?;
    let solved = seconds(t);

    let t = Instant::now();
    let x2 = z.apply_adjoint(&(&p.b - a.apply(&s1.x)));
    let x = &s1.x + x2;
    let step2 = seconds(t);

    finish(
        x,
        |x| a.apply(x),
        &p.b,
        s1,
        (m, n),
        p.cfg.epsilon,
        "generic",
        WallTimes {
            step1_assembly: assembled,
            step1_solve: solved,
            step2,
            total: seconds(start),
        },
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn finish(
    x: CVector,
    apply_a: impl Fn(&CVector) -> CVector,
    b: &CVector,
    s1: Step1,
    shape: (usize, usize),
    epsilon: f64,
    form: &str,
    wall_times: WallTimes,
) -> Result<SolveReport> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("AZ solution is not finite".into()));
    }
    let residual_norm = (b - apply_a(&x)).norm();
    Ok(SolveReport {
        coeff_norm: x.norm(),
        x,
        residual_norm,
        rhs_norm: b.norm(),
        step1_residual: s1.residual,
        step1_rank: s1.rank,
        step1_shape: shape,
        epsilon,
        form: form.into(),
        randomized: s1.randomized,
        dense_fallback: s1.dense_fallback,
        wall_times,
        coefficients: None,
    })
}

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}
