//! ESG-I, ESG-II, Galerkin plus collocation, and error studies.

use serde::{Deserialize, Serialize};

use super::assemble::{assemble_galerkin, table, GalerkinSystem};
use super::problem::EllipticProblem;
use super::quadrature::Panel;
use super::singular::SingularTerm;
use crate::az::{enriched_az_solve, SolveReport};
use crate::bases::families::homogenized_jacobi;
use crate::bases::BlockSystem;
use crate::linalg::{CMatrix, CVector, TsvdConfig, C64};
use crate::{Error, Result};

/// Coefficients of an enriched Galerkin approximation.
#[derive(Debug, Clone)]
pub struct GalerkinSolution {
    pub sqrt_n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub coeffs: Vec<f64>,
    pub terms: Vec<SingularTerm>,
    pub enrichment: Vec<f64>,
}

impl GalerkinSolution {
    fn from_x(sys: &GalerkinSystem, x: &CVector) -> Self {
        let n = sys.n();
        GalerkinSolution {
            sqrt_n: sys.sqrt_n,
            pairs: sys.pairs.clone(),
            coeffs: x.rows(0, n).iter().map(|z| z.re).collect(),
            terms: sys.terms.clone(),
            enrichment: x.rows(n, sys.k()).iter().map(|z| z.re).collect(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let hx = homogenized_jacobi(self.sqrt_n, x);
        let hy = homogenized_jacobi(self.sqrt_n, y);
        let smooth: f64 = self
            .pairs
            .iter()
            .zip(&self.coeffs)
            .map(|(&(i, j), c)| c * hx.value[i - 1] * hy.value[j - 1])
            .sum();
        let sing: f64 = self.terms.iter().zip(&self.enrichment).map(|(t, c)| c * t.jet(x, y).value).sum();
        smooth + sing
    }

    /// Values on a panel's tensor points, `(a, b)` at `[a][b]`.
    fn eval_panel(&self, p: &Panel) -> Vec<Vec<f64>> {
        let tx = table(self.sqrt_n, &p.x);
        let ty = table(self.sqrt_n, &p.y);
        let mut c = nalgebra::DMatrix::<f64>::zeros(self.sqrt_n, self.sqrt_n);
        for (&(i, j), v) in self.pairs.iter().zip(&self.coeffs) {
            c[(i - 1, j - 1)] = *v;
        }
        let smooth = &tx.v * c * ty.v.transpose();
        (0..p.x.len())
            .map(|a| {
                (0..p.y.len())
                    .map(|b| {
                        let s: f64 = self
                            .terms
                            .iter()
                            .zip(&self.enrichment)
                            .map(|(t, c)| c * t.jet(p.x[a], p.y[b]).value)
                            .sum();
                        smooth[(a, b)] + s
                    })
                    .collect()
            })
            .collect()
    }

    /// `||self - reference||_{L2}` over composite panels.
    pub fn l2_error(&self, reference: &dyn Fn(f64, f64) -> f64, panels: &[Panel]) -> f64 {
        let mut total = 0.0;
        for p in panels {
            let u = self.eval_panel(p);
            for a in 0..p.x.len() {
                for b in 0..p.y.len() {
                    let d = u[a][b] - reference(p.x[a], p.y[b]);
                    total += p.wx[a] * p.wy[b] * d * d;
                }
            }
        }
        total.sqrt()
    }
}

/// A report together with the decoded solution.
#[derive(Debug, Clone)]
pub struct GalerkinSolve {
    pub report: SolveReport,
    pub solution: GalerkinSolution,
}

fn solve_blocks(sys: &GalerkinSystem, blocks: BlockSystem, b: CVector, cfg: &TsvdConfig) -> Result<GalerkinSolve> {
    let z11 = sys.partial_inverse()?;
    let report = enriched_az_solve(&blocks, &z11, &b, cfg)?;
    let solution = GalerkinSolution::from_x(sys, &report.x);
    Ok(GalerkinSolve { report, solution })
}

/// ESG-I: the square Galerkin system with `Z11* = A11^{-1}`.
pub fn esg1_solve(sys: &GalerkinSystem, cfg: &TsvdConfig) -> Result<GalerkinSolve> {
    solve_blocks(sys, sys.block_system()?, sys.rhs(), cfg)
}

/// ESG-II: Galerkin rows for the conventional test functions plus `m_k`
/// rows asking the last `m_k` conventional coefficients to vanish.
pub fn esg2_solve(sys: &GalerkinSystem, m_k: usize, cfg: &TsvdConfig) -> Result<GalerkinSolve> {
    let (blocks, b) = esg2_blocks(sys, m_k)?;
    solve_blocks(sys, blocks, b, cfg)
}

fn esg2_blocks(sys: &GalerkinSystem, m_k: usize) -> Result<(BlockSystem, CVector)> {
    let (n, k) = (sys.n(), sys.k());
    if m_k < k || m_k > n {
        return Err(Error::InvalidArgument(format!(
            "ESG-II needs K <= M_K <= N, got K = {k}, M_K = {m_k}, N = {n}"
        )));
    }
    let mut e = CMatrix::zeros(m_k, n);
    for r in 0..m_k {
        e[(r, n - m_k + r)] = C64::new(1.0, 0.0);
    }
    let blocks = BlockSystem::from_dense(sys.a11.clone(), sys.a12.clone(), e, CMatrix::zeros(m_k, k))?;
    let mut b = CVector::zeros(n + m_k);
    b.rows_mut(0, n).copy_from(&sys.f_n);
    Ok((blocks, b))
}

/// `q x q` equispaced interior collocation points.
pub fn interior_grid(q: usize) -> Vec<[f64; 2]> {
    let s: Vec<f64> = (1..=q).map(|i| -1.0 + 2.0 * i as f64 / (q + 1) as f64).collect();
    s.iter().flat_map(|&x| s.iter().map(move |&y| [x, y])).collect()
}

/// Galerkin rows plus strong-form rows `-lap u(t_m) = f(t_m)`.
pub fn esg_collocation_solve(
    prob: &EllipticProblem,
    sys: &GalerkinSystem,
    colloc: &[[f64; 2]],
    cfg: &TsvdConfig,
) -> Result<GalerkinSolve> {
    let (blocks, b) = collocation_blocks(prob, sys, colloc)?;
    solve_blocks(sys, blocks, b, cfg)
}

fn collocation_blocks(prob: &EllipticProblem, sys: &GalerkinSystem, colloc: &[[f64; 2]]) -> Result<(BlockSystem, CVector)> {
    let (n, k, m_k) = (sys.n(), sys.k(), colloc.len());
    if m_k < k {
        return Err(Error::InvalidArgument(format!("need at least K = {k} collocation points")));
    }
    for p in colloc {
        if !(p[0].abs() < 1.0 && p[1].abs() < 1.0) {
            return Err(Error::SingularPoint {
                point: p.to_vec(),
                reason: "collocation point on the boundary or at the singular corner".into(),
            });
        }
    }
    let mut b21 = CMatrix::zeros(m_k, n);
    let mut b22 = CMatrix::zeros(m_k, k);
    let mut rhs = CVector::zeros(n + m_k);
    rhs.rows_mut(0, n).copy_from(&sys.f_n);
    for (m, p) in colloc.iter().enumerate() {
        let hx = homogenized_jacobi(sys.sqrt_n, p[0]);
        let hy = homogenized_jacobi(sys.sqrt_n, p[1]);
        for (c, &(i, j)) in sys.pairs.iter().enumerate() {
            let lap = hx.d2[i - 1] * hy.value[j - 1] + hx.value[i - 1] * hy.d2[j - 1];
            b21[(m, c)] = C64::new(-lap, 0.0);
        }
        for (t, term) in sys.terms.iter().enumerate() {
            b22[(m, t)] = C64::new(-term.jet(p[0], p[1]).laplacian, 0.0);
        }
        rhs[n + m] = C64::new((prob.rhs)(p[0], p[1]), 0.0);
    }
    let blocks = BlockSystem::from_dense(sys.a11.clone(), sys.a12.clone(), b21, b22)?;
    Ok((blocks, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Plain Galerkin, enrichment dropped.
    Galerkin,
    Esg1,
    Esg2 { m_k: usize },
    /// Collocation on a `q x q` interior grid.
    Collocation { q: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Galerkin => "galerkin",
            Method::Esg1 => "esg1",
            Method::Esg2 { .. } => "esg2",
            Method::Collocation { .. } => "colloc",
        }
    }
}

/// What errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reference", rename_all = "snake_case")]
pub enum Reference {
    Exact,
    /// ESG-II at a larger size.
    Esg2 { sqrt_n: usize, m_k: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRow {
    pub sqrt_n: usize,
    pub n: usize,
    pub l2_error: f64,
    pub report: SolveReport,
    pub enrichment: Vec<f64>,
    pub quadrature_converged: bool,
}

/// `quad_order = sqrt_n + 10`.
pub fn default_quad_order(sqrt_n: usize) -> usize {
    sqrt_n + 10
}

pub fn solve_method(prob: &EllipticProblem, method: Method, sqrt_n: usize, quad_order: usize, cfg: &TsvdConfig) -> Result<(GalerkinSystem, GalerkinSolve)> {
    let (sys, blocks, b) = method_system(prob, method, sqrt_n, quad_order)?;
    let solve = solve_blocks(&sys, blocks, b, cfg)?;
    Ok((sys, solve))
}

/// The assembled Galerkin system together with the block matrix and right
/// hand side that `method` hands to the AZ solver.
pub fn method_system(
    prob: &EllipticProblem,
    method: Method,
    sqrt_n: usize,
    quad_order: usize,
) -> Result<(GalerkinSystem, BlockSystem, CVector)> {
    let prob = if method == Method::Galerkin { prob.plain() } else { prob.clone() };
    let sys = assemble_galerkin(&prob, sqrt_n, quad_order)?;
    let (blocks, b) = match method {
        Method::Galerkin | Method::Esg1 => (sys.block_system()?, sys.rhs()),
        Method::Esg2 { m_k } => esg2_blocks(&sys, m_k)?,
        Method::Collocation { q } => collocation_blocks(&prob, &sys, &interior_grid(q))?,
    };
    Ok((sys, blocks, b))
}

/// L2 errors of `method` for each size.
pub fn error_study(
    prob: &EllipticProblem,
    method: Method,
    sqrt_n_list: &[usize],
    reference: Reference,
    cfg: &TsvdConfig,
) -> Result<Vec<ErrorRow>> {
    let reference_fn: Box<dyn Fn(f64, f64) -> f64> = match reference {
        Reference::Exact => {
            let u = prob
                .exact
                .clone()
                .ok_or_else(|| Error::InvalidArgument("problem has no exact solution".into()))?;
            Box::new(move |x, y| u(x, y))
        }
        Reference::Esg2 { sqrt_n, m_k } => {
            let (_, s) = solve_method(prob, Method::Esg2 { m_k }, sqrt_n, default_quad_order(sqrt_n), cfg)?;
            Box::new(move |x, y| s.solution.eval(x, y))
        }
    };
    let mut rows = Vec::with_capacity(sqrt_n_list.len());
    for &sqrt_n in sqrt_n_list {
        let (sys, s) = solve_method(prob, method, sqrt_n, default_quad_order(sqrt_n), cfg)?;
        let l2_error = s.solution.l2_error(&reference_fn, sys.panels());
        rows.push(ErrorRow {
            sqrt_n,
            n: sys.n(),
            l2_error,
            enrichment: s.solution.enrichment.clone(),
            report: s.report,
            quadrature_converged: sys.quadrature_converged,
        });
    }
    Ok(rows)
}
