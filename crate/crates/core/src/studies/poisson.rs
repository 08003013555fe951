//! Poisson on the square with a corner singularity, solved by plain
//! Galerkin and the enriched variants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{default_epsilon, PlotSource, PlotSpec, Record, StudyOutput, Table};
use crate::bases::BlockSystem;
use crate::galerkin::{default_quad_order, method_system, solve_method, EllipticProblem, Method, SingularTerm};
use crate::linalg::{CVector, TsvdConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoissonParams {
    pub sqrt_n_list: Vec<usize>,
    pub methods: Vec<Method>,
    pub singular: SingularTerm,
    /// Per-panel Gauss order; `sqrt_n + 10` when absent.
    pub quad_order: Option<usize>,
    /// Side of the midpoint grid for the max error.
    pub max_grid: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for PoissonParams {
    fn default() -> Self {
        PoissonParams {
            sqrt_n_list: vec![4, 6, 8, 10, 12, 14, 16, 18, 20],
            methods: vec![Method::Galerkin, Method::Esg2 { m_k: 2 }, Method::Collocation { q: 5 }],
            singular: SingularTerm::CornerPower { alpha: 0.5 },
            quad_order: None,
            max_grid: 64,
            epsilon: default_epsilon(),
            seed: 0,
        }
    }
}

impl PoissonParams {
    fn quad_order(&self, sqrt_n: usize) -> usize {
        self.quad_order.unwrap_or_else(|| default_quad_order(sqrt_n))
    }

    fn problem(&self) -> EllipticProblem {
        EllipticProblem::manufactured(self.singular)
    }
}

/// L2 error against the manufactured solution for each method and size.
pub fn run_poisson(p: &PoissonParams) -> Result<StudyOutput> {
    let cfg = TsvdConfig { epsilon: p.epsilon, seed: p.seed, ..TsvdConfig::default() };
    cfg.validate()?;
    let prob = p.problem();
    let exact = prob.exact.clone().expect("manufactured problems carry their solution");
    let mut results = Table::new(&[
        "series", "N", "sqrtN", "error_L2", "error_max", "amplitude", "coeff_norm", "residual", "step1_rank",
    ]);
    let mut timings = Table::new(&["series", "N", "wall_time_s"]);
    let mut records = Vec::new();
    let h = 2.0 / p.max_grid as f64;
    let mid: Vec<f64> = (0..p.max_grid).map(|i| -1.0 + (i as f64 + 0.5) * h).collect();
    for &method in &p.methods {
        for &sqrt_n in &p.sqrt_n_list {
            let (sys, s) = solve_method(&prob, method, sqrt_n, p.quad_order(sqrt_n), &cfg)?;
            let l2 = s.solution.l2_error(&|x, y| exact(x, y), sys.panels());
            let max = mid
                .iter()
                .flat_map(|&x| mid.iter().map(move |&y| (x, y)))
                .map(|(x, y)| (s.solution.eval(x, y) - exact(x, y)).abs())
                .fold(0.0, f64::max);
            let amplitude = s.solution.enrichment.first().copied().unwrap_or(0.0);
            let series = method.name();
            results.push(vec![
                series.into(),
                sys.n().into(),
                sqrt_n.into(),
                l2.into(),
                max.into(),
                amplitude.into(),
                s.report.coeff_norm.into(),
                s.report.residual_norm.into(),
                s.report.step1_rank.into(),
            ]);
            timings.push(vec![series.into(), sys.n().into(), s.report.wall_times.total.into()]);
            let mut rec = Record::from_report(series, sys.n(), &s.report);
            rec.metrics.insert("error_L2".into(), l2);
            rec.metrics.insert("error_max".into(), max);
            rec.metrics.insert("quadrature_converged".into(), f64::from(u8::from(sys.quadrature_converged)));
            records.push(rec);
        }
    }
    let mut summary = BTreeMap::new();
    for m in &p.methods {
        if let Some(&e) = results.floats("error_L2", Some(m.name())).last() {
            summary.insert(format!("{}_final_error", m.name()), e);
        }
    }
    let plot = PlotSpec::lines("Poisson with a corner singularity", PlotSource::Results, "N", "error_L2", true);
    Ok(StudyOutput { results, timings, records, plot, summary })
}

pub(super) fn rebuild(p: &PoissonParams, rec: &Record) -> Result<(BlockSystem, CVector)> {
    let method = p
        .methods
        .iter()
        .copied()
        .find(|m| m.name() == rec.series)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown series `{}`", rec.series)))?;
    let sqrt_n = (rec.n as f64).sqrt().round() as usize;
    let (_, blocks, b) = method_system(&p.problem(), method, sqrt_n, p.quad_order(sqrt_n))?;
    Ok((blocks, b))
}
