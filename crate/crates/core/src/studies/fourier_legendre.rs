//! Fourier series enriched with Legendre polynomials on `[0, 1]`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{default_epsilon, loglog_slope, median, Cell, PlotSource, PlotSpec, Record, StudyOutput, Table};
use crate::az::enriched_az_solve;
use crate::bases::{
    assemble_block_system, families, fourier_left_inverse, grid_clustered_boundary, grid_equispaced,
    BlockSystem, ConventionalFamily, EnrichedBasis, Enrichment, Grid, PartialInverse, Points,
};
use crate::diagnostics::trapezoid_grid;
use crate::linalg::{complexify, qr_least_squares, CVector, LinearOperator, TsvdConfig};
use crate::{Error, Result};

/// `e^t + cos(5 (t - 0.1)^2)`.
pub fn fl_target(t: f64) -> f64 {
    t.exp() + (5.0 * (t - 0.1).powi(2)).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlVariant {
    /// `M = oversampling * N` equispaced points, no extra points.
    Oversampled,
    /// `M_N = N` equispaced points plus `2K` points clustered at the ends.
    ExtraPoints,
}

impl FlVariant {
    pub fn series(&self) -> &'static str {
        match self {
            FlVariant::Oversampled => "oversampled",
            FlVariant::ExtraPoints => "extrapoints",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlParams {
    pub n_list: Vec<usize>,
    pub k: usize,
    /// `M_N / N` of the oversampled variant.
    pub oversampling: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Points of the trapezoid grid errors are measured on.
    pub fine_points: usize,
    /// Errors below this are treated as plateau when fitting the rate.
    pub plateau: f64,
    pub seed: u64,
}

impl Default for FlParams {
    fn default() -> Self {
        FlParams {
            n_list: vec![17, 33, 65, 129, 257],
            k: 5,
            oversampling: 2,
            epsilon: default_epsilon(),
            fine_points: 4001,
            plateau: 1e-11,
            seed: 0,
        }
    }
}

/// The assembled least-squares problem for one size.
pub struct FlCase {
    pub basis: EnrichedBasis,
    pub grid: Grid,
    pub sys: BlockSystem,
    pub z11: PartialInverse,
    pub b: CVector,
}

pub fn fl_case(n: usize, k: usize, variant: FlVariant, oversampling: usize) -> Result<FlCase> {
    let basis = EnrichedBasis::new(ConventionalFamily::Fourier1D { n }, Enrichment::Legendre { k })?;
    let (m_n, extra) = match variant {
        FlVariant::Oversampled => (oversampling * n, Vec::new()),
        FlVariant::ExtraPoints => (n, grid_clustered_boundary(k)?),
    };
    let grid = grid_equispaced(m_n)?.with_extra(Points::Line(extra.clone()))?;
    let sys = assemble_block_system(&basis, &grid)?;
    let z11 = fourier_left_inverse(n, m_n)?;
    let Points::Line(t) = &grid.structured else { unreachable!("equispaced grid is 1D") };
    let samples: Vec<f64> = t.iter().chain(&extra).map(|&t| fl_target(t)).collect();
    Ok(FlCase { basis, grid, sys, z11, b: complexify(&samples) })
}

/// L2 (trapezoid) and max errors of the expansion `x` on `fine` points.
fn fine_errors(n: usize, k: usize, x: &CVector, fine: usize) -> Result<(f64, f64)> {
    let (t, w) = trapezoid_grid(fine, 0.0, 1.0);
    let mut u = families::fourier_eval(n, &t)? * x.rows(0, n);
    if k > 0 {
        u += families::legendre_eval(k, &t)? * x.rows(n, k);
    }
    let (mut l2, mut max) = (0.0_f64, 0.0_f64);
    for (i, &ti) in t.iter().enumerate() {
        let e = (u[i] - fl_target(ti)).norm();
        l2 += w[i] * e * e;
        max = max.max(e);
    }
    Ok((l2.sqrt(), max))
}

/// Accuracy sweep of one variant.
pub fn run_fl_accuracy(p: &FlParams, variant: FlVariant) -> Result<StudyOutput> {
    let cfg = TsvdConfig { epsilon: p.epsilon, seed: p.seed, ..TsvdConfig::default() };
    cfg.validate()?;
    let series = variant.series();
    let mut results = Table::new(&[
        "series", "N", "M_N", "M_K", "K", "error_L2", "error_max", "coeff_norm", "residual", "step1_rank",
    ]);
    let mut timings = Table::new(&["series", "N", "wall_time_s"]);
    let mut records = Vec::new();
    for &n in &p.n_list {
        let case = fl_case(n, p.k, variant, p.oversampling)?;
        let rep = enriched_az_solve(&case.sys, &case.z11, &case.b, &cfg)?;
        let (l2, max) = fine_errors(n, p.k, &rep.x, p.fine_points)?;
        let d = case.sys.dims();
        results.push(vec![
            series.into(),
            n.into(),
            d.m_n.into(),
            d.m_k.into(),
            p.k.into(),
            l2.into(),
            max.into(),
            rep.coeff_norm.into(),
            rep.residual_norm.into(),
            rep.step1_rank.into(),
        ]);
        timings.push(vec![series.into(), n.into(), rep.wall_times.total.into()]);
        let mut rec = Record::from_report(series, n, &rep);
        rec.metrics.insert("error_L2".into(), l2);
        rec.metrics.insert("error_max".into(), max);
        records.push(rec);
    }
    let mut summary = BTreeMap::new();
    let (ns, errs) = pre_plateau(&results, series, p.plateau);
    if ns.len() >= 2 {
        summary.insert("slope_pre_plateau".into(), loglog_slope(&ns, &errs));
    }
    let norms = results.floats("coeff_norm", None);
    let (lo, hi) = norms.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    summary.insert("coeff_norm_ratio".into(), hi / lo);
    let k = p.k as f64;
    let plot = PlotSpec::lines(
        &format!("Fourier + Legendre, {} (K = {})", series, p.k),
        PlotSource::Results,
        "N",
        "error_L2",
        true,
    )
    .guide(-k, &format!("N^-{}", p.k));
    Ok(StudyOutput { results, timings, records, plot, summary })
}

/// `(N, error_L2)` of rows with error above `plateau`.
pub(crate) fn pre_plateau(t: &Table, series: &str, plateau: f64) -> (Vec<f64>, Vec<f64>) {
    let ns = t.floats("N", Some(series));
    let es = t.floats("error_L2", Some(series));
    ns.into_iter().zip(es).filter(|&(_, e)| e > plateau).unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingParams {
    pub n_list: Vec<usize>,
    /// Sizes at which the dense QR least-squares solve is also timed.
    pub direct_n_list: Vec<usize>,
    pub k: usize,
    pub oversampling: usize,
    pub repeats: usize,
    pub warmup: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            n_list: vec![257, 513, 1025, 2049, 4097],
            direct_n_list: vec![129, 257, 513],
            k: 5,
            oversampling: 2,
            repeats: 5,
            warmup: 1,
            epsilon: default_epsilon(),
            seed: 0,
        }
    }
}

fn time_median<T>(repeats: usize, warmup: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, Vec<f64>)> {
    for _ in 0..warmup {
        f()?;
    }
    let mut out = None;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let t0 = Instant::now();
        let v = f()?;
        times.push(t0.elapsed().as_secs_f64());
        out = Some(v);
    }
    Ok((out.expect("at least one repeat"), times))
}

/// Wall time of the enriched AZ solve against dense QR least squares on
/// the oversampled problem. Only the solve is timed; the system and the
/// fast partial inverse are built beforehand.
pub fn run_fl_timing(p: &TimingParams) -> Result<StudyOutput> {
    let cfg = TsvdConfig { epsilon: p.epsilon, seed: p.seed, ..TsvdConfig::default() };
    cfg.validate()?;
    if p.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be positive".into()));
    }
    let mut results = Table::new(&["series", "N", "M", "K", "residual", "coeff_norm", "step1_rank"]);
    let mut timings = Table::new(&["series", "N", "wall_time_s", "min_s", "max_s"]);
    let mut records = Vec::new();
    let mut push = |series: &str, n: usize, m: usize, rank: Cell, rec: Record, times: Vec<f64>, results: &mut Table| {
        results.push(vec![series.into(), n.into(), m.into(), p.k.into(), rec.residual.into(), rec.coeff_norm.into(), rank]);
        let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = times.iter().copied().fold(0.0, f64::max);
        timings.push(vec![series.into(), n.into(), median(&times).into(), lo.into(), hi.into()]);
        let mut rec = rec;
        rec.metrics.insert("wall_time_s".into(), median(&times));
        records.push(rec);
    };
    for &n in &p.n_list {
        let case = fl_case(n, p.k, FlVariant::Oversampled, p.oversampling)?;
        let (rep, times) = time_median(p.repeats, p.warmup, || enriched_az_solve(&case.sys, &case.z11, &case.b, &cfg))?;
        let rank = rep.step1_rank.into();
        push("az", n, case.sys.nrows(), rank, Record::from_report("az", n, &rep), times, &mut results);
    }
    for &n in &p.direct_n_list {
        let case = fl_case(n, p.k, FlVariant::Oversampled, p.oversampling)?;
        let dense = case.sys.to_dense();
        let (x, times) = time_median(p.repeats, p.warmup, || qr_least_squares(&dense, &case.b))?;
        let residual = (&case.b - &dense * &x).norm();
        push("direct", n, dense.nrows(), Cell::Text(String::new()), Record::new("direct", n, &x, residual), times, &mut results);
    }
    let mut summary = BTreeMap::new();
    for s in ["az", "direct"] {
        let ns = timings.floats("N", Some(s));
        let ts = timings.floats("wall_time_s", Some(s));
        if ns.len() >= 2 {
            summary.insert(format!("{s}_slope"), loglog_slope(&ns, &ts));
        }
    }
    let plot = PlotSpec::lines("Enriched AZ versus dense least squares", PlotSource::Timings, "N", "wall_time_s", true)
        .guide(1.0, "O(N)")
        .guide(3.0, "O(N^3)");
    Ok(StudyOutput { results, timings, records, plot, summary })
}
