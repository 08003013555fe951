//! Chebyshev tensor basis enriched with log-weighted Chebyshev functions,
//! fitted to a kernel with a logarithmic diagonal singularity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{default_epsilon, PlotKind, PlotSource, PlotSpec, Record, StudyOutput, Table};
use crate::az::{embedded_z, enriched_az_solve};
use crate::bases::families::{chebyshev_values, lexicographic_pairs, to_reference, total_degree_pairs};
use crate::bases::{
    assemble_block_system, chebyshev_left_inverse, grid_chebyshev_tensor, grid_near_diagonal, BlockSystem,
    ConventionalFamily, EnrichedBasis, Enrichment, Grid, PartialInverse, Points, Weight,
};
use crate::diagnostics::{interlacing_check_auto, plunge_profile, singular_profile};
use crate::linalg::{complexify, CMatrix, CVector, TsvdConfig, C64};
use crate::Result;

/// Parameter range of the semicircle.
pub const GREENS_RANGE: (f64, f64) = (0.0, 0.5);

/// Manufactured kernel `e^{s_x + s_y} w(s_x, s_y) + cos(3 (s_x - s_y))`:
/// a smooth multiple of the weight plus a smooth remainder.
pub fn greens_target(weight: &Weight, s_x: f64, s_y: f64) -> Result<f64> {
    Ok((s_x + s_y).exp() * weight.eval(s_x, s_y)? + (3.0 * (s_x - s_y)).cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreensVariant {
    /// Chebyshev only.
    Plain,
    /// With weighted enrichment, structured samples only.
    Enriched,
    /// With weighted enrichment and `2K` samples next to the diagonal.
    EnrichedDiagonal,
}

impl GreensVariant {
    pub const ALL: [GreensVariant; 3] = [GreensVariant::Plain, GreensVariant::Enriched, GreensVariant::EnrichedDiagonal];

    pub fn series(&self) -> &'static str {
        match self {
            GreensVariant::Plain => "plain",
            GreensVariant::Enriched => "enriched",
            GreensVariant::EnrichedDiagonal => "enriched_diag",
        }
    }

    pub fn from_series(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.series() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreensParams {
    pub sqrt_n_list: Vec<usize>,
    /// Size of the error map.
    pub errormap_sqrt_n: usize,
    /// `K = q^2` weighted functions.
    pub q: usize,
    /// Length scale inside the logarithm of the weight.
    pub scale: f64,
    /// Distance of the extra points from the diagonal.
    pub offset: f64,
    /// Cells of the midpoint evaluation grid.
    pub eval_cells: (usize, usize),
    /// Half-width of the diagonal strip.
    pub strip: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for GreensParams {
    fn default() -> Self {
        GreensParams {
            sqrt_n_list: vec![4, 8, 12, 16, 20],
            errormap_sqrt_n: 20,
            q: 5,
            scale: 4.0,
            offset: 1e-3,
            eval_cells: (200, 199),
            strip: 0.05,
            epsilon: default_epsilon(),
            seed: 0,
        }
    }
}

impl GreensParams {
    fn weight(&self) -> Weight {
        Weight::ScaledGreens { scale: self.scale }
    }
}

pub struct GreensCase {
    pub basis: EnrichedBasis,
    pub grid: Grid,
    pub sys: BlockSystem,
    pub z11: PartialInverse,
    pub b: CVector,
}

/// `2 sqrt_n` Chebyshev nodes by `2 sqrt_n` extremae, so `M_N = 4N`.
pub fn greens_case(p: &GreensParams, sqrt_n: usize, variant: GreensVariant) -> Result<GreensCase> {
    let conventional = ConventionalFamily::ChebyshevTensor2D { sqrt_n, range: GREENS_RANGE };
    let enrichment = match variant {
        GreensVariant::Plain => Enrichment::None,
        _ => Enrichment::WeightedChebyshev { weight: p.weight(), q: p.q },
    };
    let basis = EnrichedBasis::new(conventional, enrichment)?;
    let mut grid = grid_chebyshev_tensor(2 * sqrt_n, 2 * sqrt_n, GREENS_RANGE)?;
    if variant == GreensVariant::EnrichedDiagonal {
        grid = grid.with_extra(Points::Plane(grid_near_diagonal(p.q * p.q, p.offset, GREENS_RANGE)?))?;
    }
    let sys = assemble_block_system(&basis, &grid)?;
    let z11 = chebyshev_left_inverse(sqrt_n, &grid, GREENS_RANGE)?;
    let (Points::Plane(s), Points::Plane(e)) = (&grid.structured, &grid.extra) else {
        unreachable!("tensor grids are planar")
    };
    let w = p.weight();
    let samples = s.iter().chain(e).map(|q| greens_target(&w, q[0], q[1])).collect::<Result<Vec<_>>>()?;
    Ok(GreensCase { basis, grid, sys, z11, b: complexify(&samples) })
}

/// Chebyshev values `T_0..T_{count-1}` at each point, one row per point.
fn cheb_rows(count: usize, s: &[f64]) -> CMatrix {
    CMatrix::from_fn(s.len(), count, |m, i| C64::new(chebyshev_values(count, to_reference(s[m], GREENS_RANGE))[i], 0.0))
}

/// Pointwise errors on the midpoints of a `cells.0 x cells.1` grid.
pub struct ErrorGrid {
    pub s_x: Vec<f64>,
    pub s_y: Vec<f64>,
    /// Row `a` holds the errors at `s_x[a]`.
    pub error: Vec<Vec<f64>>,
}

impl ErrorGrid {
    /// `(L2, max, max on |s_x - s_y| < strip)`.
    pub fn norms(&self, strip: f64) -> (f64, f64, f64) {
        let h = (GREENS_RANGE.1 - GREENS_RANGE.0).powi(2) / (self.s_x.len() * self.s_y.len()) as f64;
        let (mut l2, mut max, mut smax) = (0.0_f64, 0.0_f64, 0.0_f64);
        for (a, row) in self.error.iter().enumerate() {
            for (b, &e) in row.iter().enumerate() {
                l2 += e * e * h;
                max = max.max(e);
                if (self.s_x[a] - self.s_y[b]).abs() < strip {
                    smax = smax.max(e);
                }
            }
        }
        (l2.sqrt(), max, smax)
    }
}

/// Separable evaluation `T_x C T_y^T` of the fitted expansion.
pub fn greens_errors(p: &GreensParams, sqrt_n: usize, k: usize, x: &CVector) -> Result<ErrorGrid> {
    let (cx, cy) = p.eval_cells;
    let len = GREENS_RANGE.1 - GREENS_RANGE.0;
    let s_x: Vec<f64> = (0..cx).map(|a| GREENS_RANGE.0 + (a as f64 + 0.5) * len / cx as f64).collect();
    let s_y: Vec<f64> = (0..cy).map(|b| GREENS_RANGE.0 + (b as f64 + 0.5) * len / cy as f64).collect();
    let n = sqrt_n * sqrt_n;
    let mut c = CMatrix::zeros(sqrt_n, sqrt_n);
    for (idx, &(i, j)) in lexicographic_pairs(sqrt_n).iter().enumerate() {
        c[(i, j)] = x[idx];
    }
    let smooth = cheb_rows(sqrt_n, &s_x) * c * cheb_rows(sqrt_n, &s_y).transpose();
    let weighted = if k > 0 {
        let mut d = CMatrix::zeros(p.q, p.q);
        for (idx, &(i, j)) in total_degree_pairs(p.q).iter().enumerate() {
            d[(i, j)] = x[n + idx];
        }
        Some(cheb_rows(p.q, &s_x) * d * cheb_rows(p.q, &s_y).transpose())
    } else {
        None
    };
    let w = p.weight();
    let mut error = vec![vec![0.0; cy]; cx];
    for a in 0..cx {
        for b in 0..cy {
            let mut u = smooth[(a, b)];
            if let Some(v) = &weighted {
                u += v[(a, b)] * w.eval(s_x[a], s_y[b])?;
            }
            error[a][b] = (u - C64::new(greens_target(&w, s_x[a], s_y[b])?, 0.0)).norm();
        }
    }
    Ok(ErrorGrid { s_x, s_y, error })
}

fn cfg(p: &GreensParams) -> Result<TsvdConfig> {
    let cfg = TsvdConfig { epsilon: p.epsilon, seed: p.seed, ..TsvdConfig::default() };
    cfg.validate()?;
    Ok(cfg)
}

struct Solved {
    record: Record,
    errors: ErrorGrid,
    step1_rank: usize,
    m_k: usize,
    k: usize,
    wall: f64,
}

fn solve(p: &GreensParams, sqrt_n: usize, variant: GreensVariant) -> Result<Solved> {
    let case = greens_case(p, sqrt_n, variant)?;
    let rep = enriched_az_solve(&case.sys, &case.z11, &case.b, &cfg(p)?)?;
    let d = case.sys.dims();
    let errors = greens_errors(p, sqrt_n, d.k, &rep.x)?;
    let (l2, max, strip) = errors.norms(p.strip);
    let mut record = Record::from_report(variant.series(), d.n, &rep);
    record.metrics.insert("error_L2".into(), l2);
    record.metrics.insert("error_max".into(), max);
    record.metrics.insert("error_strip_max".into(), strip);
    Ok(Solved { record, errors, step1_rank: rep.step1_rank, m_k: d.m_k, k: d.k, wall: rep.wall_times.total })
}

/// Error norms of the three variants over the size sweep.
pub fn run_greens_accuracy(p: &GreensParams) -> Result<StudyOutput> {
    let mut results = Table::new(&[
        "series", "N", "K", "M_K", "error_L2", "error_max", "error_strip_max", "coeff_norm", "residual", "step1_rank",
    ]);
    let mut timings = Table::new(&["series", "N", "wall_time_s"]);
    let mut records = Vec::new();
    for variant in GreensVariant::ALL {
        for &sqrt_n in &p.sqrt_n_list {
            let s = solve(p, sqrt_n, variant)?;
            let r = &s.record;
            results.push(vec![
                variant.series().into(),
                r.n.into(),
                s.k.into(),
                s.m_k.into(),
                r.metrics["error_L2"].into(),
                r.metrics["error_max"].into(),
                r.metrics["error_strip_max"].into(),
                r.coeff_norm.into(),
                r.residual.into(),
                s.step1_rank.into(),
            ]);
            timings.push(vec![variant.series().into(), r.n.into(), s.wall.into()]);
            records.push(s.record);
        }
    }
    let mut summary = BTreeMap::new();
    let last = |series: &str, col: &str| results.floats(col, Some(series)).last().copied().unwrap_or(f64::NAN);
    summary.insert("l2_ratio_enriched_over_plain".into(), last("enriched", "error_L2") / last("plain", "error_L2"));
    summary.insert(
        "strip_gain_diag".into(),
        last("enriched", "error_strip_max") / last("enriched_diag", "error_strip_max"),
    );
    let plot = PlotSpec::lines("Weighted Chebyshev enrichment", PlotSource::Results, "N", "error_L2", true).guide(-1.0, "O(1/N)");
    Ok(StudyOutput { results, timings, records, plot, summary })
}

/// Pointwise error maps of the enriched variants at `errormap_sqrt_n`.
pub fn run_greens_errormap(p: &GreensParams) -> Result<StudyOutput> {
    let mut results = Table::new(&["series", "s_x", "s_y", "error"]);
    let mut timings = Table::new(&["series", "N", "wall_time_s"]);
    let mut records = Vec::new();
    let mut summary = BTreeMap::new();
    for variant in [GreensVariant::Enriched, GreensVariant::EnrichedDiagonal] {
        let s = solve(p, p.errormap_sqrt_n, variant)?;
        let g = &s.errors;
        for (a, row) in g.error.iter().enumerate() {
            for (b, &e) in row.iter().enumerate() {
                results.push(vec![variant.series().into(), g.s_x[a].into(), g.s_y[b].into(), e.into()]);
            }
        }
        timings.push(vec![variant.series().into(), s.record.n.into(), s.wall.into()]);
        summary.insert(format!("{}_strip_max", variant.series()), s.record.metrics["error_strip_max"]);
        records.push(s.record);
    }
    let plot = PlotSpec {
        title: format!("Pointwise error, N = {}", p.errormap_sqrt_n * p.errormap_sqrt_n),
        kind: PlotKind::Heatmap,
        source: PlotSource::Results,
        x: "s_x".into(),
        y: "s_y".into(),
        value: Some("error".into()),
        log_x: false,
        log_y: false,
        guides: Vec::new(),
        markers: Vec::new(),
    };
    Ok(StudyOutput { results, timings, records, plot, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvdProfileParams {
    pub sqrt_n: usize,
    pub q: usize,
    pub scale: f64,
    pub offset: f64,
}

impl Default for SvdProfileParams {
    fn default() -> Self {
        SvdProfileParams { sqrt_n: 10, q: 3, scale: 4.0, offset: 1e-3 }
    }
}

/// Singular values of the enriched system and of `A - A Z* A`, with the
/// interlacing counts against `A11`.
pub fn run_svd_profile(p: &SvdProfileParams) -> Result<StudyOutput> {
    let gp = GreensParams { q: p.q, scale: p.scale, offset: p.offset, ..GreensParams::default() };
    let case = greens_case(&gp, p.sqrt_n, GreensVariant::EnrichedDiagonal)?;
    let d = case.sys.dims();
    let dense = case.sys.to_dense();
    let profile = singular_profile(&dense)?.with_markers(d.k, d.m_k);
    let plunge = plunge_profile(&case.sys, &embedded_z(&case.sys, &case.z11))?;
    let inter = interlacing_check_auto(&dense, (d.m_n, d.n))?;
    let mut results = Table::new(&["series", "index", "sigma"]);
    for (name, values) in [("A", &profile.values), ("A_minus_AZA", &plunge.values)] {
        for (i, &s) in values.iter().enumerate() {
            results.push(vec![name.into(), (i + 1).into(), s.into()]);
        }
    }
    let mut summary = BTreeMap::new();
    summary.insert("N".into(), d.n as f64);
    summary.insert("K".into(), d.k as f64);
    summary.insert("M_N".into(), d.m_n as f64);
    summary.insert("M_K".into(), d.m_k as f64);
    summary.insert("count_below_a".into(), inter.count_below_a as f64);
    summary.insert("count_above_b".into(), inter.count_above_b as f64);
    summary.insert("interlacing_pass".into(), f64::from(u8::from(inter.pass)));
    summary.insert("precondition_met".into(), f64::from(u8::from(inter.precondition_met)));
    let mut plot = PlotSpec::lines(
        &format!("Singular values, N = {}, K = {}, M_K = {}", d.n, d.k, d.m_k),
        PlotSource::Results,
        "index",
        "sigma",
        false,
    );
    plot.markers = profile.markers.iter().map(|&m| m as f64).collect();
    Ok(StudyOutput { results, timings: Table::new(&["series", "N", "wall_time_s"]), records: Vec::new(), plot, summary })
}
