//! Desk-scale experiment drivers shared by the CLI, the benches and the
//! acceptance tests.
//!
//! Every study returns a deterministic results table, a separate timing
//! table, one [`Record`] per solve (with coefficients, for re-verification)
//! and a [`PlotSpec`] describing how to draw it.

mod fourier_legendre;
mod greens;
mod poisson;

pub use fourier_legendre::{
    fl_case, fl_target, run_fl_accuracy, run_fl_timing, FlCase, FlParams, FlVariant, TimingParams,
};
pub use greens::{
    greens_case, greens_target, run_greens_accuracy, run_greens_errormap, run_svd_profile,
    GreensCase, GreensParams, GreensVariant, SvdProfileParams,
};
pub use poisson::{run_poisson, PoissonParams};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::az::SolveReport;
use crate::bases::BlockSystem;
use crate::linalg::{CVector, LinearOperator, C64};
use crate::{Error, Result};

/// Default truncation threshold of the studies.
pub const STUDY_EPSILON: f64 = 1e-12;

/// Residuals and coefficient norms recomputed by [`verify`] must match the
/// stored ones to this relative tolerance.
pub const VERIFY_TOLERANCE: f64 = 1e-10;

/// One experiment and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Study {
    SvdProfile(SvdProfileParams),
    FlTiming(TimingParams),
    FlAccuracyOversampled(FlParams),
    FlAccuracyExtrapoints(FlParams),
    GreensAccuracy(GreensParams),
    GreensErrormap(GreensParams),
    EsgPoisson(PoissonParams),
}

impl Study {
    pub fn tag(&self) -> &'static str {
        match self {
            Study::SvdProfile(_) => "svd_profile",
            Study::FlTiming(_) => "fl_timing",
            Study::FlAccuracyOversampled(_) => "fl_accuracy_oversampled",
            Study::FlAccuracyExtrapoints(_) => "fl_accuracy_extrapoints",
            Study::GreensAccuracy(_) => "greens_accuracy",
            Study::GreensErrormap(_) => "greens_errormap",
            Study::EsgPoisson(_) => "esg_poisson",
        }
    }

    /// A study with default parameters for `tag`.
    pub fn default_for(tag: &str) -> Option<Study> {
        Some(match tag {
            "svd_profile" => Study::SvdProfile(SvdProfileParams::default()),
            "fl_timing" => Study::FlTiming(TimingParams::default()),
            "fl_accuracy_oversampled" => Study::FlAccuracyOversampled(FlParams::default()),
            "fl_accuracy_extrapoints" => Study::FlAccuracyExtrapoints(FlParams::default()),
            "greens_accuracy" => Study::GreensAccuracy(GreensParams::default()),
            "greens_errormap" => Study::GreensErrormap(GreensParams::default()),
            "esg_poisson" => Study::EsgPoisson(PoissonParams::default()),
            _ => return None,
        })
    }

    /// Sweep sizes used for the ordering invariant.
    fn sweeps(&self) -> Vec<(&'static str, &[usize])> {
        match self {
            Study::SvdProfile(_) => vec![],
            Study::FlTiming(p) => vec![("n_list", &p.n_list[..]), ("direct_n_list", &p.direct_n_list[..])],
            Study::FlAccuracyOversampled(p) | Study::FlAccuracyExtrapoints(p) => vec![("n_list", &p.n_list[..])],
            Study::GreensAccuracy(p) => vec![("sqrt_n_list", &p.sqrt_n_list[..])],
            Study::GreensErrormap(_) => vec![],
            Study::EsgPoisson(p) => vec![("sqrt_n_list", &p.sqrt_n_list[..])],
        }
    }

    fn epsilon(&self) -> f64 {
        match self {
            Study::SvdProfile(_) => STUDY_EPSILON,
            Study::FlTiming(p) => p.epsilon,
            Study::FlAccuracyOversampled(p) | Study::FlAccuracyExtrapoints(p) => p.epsilon,
            Study::GreensAccuracy(p) | Study::GreensErrormap(p) => p.epsilon,
            Study::EsgPoisson(p) => p.epsilon,
        }
    }
}

/// Size caps of a run profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest row or column count of any densified matrix.
    pub max_dense_dim: usize,
    /// Largest Fourier basis size on the FFT path.
    pub max_fourier_n: usize,
}

impl Limits {
    pub fn quick() -> Self {
        Limits { max_dense_dim: 4000, max_fourier_n: 4097 }
    }

    pub fn full() -> Self {
        Limits { max_dense_dim: 12000, max_fourier_n: 65537 }
    }
}

/// A configuration outside the profile's caps.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardViolation {
    pub message: String,
    pub suggestion: String,
}

impl fmt::Display for GuardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (try {})", self.message, self.suggestion)
    }
}

fn refuse(message: String, suggestion: String) -> std::result::Result<(), GuardViolation> {
    Err(GuardViolation { message, suggestion })
}

/// Check parameter sanity and the size caps before running anything.
pub fn check_guards(study: &Study, limits: &Limits) -> std::result::Result<(), GuardViolation> {
    let eps = study.epsilon();
    if !(eps > 0.0 && eps < 1.0) {
        return refuse(format!("epsilon must lie in (0, 1), got {eps}"), "\"epsilon\": 1e-12".into());
    }
    for (name, list) in study.sweeps() {
        if list.is_empty() {
            return refuse(format!("{name} is empty"), format!("a non-empty `{name}`"));
        }
        if list.windows(2).any(|w| w[0] >= w[1]) {
            let mut sorted = list.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            return refuse(format!("{name} must be strictly ascending"), format!("{sorted:?}"));
        }
    }
    let cap = limits.max_dense_dim;
    let shrink = |list: &[usize], fits: &dyn Fn(usize) -> bool| -> String {
        format!("{:?}", list.iter().copied().filter(|&v| fits(v)).collect::<Vec<_>>())
    };
    match study {
        Study::FlTiming(p) => {
            let fft = |n: usize| n <= limits.max_fourier_n;
            if let Some(&n) = p.n_list.iter().find(|&&n| !fft(n)) {
                return refuse(format!("N = {n} exceeds the FFT cap {}", limits.max_fourier_n), shrink(&p.n_list, &fft));
            }
            let dense = |n: usize| p.oversampling * n <= cap && n + p.k <= cap;
            if let Some(&n) = p.direct_n_list.iter().find(|&&n| !dense(n)) {
                return refuse(
                    format!("direct least squares at N = {n} densifies a {} x {} matrix (cap {cap})", p.oversampling * n, n + p.k),
                    format!("\"direct_n_list\": {}", shrink(&p.direct_n_list, &dense)),
                );
            }
        }
        Study::FlAccuracyOversampled(p) | Study::FlAccuracyExtrapoints(p) => {
            // the fine-grid evaluation matrix is dense
            let fits = |n: usize| n <= limits.max_fourier_n && n + p.k <= cap && p.oversampling * n <= 4 * cap;
            if let Some(&n) = p.n_list.iter().find(|&&n| !fits(n)) {
                return refuse(format!("N = {n} exceeds the desk-scale caps"), format!("\"n_list\": {}", shrink(&p.n_list, &fits)));
            }
        }
        Study::SvdProfile(p) => {
            let rows = 4 * p.sqrt_n * p.sqrt_n + 2 * p.q * p.q;
            if rows > cap {
                let mut s = p.sqrt_n;
                while s > 1 && 4 * s * s + 2 * p.q * p.q > cap {
                    s -= 1;
                }
                return refuse(format!("the dense system has {rows} rows (cap {cap})"), format!("\"sqrt_n\": {s}"));
            }
        }
        Study::GreensAccuracy(p) => {
            let fits = |s: usize| 4 * s * s + 2 * p.q * p.q <= cap;
            if let Some(&s) = p.sqrt_n_list.iter().find(|&&s| !fits(s)) {
                return refuse(format!("sqrt_n = {s} exceeds the dense cap {cap}"), format!("\"sqrt_n_list\": {}", shrink(&p.sqrt_n_list, &fits)));
            }
        }
        Study::GreensErrormap(p) => {
            let s = p.errormap_sqrt_n;
            if 4 * s * s + 2 * p.q * p.q > cap {
                return refuse(format!("errormap_sqrt_n = {s} exceeds the dense cap {cap}"), "\"errormap_sqrt_n\": 20".into());
            }
        }
        Study::EsgPoisson(p) => {
            let fits = |s: usize| s * s <= cap;
            if let Some(&s) = p.sqrt_n_list.iter().find(|&&s| !fits(s)) {
                return refuse(format!("sqrt_n = {s} exceeds the dense cap {cap}"), format!("\"sqrt_n_list\": {}", shrink(&p.sqrt_n_list, &fits)));
            }
        }
    }
    Ok(())
}

/// One CSV cell. Floats print in shortest round-trip scientific notation,
/// so identical numbers give identical text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(usize),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A rectangular table with named columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column, restricted to rows whose `series` cell
    /// equals `series` when given.
    pub fn floats(&self, name: &str, series: Option<&str>) -> Vec<f64> {
        let Some(c) = self.column(name) else { return Vec::new() };
        let s = self.column("series");
        self.rows
            .iter()
            .filter(|r| match (series, s) {
                (Some(want), Some(s)) => matches!(&r[s], Cell::Text(t) if t == want),
                _ => true,
            })
            .filter_map(|r| match r[c] {
                Cell::Int(v) => Some(v as f64),
                Cell::Float(v) => Some(v),
                Cell::Text(_) => None,
            })
            .collect()
    }
}

/// One solve, with enough to recompute its residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Record {
    pub series: String,
    pub n: usize,
    pub residual: f64,
    pub coeff_norm: f64,
    /// `(re, im)` pairs.
    pub coefficients: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SolveReport>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

impl Record {
    pub fn new(series: impl Into<String>, n: usize, x: &CVector, residual: f64) -> Self {
        Record {
            series: series.into(),
            n,
            residual,
            coeff_norm: x.norm(),
            coefficients: x.iter().map(|z| [z.re, z.im]).collect(),
            report: None,
            metrics: BTreeMap::new(),
        }
    }

    pub fn from_report(series: impl Into<String>, n: usize, report: &SolveReport) -> Self {
        let mut r = Record::new(series, n, &report.x, report.residual_norm);
        r.report = Some(report.clone());
        r
    }

    pub fn x(&self) -> CVector {
        CVector::from_iterator(self.coefficients.len(), self.coefficients.iter().map(|c| C64::new(c[0], c[1])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotSource {
    Results,
    Timings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// One polyline per series.
    Lines,
    /// `value` over the `(x, y)` plane, one panel per series.
    Heatmap,
}

/// A dashed reference line `y ~ x^slope` anchored at the first point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Guide {
    pub slope: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub kind: PlotKind,
    pub source: PlotSource,
    pub x: String,
    pub y: String,
    /// Colour column of a heatmap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub log_x: bool,
    pub log_y: bool,
    #[serde(default)]
    pub guides: Vec<Guide>,
    /// Vertical marker lines at these x values.
    #[serde(default)]
    pub markers: Vec<f64>,
}

impl PlotSpec {
    fn lines(title: &str, source: PlotSource, x: &str, y: &str, log_x: bool) -> Self {
        PlotSpec {
            title: title.into(),
            kind: PlotKind::Lines,
            source,
            x: x.into(),
            y: y.into(),
            value: None,
            log_x,
            log_y: true,
            guides: Vec::new(),
            markers: Vec::new(),
        }
    }

    fn guide(mut self, slope: f64, label: &str) -> Self {
        self.guides.push(Guide { slope, label: label.into() });
        self
    }
}

/// Everything a study produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyOutput {
    pub results: Table,
    pub timings: Table,
    pub records: Vec<Record>,
    pub plot: PlotSpec,
    /// Derived scalars such as fitted slopes.
    pub summary: BTreeMap<String, f64>,
}

/// Run a study. Call [`check_guards`] first.
pub fn run(study: &Study) -> Result<StudyOutput> {
    match study {
        Study::SvdProfile(p) => run_svd_profile(p),
        Study::FlTiming(p) => run_fl_timing(p),
        Study::FlAccuracyOversampled(p) => run_fl_accuracy(p, FlVariant::Oversampled),
        Study::FlAccuracyExtrapoints(p) => run_fl_accuracy(p, FlVariant::ExtraPoints),
        Study::GreensAccuracy(p) => run_greens_accuracy(p),
        Study::GreensErrormap(p) => run_greens_errormap(p),
        Study::EsgPoisson(p) => run_poisson(p),
    }
}

/// Stored versus recomputed residual and coefficient norm of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCheck {
    pub series: String,
    pub n: usize,
    pub residual_stored: f64,
    pub residual_recomputed: f64,
    pub coeff_norm_stored: f64,
    pub coeff_norm_recomputed: f64,
    pub pass: bool,
}

/// Rebuild each record's system from the study parameters and recompute
/// `||b - A x||` and `||x||` from the stored coefficients.
pub fn verify(study: &Study, records: &[Record]) -> Result<Vec<VerifyCheck>> {
    records
        .iter()
        .map(|rec| {
            let (a, b) = rebuild(study, rec)?;
            let x = rec.x();
            if x.len() != a.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "record {} N={} has {} coefficients, system has {} columns",
                    rec.series,
                    rec.n,
                    x.len(),
                    a.ncols()
                )));
            }
            let residual = (&b - a.apply(&x)).norm();
            let coeff_norm = x.norm();
            let scale = b.norm().max(1.0);
            let pass = (residual - rec.residual).abs() <= VERIFY_TOLERANCE * scale
                && (coeff_norm - rec.coeff_norm).abs() <= VERIFY_TOLERANCE * coeff_norm.max(1.0);
            Ok(VerifyCheck {
                series: rec.series.clone(),
                n: rec.n,
                residual_stored: rec.residual,
                residual_recomputed: residual,
                coeff_norm_stored: rec.coeff_norm,
                coeff_norm_recomputed: coeff_norm,
                pass,
            })
        })
        .collect()
}

fn rebuild(study: &Study, rec: &Record) -> Result<(BlockSystem, CVector)> {
    match study {
        Study::FlTiming(p) => {
            let c = fl_case(rec.n, p.k, FlVariant::Oversampled, p.oversampling)?;
            Ok((c.sys, c.b))
        }
        Study::FlAccuracyOversampled(p) => {
            let c = fl_case(rec.n, p.k, FlVariant::Oversampled, p.oversampling)?;
            Ok((c.sys, c.b))
        }
        Study::FlAccuracyExtrapoints(p) => {
            let c = fl_case(rec.n, p.k, FlVariant::ExtraPoints, p.oversampling)?;
            Ok((c.sys, c.b))
        }
        Study::GreensAccuracy(p) | Study::GreensErrormap(p) => {
            let variant = GreensVariant::from_series(&rec.series)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown series `{}`", rec.series)))?;
            let sqrt_n = (rec.n as f64).sqrt().round() as usize;
            let c = greens_case(p, sqrt_n, variant)?;
            Ok((c.sys, c.b))
        }
        Study::EsgPoisson(p) => poisson::rebuild(p, rec),
        Study::SvdProfile(_) => Err(Error::Unsupported("svd_profile stores no solves".into())),
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn default_epsilon() -> f64 {
    STUDY_EPSILON
}
