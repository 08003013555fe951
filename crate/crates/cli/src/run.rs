//! Running a study and writing its artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use az_core::studies::{self, PlotKind, PlotSource, PlotSpec, Record, StudyOutput, Table, VerifyCheck};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Profile};
use crate::plot::{group, render_heatmap, render_lines, Frame, Heatmap, LineChart};

pub const RESULTS: &str = "results.csv";
pub const TIMINGS: &str = "timings.csv";
pub const REPORT: &str = "report.json";
pub const PLOT: &str = "plot.svg";

/// Where and how a run happened. Timings in the report are only
/// comparable between runs with matching descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    pub version: String,
    pub debug_build: bool,
}

impl Machine {
    pub fn current() -> Self {
        Machine {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            version: env!("CARGO_PKG_VERSION").into(),
            debug_build: cfg!(debug_assertions),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub profile: Profile,
    pub machine: Machine,
    pub summary: BTreeMap<String, f64>,
    pub plot: PlotSpec,
    pub records: Vec<Record>,
}

impl Report {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(REPORT);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn default_out_dir(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from("runs").join(cfg.study.tag())
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn frame(table: &Table) -> Frame {
    Frame {
        columns: table.columns.clone(),
        rows: table.rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect(),
    }
}

/// Renders the study's own plot description.
pub fn render_spec(spec: &PlotSpec, out: &StudyOutput) -> Result<String> {
    let table = match spec.source {
        PlotSource::Results => &out.results,
        PlotSource::Timings => &out.timings,
    };
    let f = frame(table);
    match spec.kind {
        PlotKind::Lines => render_lines(&LineChart {
            title: spec.title.clone(),
            x_label: spec.x.clone(),
            y_label: spec.y.clone(),
            log_x: spec.log_x,
            log_y: spec.log_y,
            series: group(f.points(&spec.x, &spec.y)?),
            guides: spec.guides.iter().map(|g| (g.slope, g.label.clone())).collect(),
            markers: spec.markers.clone(),
        }),
        PlotKind::Heatmap => {
            let value = spec.value.as_deref().unwrap_or("error");
            render_heatmap(&Heatmap {
                title: spec.title.clone(),
                x_label: spec.x.clone(),
                y_label: spec.y.clone(),
                cells: heat_cells(&f, &spec.x, &spec.y, value)?,
            })
        }
    }
}

pub fn heat_cells(f: &Frame, x: &str, y: &str, value: &str) -> Result<Vec<(String, f64, f64, f64)>> {
    let xy = f.points(x, y)?;
    let v = f.points(x, value)?;
    anyhow::ensure!(xy.len() == v.len(), "rows with missing values in `{value}`");
    Ok(xy.into_iter().zip(v).map(|((s, x, y), (_, _, v))| (s, x, y, v)).collect())
}

/// Runs the study and writes every artifact into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, profile: Profile, dir: &Path) -> Result<Report> {
    cfg.check(profile)?;
    let out = studies::run(&cfg.study).with_context(|| format!("running {}", cfg.study.tag()))?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_table(&dir.join(RESULTS), &out.results)?;
    write_table(&dir.join(TIMINGS), &out.timings)?;
    let svg = render_spec(&out.plot, &out)?;
    fs::write(dir.join(PLOT), svg)?;
    let report = Report {
        schema: crate::config::SCHEMA_VERSION,
        config: cfg.clone(),
        profile,
        machine: Machine::current(),
        summary: out.summary,
        plot: out.plot,
        records: out.records,
    };
    fs::write(dir.join(REPORT), serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

/// Re-reads `report.json` in `dir` and recomputes every stored residual and
/// coefficient norm from the stored coefficients.
pub fn verify_dir(dir: &Path) -> Result<Vec<VerifyCheck>> {
    let report = Report::load(dir)?;
    Ok(studies::verify(&report.config.study, &report.records)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use az_core::studies::Cell;

    #[test]
    fn table_round_trips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["series", "N", "error_L2"]);
        t.push(vec![Cell::from("a"), 17.into(), 0.1_f64.into()]);
        t.push(vec![Cell::from("a"), 33.into(), 1.0e-300_f64.into()]);
        let path = dir.path().join("t.csv");
        write_table(&path, &t).unwrap();
        let f = Frame::read(&path).unwrap();
        let pts = f.points("N", "error_L2").unwrap();
        assert_eq!(pts[0].2, 0.1);
        assert_eq!(pts[1].2, 1.0e-300);
    }

    #[test]
    fn machine_descriptor_is_filled() {
        let m = Machine::current();
        assert!(m.logical_cpus >= 1);
        assert!(!m.os.is_empty());
    }
}
