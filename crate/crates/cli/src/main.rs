use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use az_cli::config::{ExperimentConfig, Profile, Refusal};
use az_cli::plot::{group, guess_axes, render_heatmap, render_lines, Frame, Heatmap, LineChart};
use az_cli::run::{default_out_dir, heat_cells, run_experiment, verify_dir, PLOT, REPORT, RESULTS, TIMINGS};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "az", version, about = "Run AZ least-squares studies and plot their results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory [default: runs/<experiment>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Recompute residuals and coefficient norms from the written report.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value_t = Profile::Quick)]
        profile: Profile,
    },
    /// Render a CSV as an SVG chart.
    Plot {
        csv: PathBuf,
        /// Output file [default: the CSV path with an .svg extension].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Draw a dashed `x^SLOPE` guide through the first point; repeatable.
        #[arg(long = "guide", allow_hyphen_values = true)]
        guides: Vec<f64>,
        /// Vertical marker at this x; repeatable.
        #[arg(long = "marker")]
        markers: Vec<f64>,
        #[arg(long)]
        linear_x: bool,
        #[arg(long)]
        linear_y: bool,
        #[arg(long)]
        title: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { config, out, verify, profile } => run(&config, out, verify, profile),
        Command::Plot { csv, out, x, y, guides, markers, linear_x, linear_y, title } => {
            plot(&csv, out, x, y, guides, markers, !linear_x, !linear_y, title)
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<Refusal>().is_some() => {
            eprintln!("refused: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(config: &Path, out: Option<PathBuf>, verify: bool, profile: Profile) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let dir = out.unwrap_or_else(|| default_out_dir(&cfg));
    let report = run_experiment(&cfg, profile, &dir)?;
    println!("{}: {} solves written to {}", cfg.study.tag(), report.records.len(), dir.display());
    for (k, v) in &report.summary {
        println!("  {k} = {v:e}");
    }
    println!("  {RESULTS}, {TIMINGS}, {REPORT}, {PLOT}");
    if verify {
        let checks = verify_dir(&dir)?;
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        for c in &failed {
            eprintln!(
                "  mismatch {} N={}: residual {:e} vs {:e}, coeff_norm {:e} vs {:e}",
                c.series, c.n, c.residual_stored, c.residual_recomputed, c.coeff_norm_stored, c.coeff_norm_recomputed
            );
        }
        if !failed.is_empty() {
            bail!("verification failed for {} of {} records", failed.len(), checks.len());
        }
        println!("verified {} records", checks.len());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn plot(
    csv: &Path,
    out: Option<PathBuf>,
    x: Option<String>,
    y: Option<String>,
    guides: Vec<f64>,
    markers: Vec<f64>,
    log_x: bool,
    log_y: bool,
    title: Option<String>,
) -> Result<()> {
    let f = Frame::read(csv)?;
    let (gx, gy) = match (&x, &y) {
        (Some(x), Some(y)) => (x.clone(), y.clone()),
        _ => guess_axes(&f)?,
    };
    let (x, y) = (x.unwrap_or(gx), y.unwrap_or(gy));
    let title = title.unwrap_or_else(|| csv.file_stem().map_or("plot".into(), |s| s.to_string_lossy().into_owned()));
    let svg = if f.has("s_x") && f.has("s_y") && f.has("error") && x == "s_x" {
        render_heatmap(&Heatmap { title, x_label: x.clone(), y_label: "s_y".into(), cells: heat_cells(&f, &x, "s_y", "error")? })?
    } else {
        // index-like axes read better linear
        let log_x = log_x && x != "index";
        render_lines(&LineChart {
            title,
            x_label: x.clone(),
            y_label: y.clone(),
            log_x,
            log_y,
            series: group(f.points(&x, &y)?),
            guides: guides.iter().map(|&s| (s, format!("{x}^{s}"))).collect(),
            markers,
        })?
    };
    let out = out.unwrap_or_else(|| csv.with_extension("svg"));
    std::fs::write(&out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
