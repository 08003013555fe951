//! Self-contained SVG charts: log/linear line plots and error heatmaps.

use std::fmt::Write;

use anyhow::{bail, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
/// Heatmap cells per axis; finer data is max-pooled.
const HEAT_CELLS: usize = 100;

/// A CSV loaded as text cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Frame {
    pub fn read(path: &std::path::Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        if columns.is_empty() || rows.is_empty() {
            bail!("{} has no data rows", path.display());
        }
        Ok(Frame { columns, rows })
    }

    pub fn has(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c == name)
    }

    fn index(&self, name: &str) -> Result<usize> {
        match self.columns.iter().position(|c| c == name) {
            Some(i) => Ok(i),
            None => bail!("no column `{name}` (have {})", self.columns.join(", ")),
        }
    }

    /// `(series, x, y)` for every row where both values parse. Rows
    /// without a `series` column fall into one series named after `y`.
    pub fn points(&self, x: &str, y: &str) -> Result<Vec<(String, f64, f64)>> {
        let (xi, yi) = (self.index(x)?, self.index(y)?);
        let si = self.columns.iter().position(|c| c == "series");
        Ok(self
            .rows
            .iter()
            .filter_map(|r| {
                let xv = r.get(xi)?.parse().ok()?;
                let yv = r.get(yi)?.parse().ok()?;
                let s = si.and_then(|i| r.get(i).cloned()).unwrap_or_else(|| y.to_string());
                Some((s, xv, yv))
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Groups `(series, x, y)` triples in first-seen order.
pub fn group(points: Vec<(String, f64, f64)>) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for (name, x, y) in points {
        match out.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push((x, y)),
            None => out.push(Series { name, points: vec![(x, y)] }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// `(slope, label)` of dashed `x^slope` guides through the first point.
    pub guides: Vec<(f64, String)>,
    /// x positions of vertical marker lines.
    pub markers: Vec<f64>,
}

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(log: bool, values: impl Iterator<Item = f64>, from: f64, to: f64) -> Option<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter_map(|v| transform(log, v)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return None;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            let pad = if log { 1.0 } else { lo.abs().max(1.0) * 0.1 };
            lo -= pad;
            hi += pad;
        } else if !log {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Some(Axis { log, lo, hi, from, to })
    }

    fn map(&self, v: f64) -> Option<f64> {
        let t = transform(self.log, v)?;
        Some(self.from + (t - self.lo) / (self.hi - self.lo) * (self.to - self.from))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo as i32, self.hi as i32);
            let step = ((b - a) as f64 / 8.0).ceil().max(1.0) as i32;
            (a..=b).step_by(step as usize).map(|e| (10f64.powi(e), format!("1e{e}"))).collect()
        } else {
            let span = self.hi - self.lo;
            let raw = span / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag);
            let mut v = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while v <= self.hi + 1e-9 * step {
                out.push((v, short(v)));
                v += step;
            }
            out
        }
    }
}

fn transform(log: bool, v: f64) -> Option<f64> {
    if !v.is_finite() {
        return None;
    }
    if log {
        (v > 0.0).then(|| v.log10())
    } else {
        Some(v)
    }
}

fn short(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(svg: &mut String, title: &str) {
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(svg: &mut String, xa: &Axis, ya: &Axis, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (xa.from, xa.to, HEIGHT - BOTTOM, TOP);
    let _ = write!(svg, r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#333"/>"##, x1 - x0, y0 - y1);
    for (v, label) in xa.ticks() {
        let Some(px) = xa.map(v) else { continue };
        let _ = write!(svg, r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{y1}" stroke="#ddd"/>"##);
        let _ = write!(svg, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{label}</text>"#, y0 + 16.0);
    }
    for (v, label) in ya.ticks() {
        let Some(py) = ya.map(v) else { continue };
        let _ = write!(svg, r##"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="#ddd"/>"##);
        let _ = write!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 6.0, py + 4.0);
    }
    let _ = write!(
        svg,
        r#"<text class="x-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let cy = (y0 + y1) / 2.0;
    let _ = write!(
        svg,
        r#"<text class="y-label" x="20" y="{cy}" text-anchor="middle" transform="rotate(-90 20 {cy})">{}</text>"#,
        escape(y_label)
    );
}

pub fn render_lines(chart: &LineChart) -> Result<String> {
    let all = || chart.series.iter().flat_map(|s| s.points.iter());
    if all().next().is_none() {
        bail!("nothing to plot");
    }
    let names: Vec<&str> = chart.series.iter().map(|s| s.name.as_str()).collect();
    let right = WIDTH - RIGHT - legend_width(&names);
    let xs = all().map(|p| p.0).chain(chart.markers.iter().copied());
    let Some(xa) = Axis::new(chart.log_x, xs, LEFT, right) else {
        bail!("no plottable x values");
    };
    let Some(ya) = Axis::new(chart.log_y, all().map(|p| p.1), HEIGHT - BOTTOM, TOP) else {
        bail!("no plottable y values");
    };
    let mut svg = String::new();
    header(&mut svg, &chart.title);
    axes(&mut svg, &xa, &ya, &chart.x_label, &chart.y_label);
    let _ = write!(
        svg,
        r#"<clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{}" height="{}"/></clipPath><g clip-path="url(#plot)">"#,
        right - LEFT,
        HEIGHT - TOP - BOTTOM
    );
    for &m in &chart.markers {
        if let Some(px) = xa.map(m) {
            let _ = write!(
                svg,
                r##"<line class="marker" x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}" stroke="#555" stroke-dasharray="2,3"/>"##,
                HEIGHT - BOTTOM
            );
        }
    }
    // guides pass through the first point of the first series
    if let Some(&(gx, gy)) = chart.series.first().and_then(|s| s.points.first()) {
        let (xmin, xmax) = all().fold((f64::INFINITY, 0.0_f64), |(a, b), p| (a.min(p.0), b.max(p.0)));
        for (slope, label) in &chart.guides {
            let end = |x: f64| gy * (x / gx).powf(*slope);
            let (Some(ax), Some(ay), Some(bx), Some(by)) =
                (xa.map(xmin), ya.map(end(xmin)), xa.map(xmax), ya.map(end(xmax)))
            else {
                continue;
            };
            let _ = write!(
                svg,
                r##"<line class="guide" x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="#444" stroke-dasharray="6,4"/>"##
            );
            let _ = write!(svg, r##"<text x="{:.2}" y="{:.2}" fill="#444">{}</text>"##, bx - 40.0, by - 6.0, escape(label));
        }
    }
    for (i, s) in chart.series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().filter_map(|&(x, y)| Some((xa.map(x)?, ya.map(y)?))).collect();
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = write!(
                svg,
                r#"<polyline class="series" fill="none" stroke="{colour}" stroke-width="1.8" points="{}"/>"#,
                path.join(" ")
            );
        }
        // dense profiles get no per-point markers
        if pts.len() <= 64 {
            for (x, y) in &pts {
                let _ = write!(svg, r#"<circle class="point" cx="{x:.2}" cy="{y:.2}" r="3" fill="{colour}"/>"#);
            }
        }
    }
    svg.push_str("</g>");
    legend(&mut svg, &names, right + 10.0);
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Room the legend takes right of the plot area; zero when there is none.
fn legend_width(names: &[&str]) -> f64 {
    if names.iter().all(|n| n.is_empty()) {
        return 0.0;
    }
    44.0 + 7.0 * names.iter().map(|n| n.len()).max().unwrap_or(0) as f64 + 10.0
}

fn legend(svg: &mut String, names: &[&str], x: f64) {
    let w = legend_width(names) - 10.0;
    if w <= 0.0 {
        return;
    }
    let _ = write!(
        svg,
        r##"<g class="legend"><rect x="{x}" y="{}" width="{w}" height="{}" fill="white" fill-opacity="0.85" stroke="#999"/>"##,
        TOP + 8.0,
        8.0 + 18.0 * names.len() as f64
    );
    for (i, n) in names.iter().enumerate() {
        let y = TOP + 24.0 + 18.0 * i as f64;
        let colour = PALETTE[i % PALETTE.len()];
        let _ = write!(
            svg,
            r#"<g class="legend-entry"><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{y}">{}</text></g>"#,
            x + 6.0,
            y - 4.0,
            x + 26.0,
            y - 4.0,
            x + 32.0,
            escape(n)
        );
    }
    svg.push_str("</g>");
}

/// `value(x, y)` panels, one per series, coloured by `log10(value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// `(series, x, y, value)`.
    pub cells: Vec<(String, f64, f64, f64)>,
}

fn ramp(t: f64) -> String {
    // dark blue through teal and yellow
    let stops = [(0.0, [68.0, 1.0, 84.0]), (0.5, [33.0, 145.0, 140.0]), (1.0, [253.0, 231.0, 37.0])];
    let t = t.clamp(0.0, 1.0);
    let (a, b) = if t <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let u = (t - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] + u * (b.1[i] - a.1[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

pub fn render_heatmap(map: &Heatmap) -> Result<String> {
    let logs: Vec<f64> = map.cells.iter().filter_map(|c| transform(true, c.3)).collect();
    if logs.is_empty() {
        bail!("nothing to plot");
    }
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil().max(lo + 1.0);
    type Panel = (String, Vec<(f64, f64, f64)>);
    let mut panels: Vec<Panel> = Vec::new();
    for (s, x, y, v) in &map.cells {
        match panels.iter_mut().find(|p| &p.0 == s) {
            Some(p) => p.1.push((*x, *y, *v)),
            None => panels.push((s.clone(), vec![(*x, *y, *v)])),
        }
    }
    let mut svg = String::new();
    header(&mut svg, &map.title);
    let bar = 60.0;
    let gap = 30.0;
    let avail = WIDTH - LEFT - RIGHT - bar - gap * (panels.len() as f64 - 1.0);
    let side = (avail / panels.len() as f64).min(HEIGHT - TOP - BOTTOM - 10.0);
    for (k, (name, cells)) in panels.iter().enumerate() {
        let px0 = LEFT + k as f64 * (side + gap);
        let py0 = TOP + 10.0;
        let xs = distinct(cells.iter().map(|c| c.0));
        let ys = distinct(cells.iter().map(|c| c.1));
        let (bx, by) = (xs.len().min(HEAT_CELLS), ys.len().min(HEAT_CELLS));
        let mut pooled = vec![vec![f64::NAN; by]; bx];
        for &(x, y, v) in cells {
            let i = bin(&xs, x, bx);
            let j = bin(&ys, y, by);
            if v.is_finite() && (pooled[i][j].is_nan() || v > pooled[i][j]) {
                pooled[i][j] = v;
            }
        }
        let (cw, ch) = (side / bx as f64, side / by as f64);
        let _ = write!(svg, r#"<g class="panel">"#);
        for (i, col) in pooled.iter().enumerate() {
            for (j, &v) in col.iter().enumerate() {
                let fill = match transform(true, v) {
                    Some(l) => ramp((l - lo) / (hi - lo)),
                    None => "#ffffff".into(),
                };
                let _ = write!(
                    svg,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    px0 + i as f64 * cw,
                    py0 + side - (j + 1) as f64 * ch,
                    cw + 0.05,
                    ch + 0.05
                );
            }
        }
        let _ = write!(
            svg,
            r##"<rect x="{px0}" y="{py0}" width="{side}" height="{side}" fill="none" stroke="#333"/><text x="{}" y="{}" text-anchor="middle">{}</text></g>"##,
            px0 + side / 2.0,
            py0 - 4.0,
            escape(name)
        );
        let (xl, xh) = (xs[0], xs[xs.len() - 1]);
        let (yl, yh) = (ys[0], ys[ys.len() - 1]);
        let _ = write!(svg, r#"<text x="{px0}" y="{}">{}</text>"#, py0 + side + 14.0, short(xl));
        let _ = write!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, px0 + side, py0 + side + 14.0, short(xh));
        if k == 0 {
            let _ = write!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, px0 - 4.0, py0 + side, short(yl));
            let _ = write!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, px0 - 4.0, py0 + 10.0, short(yh));
        }
        let _ = write!(
            svg,
            r#"<text class="x-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px0 + side / 2.0,
            py0 + side + 30.0,
            escape(&map.x_label)
        );
    }
    let cy = TOP + 10.0 + side / 2.0;
    let _ = write!(
        svg,
        r#"<text class="y-label" x="20" y="{cy}" text-anchor="middle" transform="rotate(-90 20 {cy})">{}</text>"#,
        escape(&map.y_label)
    );
    // colour bar in decades
    let bx0 = WIDTH - RIGHT - bar + 10.0;
    let steps = 50;
    for s in 0..steps {
        let t = s as f64 / steps as f64;
        let _ = write!(
            svg,
            r#"<rect x="{bx0}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            TOP + 10.0 + side * (1.0 - t - 1.0 / steps as f64),
            side / steps as f64 + 0.05,
            ramp(t + 0.5 / steps as f64)
        );
    }
    let decades = (hi - lo) as i32;
    let every = (decades as f64 / 8.0).ceil().max(1.0) as i32;
    for e in (0..=decades).step_by(every as usize) {
        let y = TOP + 10.0 + side * (1.0 - e as f64 / (hi - lo));
        let _ = write!(svg, r#"<text x="{}" y="{:.2}">1e{}</text>"#, bx0 + 18.0, y + 4.0, lo as i32 + e);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.filter(|v| v.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn bin(sorted: &[f64], v: f64, bins: usize) -> usize {
    let i = sorted.partition_point(|&s| s < v).min(sorted.len() - 1);
    i * bins / sorted.len()
}

/// Column choices for `az plot` when none are given.
pub fn guess_axes(frame: &Frame) -> Result<(String, String)> {
    let pick = |names: &[&str]| names.iter().find(|n| frame.has(n)).map(|n| n.to_string());
    let x = pick(&["N", "index", "sqrtN", "s_x"]);
    let y = pick(&["error_L2", "wall_time_s", "sigma", "error", "residual"]);
    match (x, y) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => bail!("cannot pick axes from columns {}; pass --x and --y", frame.columns.join(", ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(series: Vec<Series>) -> LineChart {
        LineChart {
            title: "t".into(),
            x_label: "N".into(),
            y_label: "error".into(),
            log_x: true,
            log_y: true,
            series,
            guides: vec![(-2.0, "N^-2".into())],
            markers: vec![],
        }
    }

    #[test]
    fn guide_starts_at_first_point() {
        let s = Series { name: "a".into(), points: vec![(10.0, 1e-2), (100.0, 1e-4)] };
        let svg = render_lines(&chart(vec![s])).unwrap();
        let circle = svg.split("<circle").nth(1).unwrap();
        let cx = attr(circle, "cx");
        let cy = attr(circle, "cy");
        let guide = svg.split(r#"class="guide""#).nth(1).unwrap();
        assert_eq!(attr(guide, "x1"), cx);
        assert_eq!(attr(guide, "y1"), cy);
        // the data follow N^-2 exactly, so the guide ends on the last point
        let last = svg.split("<circle").nth(2).unwrap();
        assert_eq!(attr(guide, "y2"), attr(last, "cy"));
    }

    fn attr(s: &str, name: &str) -> String {
        let key = format!(r#"{name}=""#);
        let start = s.find(&key).unwrap() + key.len();
        s[start..].split('"').next().unwrap().to_string()
    }

    #[test]
    fn log_axis_skips_nonpositive() {
        let s = Series { name: "a".into(), points: vec![(1.0, 0.0), (2.0, 1e-3)] };
        let svg = render_lines(&chart(vec![s])).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn ticks_are_decades() {
        let a = Axis::new(true, [3e-7, 2e-2].into_iter(), 0.0, 1.0).unwrap();
        let t: Vec<String> = a.ticks().into_iter().map(|t| t.1).collect();
        assert_eq!(t.first().unwrap(), "1e-7");
        assert_eq!(t.last().unwrap(), "1e-1");
    }

    #[test]
    fn heatmap_pools_to_cap() {
        let cells: Vec<_> = (0..300)
            .flat_map(|i| (0..7).map(move |j| ("e".to_string(), i as f64, j as f64, 1e-3 + i as f64)))
            .collect();
        let svg = render_heatmap(&Heatmap { title: "h".into(), x_label: "x".into(), y_label: "y".into(), cells }).unwrap();
        let panel = svg.split(r#"<g class="panel">"#).nth(1).unwrap().split("</g>").next().unwrap();
        assert_eq!(panel.matches("<rect").count(), HEAT_CELLS * 7 + 1);
    }

    #[test]
    fn escapes_text() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
