//! Minimal SVG rendering of sweep CSVs.
//!
//! Line plots draw one polyline per `(series, scheme)` pair; heatmaps color
//! a grid over `(value, value2)`. Only successful rows are drawn.

use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use crate::sweep::{Row, STATUS_OK, STATUS_TRACE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PlotStyle {
    /// Heatmap when the rows carry a second axis, lines otherwise.
    Auto,
    Lines,
    Heatmap,
}

/// Quantity on the vertical axis (or the color scale).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PlotField {
    Throughput,
    M,
    N,
}

impl PlotField {
    fn get(self, r: &Row) -> Option<f64> {
        match self {
            PlotField::Throughput => r.throughput_bits,
            PlotField::M => r.m.map(|v| v as f64),
            PlotField::N => r.n.map(|v| v as f64),
        }
    }

    fn label(self) -> &'static str {
        match self {
            PlotField::Throughput => "throughput (bits/block)",
            PlotField::M => "backscatter subframes M",
            PlotField::N => "relay subframes N",
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if lo == hi {
                let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
                (lo - pad, hi + pad)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = span(&mut xs.clone());
        let (y0, y1) = span(&mut ys.clone());
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn header(svg: &mut String) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn axes(svg: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r) = (MARGIN_L, WIDTH - MARGIN_R);
    let (t, b) = (MARGIN_T, HEIGHT - MARGIN_B);
    let _ = writeln!(svg, r#"<path d="M{l} {t} V{b} H{r}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let fx = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let fy = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let (x, y) = (f.px(fx), f.py(fy));
        let _ = writeln!(svg, r#"<line x1="{x:.1}" y1="{b}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, b + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, b + 18.0, tick(fx));
        let _ = writeln!(svg, r#"<line x1="{:.1}" y1="{y:.1}" x2="{l}" y2="{y:.1}" stroke="black"/>"#, l - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, l - 8.0, y + 4.0, tick(fy));
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 10.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (t + b) / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{:.2}", v)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn lines(rows: &[Row], field: PlotField) -> Result<String> {
    let trace = rows.iter().any(|r| r.status == STATUS_TRACE);
    let wanted = if trace { STATUS_TRACE } else { STATUS_OK };
    let mut curves: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows.iter().filter(|r| r.status == wanted) {
        let x = if trace { r.iterations as f64 } else { r.value };
        let Some(y) = field.get(r) else { continue };
        let key = if trace {
            format!("{} {}={}", r.series, r.param, r.value).trim().to_string()
        } else {
            format!("{} {}", r.series, r.scheme).trim().to_string()
        };
        if !curves.contains_key(&key) {
            order.push(key.clone());
        }
        curves.entry(key).or_default().push((x, y));
    }
    if curves.is_empty() {
        bail!("no plottable rows");
    }
    let pts = || curves.values().flatten();
    let frame = Frame::new(pts().map(|p| p.0), pts().map(|p| p.1));
    let xlabel = if trace { "SCA iteration" } else { rows[0].param.as_str() };
    let mut svg = String::new();
    header(&mut svg);
    axes(&mut svg, &frame, xlabel, field.label());
    for (i, key) in order.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts = &curves[key];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                frame.px(x),
                frame.py(y)
            );
        }
        let ly = MARGIN_T + 16.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(svg, r#"<rect x="{lx}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, ly - 9.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 14.0, escape(key));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn heat_color(t: f64) -> String {
    // Dark blue to yellow.
    let t = t.clamp(0.0, 1.0);
    let r = (68.0 + t * (253.0 - 68.0)) as u8;
    let g = (1.0 + t * (231.0 - 1.0)) as u8;
    let b = (84.0 + t * (37.0 - 84.0)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn heatmap(rows: &[Row], field: PlotField) -> Result<String> {
    let first_series = rows.first().map(|r| r.series.clone()).unwrap_or_default();
    let cells: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.status == STATUS_OK && r.series == first_series)
        .filter_map(|r| Some((r.value, r.value2?, field.get(r)?)))
        .collect();
    if cells.is_empty() {
        bail!("no plottable rows with a second axis");
    }
    let mut xs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let mut ys: Vec<f64> = cells.iter().map(|c| c.1).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let half = |v: &[f64]| if v.len() > 1 { (v[1] - v[0]) / 2.0 } else { 0.5 };
    let (hx, hy) = (half(&xs), half(&ys));
    let frame = Frame {
        x0: xs[0] - hx,
        x1: xs[xs.len() - 1] + hx,
        y0: ys[0] - hy,
        y1: ys[ys.len() - 1] + hy,
    };
    let (zlo, zhi) = cells
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(c.2), b.max(c.2)));
    let zspan = if zhi > zlo { zhi - zlo } else { 1.0 };
    let mut svg = String::new();
    header(&mut svg);
    for &(x, y, z) in &cells {
        let (xa, xb) = (frame.px(x - hx), frame.px(x + hx));
        let (ya, yb) = (frame.py(y + hy), frame.py(y - hy));
        let _ = writeln!(
            svg,
            r#"<rect x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{z}</title></rect>"#,
            xb - xa,
            yb - ya,
            heat_color((z - zlo) / zspan)
        );
    }
    axes(&mut svg, &frame, &rows[0].param, &rows[0].param2);
    let lx = WIDTH - MARGIN_R + 20.0;
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let y = HEIGHT - MARGIN_B - t * (HEIGHT - MARGIN_T - MARGIN_B - 20.0);
        let _ = writeln!(svg, r#"<rect x="{lx}" y="{:.1}" width="16" height="{:.1}" fill="{}"/>"#, y - 30.0, 30.0, heat_color(t));
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 20.0, HEIGHT - MARGIN_B - 8.0, tick(zlo));
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 20.0, MARGIN_T + 8.0, tick(zhi));
    let _ = writeln!(svg, r#"<text x="{lx}" y="{:.1}">{}</text>"#, MARGIN_T - 12.0, escape(field.label()));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders rows as an SVG document.
pub fn emit_plot(rows: &[Row], style: PlotStyle, field: PlotField) -> Result<String> {
    let has_second = rows.iter().any(|r| r.value2.is_some());
    match style {
        PlotStyle::Heatmap => heatmap(rows, field),
        PlotStyle::Auto if has_second => heatmap(rows, field),
        _ => lines(rows, field),
    }
}
