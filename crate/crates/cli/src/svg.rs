//! Static SVG line charts. Output depends only on the series and the spec, so
//! identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::series::Series;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: f64,
    pub height: f64,
}

impl PlotSpec {
    pub fn for_series(series: &Series) -> Self {
        Self {
            title: series.name.clone(),
            x_label: "t".into(),
            y_label: "value".into(),
            width: 720.0,
            height: 440.0,
        }
    }
}

const LEFT: f64 = 72.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Range padded so that a constant series still has a finite span.
fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
        let half = (0.5 * lo.abs()).max(0.5);
        (lo - half, hi + half)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

/// Tick step from {1, 2, 5} × 10^k giving roughly `target` intervals.
fn tick_step(lo: f64, hi: f64, target: f64) -> f64 {
    let raw = (hi - lo) / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let step = tick_step(lo, hi, 5.0);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn tick_label(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // avoid "-0" and "-0.00"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Renders the chart. Non-finite samples are skipped.
pub fn render_svg(series: &Series, spec: &PlotSpec) -> Result<String> {
    if series.is_empty() {
        return Err(CliError::Config(format!("series `{}` is empty; nothing to plot", series.name)));
    }
    let finite = |v: &&f64| v.is_finite();
    let (t_lo, t_hi) = series.t.iter().filter(finite).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (y_lo, y_hi) = series.values.iter().flatten().filter(finite).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(t_lo.is_finite() && y_lo.is_finite()) {
        return Err(CliError::Config(format!("series `{}` has no finite samples", series.name)));
    }
    let (x0, x1) = if t_hi > t_lo { (t_lo, t_hi) } else { padded_range(t_lo, t_hi) };
    let (y0, y1) = padded_range(y_lo, y_hi);

    let (w, h) = (spec.width, spec.height);
    let plot_w = w - LEFT - RIGHT;
    let plot_h = h - TOP - BOTTOM;
    let px = |t: f64| LEFT + (t - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + plot_w / 2.0, escape(&spec.title));

    // axes
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1" fill="none">"#);
    let _ = writeln!(s, r#"<line x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, TOP + plot_h, LEFT + plot_w, TOP + plot_h);
    let _ = writeln!(s, r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}"/>"#, TOP + plot_h);
    let _ = writeln!(s, "</g>");

    let (xt, xd) = ticks(x0, x1);
    let (yt, yd) = ticks(y0, y1);
    let _ = writeln!(s, r##"<g stroke="#cccccc" stroke-width="0.5">"##);
    for &t in &xt {
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{TOP:.2}" x2="{:.2}" y2="{:.2}"/>"#, px(t), px(t), TOP + plot_h);
    }
    for &y in &yt {
        let _ = writeln!(s, r#"<line x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, py(y), LEFT + plot_w, py(y));
    }
    let _ = writeln!(s, "</g>");
    for &t in &xt {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, px(t), TOP + plot_h + 18.0, tick_label(t, xd));
    }
    for &y in &yt {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py(y) + 4.0, tick_label(y, yd));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + plot_w / 2.0, h - 14.0, escape(&spec.x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&spec.y_label)
    );

    for (k, (name, col)) in series.columns.iter().zip(&series.values).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for (&t, &y) in series.t.iter().zip(col) {
            if t.is_finite() && y.is_finite() {
                if !points.is_empty() {
                    points.push(' ');
                }
                let _ = write!(points, "{:.2},{:.2}", px(t), py(y));
            }
        }
        let _ = writeln!(s, r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#, escape(name));
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w + 14.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 22.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 28.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(series: &Series, spec: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_svg(series, spec)?;
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}

/// Points of every polyline, keyed by the `data-series` attribute.
pub fn polylines(svg: &str) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out = Vec::new();
    for line in svg.lines().filter(|l| l.starts_with("<polyline")) {
        let attr = |key: &str| {
            let start = line.find(&format!("{key}=\""))? + key.len() + 2;
            let end = line[start..].find('"')? + start;
            Some(line[start..end].to_string())
        };
        let name = attr("data-series").unwrap_or_default();
        let pts = attr("points")
            .unwrap_or_default()
            .split_whitespace()
            .filter_map(|p| {
                let (x, y) = p.split_once(',')?;
                Some((x.parse().ok()?, y.parse().ok()?))
            })
            .collect();
        out.push((name, pts));
    }
    out
}
