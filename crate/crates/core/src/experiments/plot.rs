//! Self-contained SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use super::runner::ResultRow;
use crate::error::{invalid, Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Which error column of a table to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MseColumn {
    L2,
    Sobolev,
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

/// Draws MSE against iteration, one series per algorithm, on a log10 axis
/// in decibels.
pub fn emit_plot(table: &[ResultRow], column: MseColumn, path: &Path) -> Result<()> {
    if table.is_empty() {
        return Err(invalid("cannot plot an empty table"));
    }
    let mut series: Vec<Series> = Vec::new();
    for r in table {
        let v = match column {
            MseColumn::L2 => r.mse_l2,
            MseColumn::Sobolev => r.mse_sobolev,
        };
        let p = (r.iter as f64, v);
        match series.iter_mut().find(|s| s.name == r.algorithm) {
            Some(s) => s.points.push(p),
            None => series.push(Series { name: r.algorithm.clone(), points: vec![p] }),
        }
    }
    let title = format!(
        "{}: {} MSE",
        table[0].scenario,
        match column {
            MseColumn::L2 => "L2",
            MseColumn::Sobolev => "Sobolev",
        }
    );
    write(path, &render(&title, "iteration", "MSE (dB)", &series, true))
}

/// Draws waveforms `(name, [(t, value)])` on linear axes.
pub fn emit_waveform_plot(title: &str, curves: &[(String, Vec<(f64, f64)>)], path: &Path) -> Result<()> {
    if curves.is_empty() || curves.iter().all(|(_, p)| p.is_empty()) {
        return Err(invalid("cannot plot without curves"));
    }
    let series: Vec<Series> = curves.iter().map(|(n, p)| Series { name: n.clone(), points: p.clone() }).collect();
    write(path, &render(title, "t", "amplitude", &series, false))
}

fn write(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn render(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_y: bool) -> String {
    let floor = 1e-300;
    let map_y = |v: f64| if log_y { 10.0 * v.max(floor).log10() } else { v };
    let pts = || series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts() {
        let y = map_y(y);
        if x.is_finite() && y.is_finite() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if !(x1 > x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if !(y1 > y0) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let (y0, y1) = nice_range(y0, y1);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));
    for i in 0..=5 {
        let y = y0 + (y1 - y0) * i as f64 / 5.0;
        let py = sy(y);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.1}" y1="{py:.2}" x2="{:.1}" y2="{py:.2}" stroke="#ddd"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            tick(y)
        );
        let x = x0 + (x1 - x0) * i as f64 / 5.0;
        let px = sx(x);
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            tick(x)
        );
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(ylabel)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && map_y(*y).is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(map_y(y))))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let step = 10f64.powf(span.log10().floor());
    ((lo / step).floor() * step, (hi / step).ceil() * step)
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        let t = format!("{v:.2}");
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
