//! Self-contained SVG output for experiment tables.

use std::fmt::Write as _;
use std::path::Path;

use super::{summarize, ExperimentRecord, SummaryRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Mean iterations over the `(rho1, rho2)` grid, one panel per horizon.
    Heatmap,
    /// Median and 98th percentile of iterations against `epsilon` or `n`.
    Band,
}

pub fn emit_plot(records: &[ExperimentRecord], kind: PlotKind, out: impl AsRef<Path>) -> Result<()> {
    let rows = summarize(records);
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let svg = match kind {
        PlotKind::Heatmap => render_heatmaps(&rows),
        PlotKind::Band => render_band(&rows),
    };
    std::fs::write(out, svg)?;
    Ok(())
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Blue to yellow ramp, `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 4] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn tick_label(v: f64) -> String {
    if (1.0..1e4).contains(&v) && v.fract() == 0.0 {
        format!("{v}")
    } else {
        format!("{v:.0e}")
    }
}

/// Cells are placed by grid index, which is a log scale for log-spaced
/// grids.
pub fn render_heatmaps(rows: &[SummaryRow]) -> String {
    let horizons: Vec<usize> = {
        let mut h: Vec<usize> = rows.iter().map(|r| r.n).collect();
        h.sort_unstable();
        h.dedup();
        h
    };
    let r1 = distinct(rows.iter().map(|r| r.rho1));
    let r2 = distinct(rows.iter().map(|r| r.rho2));
    let cell = 22.0;
    let (left, top, gap) = (60.0, 40.0, 50.0);
    let panel_w = cell * r1.len() as f64;
    let panel_h = cell * r2.len() as f64;
    let width = left + horizons.len() as f64 * (panel_w + gap);
    let height = top + panel_h + 60.0;
    let mut s = svg_open(width, height);

    for (p, &n) in horizons.iter().enumerate() {
        let x0 = left + p as f64 * (panel_w + gap);
        let panel: Vec<&SummaryRow> = rows.iter().filter(|r| r.n == n).collect();
        let logs: Vec<f64> = panel.iter().map(|r| r.iterations.mean.max(1.0).ln()).collect();
        let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">N = {n}</text>", x0 + panel_w / 2.0, top - 12.0);
        for (row, l) in panel.iter().zip(&logs) {
            let i = r1.iter().position(|&v| v == row.rho1).unwrap();
            let j = r2.iter().position(|&v| v == row.rho2).unwrap();
            let t = if hi > lo { (l - lo) / (hi - lo) } else { 0.0 };
            let _ = writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\">\
                 <title>rho1={:.3e} rho2={:.3e} mean={:.1}</title></rect>",
                x0 + i as f64 * cell,
                top + panel_h - (j + 1) as f64 * cell,
                ramp(t),
                row.rho1,
                row.rho2,
                row.iterations.mean
            );
        }
        for (i, v) in r1.iter().enumerate() {
            if v.log10().fract().abs() < 1e-9 {
                let _ = writeln!(
                    s,
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
                    x0 + (i as f64 + 0.5) * cell,
                    top + panel_h + 14.0,
                    tick_label(*v)
                );
            }
        }
        for (j, v) in r2.iter().enumerate() {
            if v.log10().fract().abs() < 1e-9 {
                let _ = writeln!(
                    s,
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
                    x0 - 4.0,
                    top + panel_h - (j as f64 + 0.5) * cell + 4.0,
                    tick_label(*v)
                );
            }
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">rho1</text>",
            x0 + panel_w / 2.0,
            top + panel_h + 32.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{:.1}\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">rho2</text>",
        top + panel_h / 2.0,
        top + panel_h / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Against `epsilon` on a log axis when it varies, otherwise against `n`
/// on a linear axis. Iterations are always on a log axis.
pub fn render_band(rows: &[SummaryRow]) -> String {
    let by_eps = distinct(rows.iter().map(|r| r.epsilon)).len() > 1;
    let mut pts: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| {
            let x = if by_eps { r.epsilon } else { r.n as f64 };
            (x, r.iterations.median.max(1.0), r.iterations.p98.max(1.0))
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (w, h, left, bottom, top, right) = (560.0, 380.0, 60.0, 50.0, 20.0, 20.0);
    let fx = |x: f64| if by_eps { x.log10() } else { x };
    let xs: Vec<f64> = pts.iter().map(|p| fx(p.0)).collect();
    let (xlo, xhi) = (xs[0], xs[xs.len() - 1]);
    let ylo = pts.iter().map(|p| p.1.log10()).fold(f64::INFINITY, f64::min).floor();
    let yhi = pts.iter().map(|p| p.2.log10()).fold(f64::NEG_INFINITY, f64::max).ceil().max(ylo + 1.0);
    let px = |x: f64| {
        let span = if xhi > xlo { xhi - xlo } else { 1.0 };
        left + (fx(x) - xlo) / span * (w - left - right)
    };
    let py = |y: f64| top + (yhi - y.log10()) / (yhi - ylo) * (h - top - bottom);

    let mut s = svg_open(w, h);
    let _ = writeln!(
        s,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        w - left - right,
        h - top - bottom
    );
    let mut e = ylo as i32;
    while e as f64 <= yhi {
        let y = py(10f64.powi(e));
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{e}</text>", left - 4.0, y + 4.0);
        e += 1;
    }
    for p in &pts {
        let label = if by_eps { format!("{:.0e}", p.0) } else { format!("{}", p.0) };
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"9\">{label}</text>",
            px(p.0),
            h - bottom + 14.0
        );
    }

    let upper: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", px(p.0), py(p.2))).collect();
    let lower: Vec<String> = pts.iter().rev().map(|p| format!("{:.1},{:.1}", px(p.0), py(p.1))).collect();
    let _ = writeln!(s, "<polygon points=\"{} {}\" fill=\"#9ecae1\" fill-opacity=\"0.4\"/>", upper.join(" "), lower.join(" "));
    let line = |sel: fn(&(f64, f64, f64)) -> f64| -> String {
        pts.iter().map(|p| format!("{:.1},{:.1}", px(p.0), py(sel(p)))).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>", line(|p| p.1));
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#de2d26\" stroke-width=\"2\" stroke-dasharray=\"5,3\"/>",
        line(|p| p.2)
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        left + (w - left - right) / 2.0,
        h - 12.0,
        if by_eps { "epsilon" } else { "N" }
    );
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"#08519c\">median</text>", left + 8.0, top + 14.0);
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"#de2d26\">p98</text>", left + 8.0, top + 28.0);
    s.push_str("</svg>\n");
    s
}
