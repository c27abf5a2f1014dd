//! Standalone 800×800 SVG figures: curves, quiver plots and contour lines.
//! Output bytes depend only on the inputs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::field::PlaneVectorField;
use crate::firstintegral::{FirstIntegralGrid, Rect};
use crate::Point;

pub const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Figure {
    bounds: Rect,
    title: String,
    body: String,
}

impl Figure {
    /// Data rectangle is widened to a square so circles stay round.
    pub fn new(bounds: Rect, title: impl Into<String>) -> Self {
        let cx = 0.5 * (bounds.x0 + bounds.x1);
        let cy = 0.5 * (bounds.y0 + bounds.y1);
        let half = 0.5 * (bounds.x1 - bounds.x0).max(bounds.y1 - bounds.y0);
        Figure {
            bounds: Rect {
                x0: cx - half,
                x1: cx + half,
                y0: cy - half,
                y1: cy + half,
            },
            title: title.into(),
            body: String::new(),
        }
    }

    /// Bounding box of `points` plus a 5% margin.
    pub fn fitted<'a>(points: impl IntoIterator<Item = &'a Point>, title: impl Into<String>) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            if p.x.is_finite() && p.y.is_finite() {
                x0 = x0.min(p.x);
                x1 = x1.max(p.x);
                y0 = y0.min(p.y);
                y1 = y1.max(p.y);
            }
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
        Self::new(
            Rect {
                x0: x0 - pad,
                x1: x1 + pad,
                y0: y0 - pad,
                y1: y1 + pad,
            },
            title,
        )
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    fn scale(&self) -> f64 {
        (SIZE - 2.0 * MARGIN) / (self.bounds.x1 - self.bounds.x0)
    }

    /// Data coordinates to pixels; y grows upwards in data space.
    pub fn to_px(&self, p: Point) -> (f64, f64) {
        let s = self.scale();
        (
            MARGIN + (p.x - self.bounds.x0) * s,
            SIZE - MARGIN - (p.y - self.bounds.y0) * s,
        )
    }

    pub fn polyline(&mut self, points: &[Point], color: &str, closed: bool) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for (k, p) in points.iter().enumerate() {
            let (x, y) = self.to_px(*p);
            let _ = write!(d, "{}{x:.3} {y:.3}", if k == 0 { "M" } else { " L" });
        }
        if closed {
            d.push_str(" Z");
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
    }

    /// Arrow from `at` to `at + v` in data coordinates.
    pub fn arrow(&mut self, at: Point, v: Point, color: &str) {
        let (x0, y0) = self.to_px(at);
        let (x1, y1) = self.to_px(at + v);
        let (dx, dy) = (x1 - x0, y1 - y0);
        let len = dx.hypot(dy);
        if len < 1e-9 {
            return;
        }
        let (ux, uy) = (dx / len, dy / len);
        let head = (0.3 * len).min(8.0);
        let (hx1, hy1) = (x1 - head * (ux - 0.5 * uy), y1 - head * (uy + 0.5 * ux));
        let (hx2, hy2) = (x1 - head * (ux + 0.5 * uy), y1 - head * (uy - 0.5 * ux));
        let _ = writeln!(
            self.body,
            r#"<path d="M{x0:.3} {y0:.3} L{x1:.3} {y1:.3} M{hx1:.3} {hy1:.3} L{x1:.3} {y1:.3} L{hx2:.3} {hy2:.3}" fill="none" stroke="{color}" stroke-width="1"/>"#
        );
    }

    fn segment(&mut self, a: Point, b: Point, color: &str) {
        let (x0, y0) = self.to_px(a);
        let (x1, y1) = self.to_px(b);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" stroke="{color}" stroke-width="1"/>"#
        );
    }

    fn axes(&self) -> String {
        let mut s = String::new();
        let b = self.bounds;
        let (left, top) = self.to_px(Point::new(b.x0, b.y1));
        let (right, bottom) = self.to_px(Point::new(b.x1, b.y0));
        let _ = writeln!(
            s,
            r##"<rect x="{left:.3}" y="{top:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#888"/>"##,
            right - left,
            bottom - top
        );
        if b.y0 <= 0.0 && 0.0 <= b.y1 {
            let (_, y) = self.to_px(Point::new(0.0, 0.0));
            let _ = writeln!(
                s,
                r##"<line x1="{left:.3}" y1="{y:.3}" x2="{right:.3}" y2="{y:.3}" stroke="#bbb"/>"##
            );
        }
        if b.x0 <= 0.0 && 0.0 <= b.x1 {
            let (x, _) = self.to_px(Point::new(0.0, 0.0));
            let _ = writeln!(
                s,
                r##"<line x1="{x:.3}" y1="{top:.3}" x2="{x:.3}" y2="{bottom:.3}" stroke="#bbb"/>"##
            );
        }
        let label = |v: f64| format!("{v:.3}");
        let _ = writeln!(
            s,
            r#"<text x="{left:.3}" y="{:.3}" font-size="12" font-family="monospace">{}</text>"#,
            bottom + 16.0,
            label(b.x0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{right:.3}" y="{:.3}" font-size="12" font-family="monospace" text-anchor="end">{}</text>"#,
            bottom + 16.0,
            label(b.x1)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{bottom:.3}" font-size="12" font-family="monospace" text-anchor="end">{}</text>"#,
            left - 4.0,
            label(b.y0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" font-family="monospace" text-anchor="end">{}</text>"#,
            left - 4.0,
            top + 12.0,
            label(b.y1)
        );
        s
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        s.push_str(&self.axes());
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="24" font-size="14" font-family="monospace" text-anchor="middle">{}</text>"#,
            SIZE / 2.0,
            escape(&self.title)
        );
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_svg())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One closed polyline per sampled curve.
pub fn curve_figure(curves: &[Vec<Point>], title: &str) -> Figure {
    let mut fig = Figure::fitted(curves.iter().flatten(), title);
    for (k, c) in curves.iter().enumerate() {
        fig.polyline(c, PALETTE[k % PALETTE.len()], true);
    }
    fig
}

/// Normalized arrows of `field` on an `n × n` grid over `domain`.
/// Points where the field fails to evaluate or vanishes are skipped.
pub fn quiver_figure(field: &PlaneVectorField, domain: Rect, n: usize, title: &str) -> Figure {
    let mut fig = Figure::new(domain, title);
    let n = n.max(2);
    let cell = (domain.x1 - domain.x0).min(domain.y1 - domain.y0) / n as f64;
    for j in 0..n {
        for i in 0..n {
            let p = Point::new(
                domain.x0 + (i as f64 + 0.5) * (domain.x1 - domain.x0) / n as f64,
                domain.y0 + (j as f64 + 0.5) * (domain.y1 - domain.y0) / n as f64,
            );
            if let Ok(v) = field.eval(p) {
                let norm = v.norm();
                if norm > 0.0 {
                    let v = v * (0.8 * cell / norm);
                    fig.arrow(p - 0.5 * v, v, PALETTE[0]);
                }
            }
        }
    }
    fig
}

/// Marching-squares contour lines at `levels` evenly spaced interior values.
pub fn contour_figure(grid: &FirstIntegralGrid, levels: usize, title: &str) -> Figure {
    let mut fig = Figure::new(grid.domain, title);
    let lo = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return fig;
    }
    for k in 1..=levels {
        let c = lo + (hi - lo) * k as f64 / (levels + 1) as f64;
        let color = PALETTE[(k - 1) % PALETTE.len()];
        for (a, b) in contour_segments(grid, c) {
            fig.segment(a, b, color);
        }
    }
    fig
}

/// Segments of the level set `h = c`, cell by cell.
pub fn contour_segments(grid: &FirstIntegralGrid, c: f64) -> Vec<(Point, Point)> {
    let mut out = Vec::new();
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let vals = corners.map(|(a, b)| grid.value(a, b) - c);
            let pts = corners.map(|(a, b)| grid.node(a, b));
            let mut cuts = Vec::with_capacity(4);
            for e in 0..4 {
                let (v0, v1) = (vals[e], vals[(e + 1) % 4]);
                if (v0 < 0.0) != (v1 < 0.0) {
                    let s = v0 / (v0 - v1);
                    cuts.push(pts[e] + s * (pts[(e + 1) % 4] - pts[e]));
                }
            }
            match cuts.len() {
                2 => out.push((cuts[0], cuts[1])),
                4 => {
                    // saddle: pair cuts by the sign at the cell centre
                    let centre = vals.iter().sum::<f64>() / 4.0;
                    if (centre < 0.0) == (vals[0] < 0.0) {
                        out.push((cuts[0], cuts[1]));
                        out.push((cuts[2], cuts[3]));
                    } else {
                        out.push((cuts[0], cuts[3]));
                        out.push((cuts[1], cuts[2]));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Writes `fig` to `path`.
pub fn emit_svg(fig: &Figure, path: &Path) -> Result<(), std::io::Error> {
    fig.write(path)
}

/// Samples `n` points of a closed curve, skipping nothing: any failure is returned.
pub fn sample_closed(curve: &crate::geometry::ParamCurve, n: usize) -> Result<Vec<Point>> {
    (0..n)
        .map(|k| curve.eval(std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}
