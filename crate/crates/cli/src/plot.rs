//! Minimal SVG figures of 2D set outlines.

use std::fmt::Write as _;

use mzreach::volume::polygon_2d;
use mzreach::{Result, Zonotope};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = ["#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];

/// One legend entry: a label and the outlines drawn in its color.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub outlines: Vec<Vec<[f64; 2]>>,
    pub dashed: bool,
}

impl Series {
    pub fn from_zonotopes<'a>(
        label: &str,
        sets: impl IntoIterator<Item = &'a Zonotope>,
        dims: (usize, usize),
    ) -> Result<Series> {
        Ok(Series {
            label: label.to_string(),
            outlines: sets.into_iter().map(|z| polygon_2d(z, dims)).collect::<Result<_>>()?,
            dashed: false,
        })
    }
}

fn bounds(series: &[Series]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in series.iter().flat_map(|s| &s.outlines).flatten() {
        b[0] = b[0].min(p[0]);
        b[1] = b[1].min(p[1]);
        b[2] = b[2].max(p[0]);
        b[3] = b[3].max(p[1]);
    }
    if !b[0].is_finite() {
        return [0.0, 0.0, 1.0, 1.0];
    }
    // pad degenerate extents
    for (lo, hi) in [(0, 2), (1, 3)] {
        if b[hi] - b[lo] < 1e-12 {
            b[lo] -= 0.5;
            b[hi] += 0.5;
        }
    }
    b
}

/// Renders the series with the given axis labels. Output depends only on the input.
pub fn render_svg(title: &str, axes: (&str, &str), series: &[Series]) -> String {
    let [x0, y0, x1, y1] = bounds(series);
    let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
    let map = |p: &[f64; 2]| (MARGIN + (p[0] - x0) * sx, HEIGHT - MARGIN - (p[1] - y0) * sy);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{:.1}" height="{:.1}" fill="none" stroke="#888888"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{} [{x0:.3}, {x1:.3}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(axes.0)
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">{} [{y0:.3}, {y1:.3}]</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(axes.1)
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let dash = if s.dashed { r#" stroke-dasharray="4 3""# } else { "" };
        for outline in &s.outlines {
            let points: Vec<String> = outline
                .iter()
                .map(|p| {
                    let (x, y) = map(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="1.2"{dash}/>"#,
                points.join(" ")
            );
        }
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/>"#,
            WIDTH - MARGIN - 150.0,
            WIDTH - MARGIN - 130.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"#,
            WIDTH - MARGIN - 124.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
