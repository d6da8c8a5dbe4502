//! SVG coverage heatmaps.

use std::fmt::Write as _;

use agpf_core::fading::{illumination, FadingModel, FadingSpec, IntensityAssignment};
use agpf_core::geom::{Point, PolygonWithHoles};
use agpf_core::visibility::{visibility_polygons, VisibilityPolygon};
use agpf_core::Point64;

/// Colour for sample points below 1.
pub const UNDERLIT: &str = "#f2c418";

/// Illumination sampled at pixel centres; `None` outside the polygon.
#[derive(Clone, Debug)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<Option<f64>>,
    origin: Point64,
    step: f64,
}

impl Grid {
    pub fn pixel_center(&self, col: usize, row: usize) -> Point64 {
        // Row 0 is the top of the image.
        Point::new(
            self.origin.x + (col as f64 + 0.5) * self.step,
            self.origin.y + (self.height as f64 - row as f64 - 0.5) * self.step,
        )
    }

    pub fn value(&self, col: usize, row: usize) -> Option<f64> {
        self.values[row * self.width + col]
    }
}

pub fn sample_grid(
    poly: &PolygonWithHoles<f64>,
    guards: &[Point64],
    x: &IntensityAssignment,
    fading: &FadingSpec,
    size: usize,
) -> Grid {
    let b = poly.bbox();
    let span = (b[1] - b[0]).max(b[3] - b[2]).max(1e-12);
    let step = span / size as f64;
    let width = (((b[1] - b[0]) / step).ceil() as usize).clamp(1, size);
    let height = (((b[3] - b[2]) / step).ceil() as usize).clamp(1, size);
    let vis: Vec<VisibilityPolygon<f64>> = visibility_polygons(poly, guards).unwrap_or_default();
    let model = FadingModel::Rho(*fading);
    let mut grid = Grid { width, height, values: Vec::with_capacity(width * height), origin: Point::new(b[0], b[2]), step };
    for row in 0..height {
        for col in 0..width {
            let p = grid.pixel_center(col, row);
            let v = if poly.contains(&p) {
                Some(illumination(&p, guards, x, |g, q| vis.get(g).is_some_and(|v| v.contains(q)), &model))
            } else {
                None
            };
            grid.values.push(v);
        }
    }
    grid
}

/// Darkest blue at exactly 1, fading towards pale blue at `max`; values
/// below 1 get the warning colour.
pub fn color_for(value: f64, max: f64) -> String {
    if value < 1.0 - 1e-9 {
        return UNDERLIT.to_string();
    }
    let t = if max > 1.0 { ((value.ln()) / max.ln()).clamp(0.0, 1.0) } else { 0.0 };
    // Quantised so neighbouring pixels merge into runs.
    let t = (t * 24.0).round() / 24.0;
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(8.0, 210.0), lerp(29.0, 228.0), lerp(88.0, 250.0))
}

pub fn render_svg(
    poly: &PolygonWithHoles<f64>,
    guards: &[Point64],
    x: &IntensityAssignment,
    fading: &FadingSpec,
    size: usize,
) -> String {
    let grid = sample_grid(poly, guards, x, fading, size);
    let max = grid.values.iter().flatten().fold(1.0f64, |a, &b| a.max(b));
    let (w, h) = (grid.width, grid.height);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
    );
    for row in 0..h {
        let mut col = 0;
        while col < w {
            let Some(v) = grid.value(col, row) else {
                col += 1;
                continue;
            };
            let c = color_for(v, max);
            let mut end = col + 1;
            while end < w && grid.value(end, row).is_some_and(|u| color_for(u, max) == c) {
                end += 1;
            }
            let _ = writeln!(s, r#"<rect x="{col}" y="{row}" width="{}" height="1" fill="{c}"/>"#, end - col);
            col = end;
        }
    }
    let to_px = |p: &Point64| {
        ((p.x - grid.origin.x) / grid.step, h as f64 - (p.y - grid.origin.y) / grid.step)
    };
    for cycle in poly.cycles() {
        let pts: Vec<String> = cycle.iter().map(|p| {
            let (a, b) = to_px(p);
            format!("{a:.2},{b:.2}")
        }).collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1"/>"#, pts.join(" "));
    }
    let xmax = x.values().iter().cloned().fold(0.0f64, f64::max);
    for (g, &v) in guards.iter().zip(x.values()) {
        let (a, b) = to_px(g);
        let r = if v > 0.0 && xmax > 0.0 { 3.0 + 7.0 * (v / xmax).sqrt() } else { 2.0 };
        let fill = if v > 0.0 { "#d62728" } else { "#777777" };
        let _ = writeln!(s, r#"<circle cx="{a:.2}" cy="{b:.2}" r="{r:.2}" fill="{fill}" stroke="white" stroke-width="0.5"/>"#);
        if v > 0.0 {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10" font-family="sans-serif">{v:.3}</text>"#, a + r + 1.0, b - r);
        }
    }
    s.push_str("</svg>\n");
    s
}
