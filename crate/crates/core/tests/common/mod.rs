#![allow(dead_code)]

use agpf_core::geom::{Point, PolygonWithHoles};
use agpf_core::scalar::Scalar;
use proptest::prelude::*;

/// Coordinates snap to this grid so f64 and rational kernels see the same
/// input.
pub const GRID: f64 = 1.0 / 1024.0;

pub fn snap(v: f64) -> f64 {
    (v / GRID).round() * GRID
}

/// Star-shaped polygon around the origin: `radii.len()` vertices at evenly
/// spaced angles with a little jitter. With `hole`, a small clockwise
/// square around the origin is cut out; every radius must then exceed 1.
pub fn star<T: Scalar>(radii: &[f64], jitter: &[f64], hole: bool) -> PolygonWithHoles<T> {
    let n = radii.len();
    let step = std::f64::consts::TAU / n as f64;
    let outer: Vec<Point<T>> = (0..n)
        .map(|i| {
            let a = step * (i as f64 + 0.4 * jitter[i]);
            Point::from_f64(snap(radii[i] * a.cos()), snap(radii[i] * a.sin()))
        })
        .collect();
    let holes = if hole {
        let h = 0.25;
        vec![vec![
            Point::from_f64(-h, -h),
            Point::from_f64(-h, h),
            Point::from_f64(h, h),
            Point::from_f64(h, -h),
        ]]
    } else {
        vec![]
    };
    PolygonWithHoles::new(outer, holes).expect("star polygons are valid")
}

/// Radii, jitters and a hole flag for [`star`].
pub fn star_params(min_n: usize, max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, bool)> {
    (min_n..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(1.0f64..4.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            any::<bool>(),
        )
    })
}

pub fn square<T: Scalar>(side: f64) -> PolygonWithHoles<T> {
    let p = |x: f64, y: f64| Point::from_f64(x, y);
    PolygonWithHoles::simple(vec![p(0.0, 0.0), p(side, 0.0), p(side, side), p(0.0, side)]).unwrap()
}

/// Independent visibility oracle: the closed segment from `g` to `q` is
/// sampled densely and every sample must lie in the closed polygon.
pub fn sees_by_sampling(poly: &PolygonWithHoles<f64>, g: &Point<f64>, q: &Point<f64>) -> bool {
    let n = 2000;
    (0..=n).all(|i| {
        let t = i as f64 / n as f64;
        poly.contains(&Point::new(g.x + t * (q.x - g.x), g.y + t * (q.y - g.y)))
    })
}

/// Distance from `p` to the segment `ab`.
pub fn seg_dist(p: &Point<f64>, a: &Point<f64>, b: &Point<f64>) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / l2).clamp(0.0, 1.0) };
    ((p.x - a.x - t * dx).powi(2) + (p.y - a.y - t * dy).powi(2)).sqrt()
}

/// Distance from `p` to the nearest boundary edge of the polygon.
pub fn boundary_dist(poly: &PolygonWithHoles<f64>, p: &Point<f64>) -> f64 {
    poly.edges().map(|(a, b)| seg_dist(p, a, b)).fold(f64::INFINITY, f64::min)
}
