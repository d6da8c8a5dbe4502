//! Independent feasibility re-check: exact fading evaluated at random
//! points with visibility decided by the segment oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fading::{illumination, FadingModel, FadingSpec, IntensityAssignment};
use crate::geom::{Point, PolygonWithHoles};
use crate::scalar::Scalar;
use crate::triangulate::triangulate_face;
use crate::visibility::sees;
use crate::Point64;

/// `n` points drawn uniformly from the polygon, followed by its vertices.
pub fn sample_points<T: Scalar>(poly: &PolygonWithHoles<T>, n: usize, seed: u64) -> Vec<Point64> {
    let tris: Vec<_> = triangulate_face(poly.outer(), poly.holes()).iter().map(|t| t.cast::<f64>()).collect();
    let mut cum = Vec::with_capacity(tris.len());
    let mut acc = 0.0;
    for t in &tris {
        acc += t.area();
        cum.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + poly.vertex_count());
    if acc > 0.0 {
        for _ in 0..n {
            let r = rng.gen::<f64>() * acc;
            let i = cum.partition_point(|&c| c < r).min(tris.len() - 1);
            let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            let [a, b, c] = tris[i].vertices();
            out.push(Point::new(
                a.x + u * (b.x - a.x) + v * (c.x - a.x),
                a.y + u * (b.y - a.y) + v * (c.y - a.y),
            ));
        }
    }
    out.extend(poly.vertices().map(|p| p.to_f64()));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityCheck {
    pub samples: usize,
    pub min_illumination: f64,
    pub darkest: Point64,
}

impl FeasibilityCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_illumination >= 1.0 - tol
    }
}

pub fn check_feasibility<T: Scalar>(
    poly: &PolygonWithHoles<T>,
    guards: &[Point<T>],
    x: &IntensityAssignment,
    fading: &FadingSpec,
    samples: usize,
    seed: u64,
) -> FeasibilityCheck {
    let poly64: PolygonWithHoles<f64> = poly.cast();
    let guards64: Vec<Point64> = guards.iter().map(|g| g.to_f64()).collect();
    let model = FadingModel::Rho(*fading);
    let pts = sample_points(&poly64, samples, seed);
    let mut worst = (f64::INFINITY, Point::new(f64::NAN, f64::NAN));
    for p in &pts {
        let v = illumination(p, &guards64, x, |g, q| sees(&poly64, &guards64[g], q), &model);
        if v < worst.0 {
            worst = (v, *p);
        }
    }
    FeasibilityCheck { samples: pts.len(), min_illumination: worst.0, darkest: worst.1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_inside() {
        let p = |x: f64, y: f64| Point::new(x, y);
        let poly = PolygonWithHoles::new(
            vec![p(0.0, 0.0), p(4.0, 0.0), p(4.0, 4.0), p(0.0, 4.0)],
            vec![vec![p(1.0, 1.0), p(1.0, 3.0), p(3.0, 3.0), p(3.0, 1.0)]],
        )
        .unwrap();
        let s = sample_points(&poly, 500, 7);
        assert_eq!(s.len(), 508);
        assert!(s.iter().all(|q| poly.contains(q)));
        assert_eq!(s, sample_points(&poly, 500, 7));
    }

    #[test]
    fn corner_guard_needs_diagonal_power() {
        let p = |x: f64, y: f64| Point::new(x, y);
        let sq = PolygonWithHoles::simple(vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 2.0), p(0.0, 2.0)]).unwrap();
        let f = FadingSpec::new(2.0).unwrap();
        let ok = check_feasibility(&sq, &[p(0.0, 0.0)], &IntensityAssignment::new(vec![8.0]).unwrap(), &f, 200, 1);
        assert!(ok.passes(1e-9));
        let bad = check_feasibility(&sq, &[p(0.0, 0.0)], &IntensityAssignment::new(vec![7.9]).unwrap(), &f, 200, 1);
        assert!(!bad.passes(1e-9));
    }
}
