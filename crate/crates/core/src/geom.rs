//! Planar kernel: points, orientation predicates, polygons with holes.

use std::cmp::Ordering;

use crate::error::{input, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    pub fn from_f64(x: f64, y: f64) -> Self {
        Point::new(T::from_f64(x), T::from_f64(y))
    }

    pub fn origin() -> Self {
        Point::new(T::zero(), T::zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Point::new(self.x.clone() + o.x.clone(), self.y.clone() + o.y.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Point::new(self.x.clone() - o.x.clone(), self.y.clone() - o.y.clone())
    }

    pub fn scale(&self, k: &T) -> Self {
        Point::new(self.x.clone() * k.clone(), self.y.clone() * k.clone())
    }

    pub fn cross(&self, o: &Self) -> T {
        self.x.clone() * o.y.clone() - self.y.clone() * o.x.clone()
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x.clone() * o.x.clone() + self.y.clone() * o.y.clone()
    }

    pub fn norm2(&self) -> T {
        self.dot(self)
    }

    pub fn dist2(&self, o: &Self) -> T {
        self.sub(o).norm2()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(&self) -> Self {
        Point::new(-self.y.clone(), self.x.clone())
    }

    pub fn midpoint(&self, o: &Self) -> Self {
        self.add(o).scale(&T::half())
    }

    /// `self + (o - self) * t`
    pub fn lerp(&self, o: &Self, t: &T) -> Self {
        self.add(&o.sub(self).scale(t))
    }

    pub fn to_f64(&self) -> Point<f64> {
        Point::new(self.x.as_f64(), self.y.as_f64())
    }

    pub fn cast<U: Scalar>(&self) -> Point<U> {
        if U::EXACT || T::EXACT {
            Point::new(
                U::from_rational(&self.x.to_rational()),
                U::from_rational(&self.y.to_rational()),
            )
        } else {
            Point::new(U::from_f64(self.x.as_f64()), U::from_f64(self.y.as_f64()))
        }
    }

    pub fn lex_cmp(&self, o: &Self) -> Ordering {
        self.x
            .partial_cmp(&o.x)
            .unwrap_or(Ordering::Equal)
            .then(self.y.partial_cmp(&o.y).unwrap_or(Ordering::Equal))
    }

    /// Equality under the kernel tolerance (exact for rationals).
    pub fn coincides(&self, o: &Self) -> bool {
        if T::EXACT {
            self == o
        } else {
            let t = T::tolerance();
            self.dist2(o) <= t.clone() * t
        }
    }
}

impl Point<f64> {
    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist(&self, o: &Self) -> f64 {
        self.dist2(o).sqrt()
    }
}

/// Sign of the turn `a -> b -> c`: `1` left, `-1` right, `0` collinear.
/// Floating kernels treat `c` within the tolerance of line `ab` as collinear.
pub fn orient<T: Scalar>(a: &Point<T>, b: &Point<T>, c: &Point<T>) -> i8 {
    let ab = b.sub(a);
    let ac = c.sub(a);
    let cr = ab.cross(&ac);
    if !T::EXACT {
        let t = T::tolerance();
        let scale = T::max_of(ab.norm2(), ac.norm2());
        if cr.clone() * cr.clone() <= t.clone() * t * scale {
            return 0;
        }
    }
    sign(&cr)
}

/// Orientation without tolerance.
pub fn orient_raw<T: Scalar>(a: &Point<T>, b: &Point<T>, c: &Point<T>) -> i8 {
    sign(&b.sub(a).cross(&c.sub(a)))
}

pub fn sign<T: Scalar>(v: &T) -> i8 {
    if v.is_pos() {
        1
    } else if v.is_neg() {
        -1
    } else {
        0
    }
}

/// `p` lies on the closed segment `ab`.
pub fn on_segment<T: Scalar>(p: &Point<T>, a: &Point<T>, b: &Point<T>) -> bool {
    if p.coincides(a) || p.coincides(b) {
        return true;
    }
    if orient(a, b, p) != 0 {
        return false;
    }
    let ab = b.sub(a);
    let t = p.sub(a).dot(&ab);
    if T::EXACT {
        !t.is_neg() && t <= ab.norm2()
    } else {
        // Projection parameter within the segment up to tolerance.
        let len2 = ab.norm2();
        let tol = T::tolerance() * T::from_f64(len2.as_f64().sqrt());
        t >= -tol.clone() && t <= len2 + tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SegmentHit<T> {
    None,
    /// Single crossing or touching point with parameters on both segments.
    Point { p: Point<T>, t: T, u: T },
    /// Collinear overlap, given as parameter range on the first segment.
    Overlap { t0: T, t1: T },
}

/// Intersection of closed segments `ab` and `cd`.
pub fn segment_intersection<T: Scalar>(
    a: &Point<T>,
    b: &Point<T>,
    c: &Point<T>,
    d: &Point<T>,
) -> SegmentHit<T> {
    let r = b.sub(a);
    let s = d.sub(c);
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0 {
        let rr = r.norm2();
        if rr.is_zero() {
            return if on_segment(a, c, d) {
                SegmentHit::Point { p: a.clone(), t: T::zero(), u: param_on(a, c, d) }
            } else {
                SegmentHit::None
            };
        }
        let tc = c.sub(a).dot(&r) / rr.clone();
        let td = d.sub(a).dot(&r) / rr;
        let (lo, hi) = if tc <= td { (tc, td) } else { (td, tc) };
        let t0 = T::max_of(lo, T::zero());
        let t1 = T::min_of(hi, T::one());
        let len = r.to_f64().norm();
        let tol = if T::EXACT { T::zero() } else { T::from_f64(f64::tolerance() / len.max(1e-300)) };
        if t0 > t1.clone() + tol.clone() {
            return SegmentHit::None;
        }
        if t1.clone() - t0.clone() <= tol {
            let t = t0;
            let p = a.lerp(b, &t);
            let u = param_on(&p, c, d);
            return SegmentHit::Point { p, t, u };
        }
        return SegmentHit::Overlap { t0, t1 };
    }
    if o1 * o2 > 0 || o3 * o4 > 0 {
        return SegmentHit::None;
    }
    // Touching cases resolved through the exact endpoint when available.
    if o1 == 0 && on_segment(c, a, b) {
        return SegmentHit::Point { p: c.clone(), t: param_on(c, a, b), u: T::zero() };
    }
    if o2 == 0 && on_segment(d, a, b) {
        return SegmentHit::Point { p: d.clone(), t: param_on(d, a, b), u: T::one() };
    }
    if o3 == 0 && on_segment(a, c, d) {
        return SegmentHit::Point { p: a.clone(), t: T::zero(), u: param_on(a, c, d) };
    }
    if o4 == 0 && on_segment(b, c, d) {
        return SegmentHit::Point { p: b.clone(), t: T::one(), u: param_on(b, c, d) };
    }
    if o1 == 0 || o2 == 0 || o3 == 0 || o4 == 0 {
        return SegmentHit::None;
    }
    let denom = r.cross(&s);
    if denom.is_zero() {
        return SegmentHit::None;
    }
    let ca = c.sub(a);
    let t = ca.cross(&s) / denom.clone();
    let u = ca.cross(&r) / denom;
    let t = clamp01(t);
    let u = clamp01(u);
    SegmentHit::Point { p: a.lerp(b, &t), t, u }
}

fn clamp01<T: Scalar>(v: T) -> T {
    T::min_of(T::max_of(v, T::zero()), T::one())
}

/// Projection parameter of `p` on segment `ab`.
pub fn param_on<T: Scalar>(p: &Point<T>, a: &Point<T>, b: &Point<T>) -> T {
    let ab = b.sub(a);
    let l = ab.norm2();
    if l.is_zero() {
        return T::zero();
    }
    clamp01(p.sub(a).dot(&ab) / l)
}

pub fn signed_area<T: Scalar>(cycle: &[Point<T>]) -> Result<T> {
    if cycle.len() < 3 {
        return Err(input(format!("cycle has {} points, need at least 3", cycle.len())));
    }
    Ok(twice_area(cycle) / T::two())
}

pub(crate) fn twice_area<T: Scalar>(cycle: &[Point<T>]) -> T {
    let n = cycle.len();
    let mut s = T::zero();
    for i in 0..n {
        s = s + cycle[i].cross(&cycle[(i + 1) % n]);
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolygonWithHoles<T> {
    outer: Vec<Point<T>>,
    holes: Vec<Vec<Point<T>>>,
}

impl<T: Scalar> PolygonWithHoles<T> {
    /// Validates orientation, simplicity and hole placement.
    pub fn new(outer: Vec<Point<T>>, holes: Vec<Vec<Point<T>>>) -> Result<Self> {
        let poly = PolygonWithHoles { outer, holes };
        poly.validate()?;
        Ok(poly)
    }

    pub fn simple(outer: Vec<Point<T>>) -> Result<Self> {
        Self::new(outer, Vec::new())
    }

    fn validate(&self) -> Result<()> {
        if self.outer.len() < 3 {
            return Err(input("outer boundary needs at least 3 vertices"));
        }
        if !signed_area(&self.outer)?.is_pos() {
            return Err(input("outer boundary must be counterclockwise"));
        }
        for (i, h) in self.holes.iter().enumerate() {
            if h.len() < 3 {
                return Err(input(format!("hole {i} needs at least 3 vertices")));
            }
            if !signed_area(h)?.is_neg() {
                return Err(input(format!("hole {i} must be clockwise")));
            }
        }
        let cycles: Vec<&[Point<T>]> = self.cycles().collect();
        for (ci, c) in cycles.iter().enumerate() {
            for i in 0..c.len() {
                if c[i].coincides(&c[(i + 1) % c.len()]) {
                    return Err(input(format!("cycle {ci} repeats vertex {i}")));
                }
            }
        }
        // Pairwise edge test: adjacent edges may only share their common vertex.
        let edges: Vec<(usize, usize, usize)> = cycles
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| (0..c.len()).map(move |i| (ci, i, c.len())))
            .collect();
        let boxes: Vec<[f64; 4]> = edges
            .iter()
            .map(|&(ci, i, n)| {
                let a = cycles[ci][i].to_f64();
                let b = cycles[ci][(i + 1) % n].to_f64();
                [a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y)]
            })
            .collect();
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by(|&p, &q| boxes[p][0].total_cmp(&boxes[q][0]));
        let slack = 1e-9;
        for (k, &p) in order.iter().enumerate() {
            for &q in &order[k + 1..] {
                if boxes[q][0] > boxes[p][1] + slack {
                    break;
                }
                if boxes[q][2] > boxes[p][3] + slack || boxes[p][2] > boxes[q][3] + slack {
                    continue;
                }
                let (ci, i, n) = edges[p];
                let (cj, j, m) = edges[q];
                let a = &cycles[ci][i];
                let b = &cycles[ci][(i + 1) % n];
                let c = &cycles[cj][j];
                let d = &cycles[cj][(j + 1) % m];
                let hit = segment_intersection(a, b, c, d);
                let adjacent_shared = if ci == cj && (i + 1) % n == j {
                    Some(b)
                } else if ci == cj && (j + 1) % m == i {
                    Some(a)
                } else {
                    None
                };
                let bad = match (&hit, adjacent_shared) {
                    (SegmentHit::None, _) => false,
                    (SegmentHit::Overlap { .. }, _) => true,
                    (SegmentHit::Point { p, .. }, Some(s)) => !p.coincides(s),
                    (SegmentHit::Point { .. }, None) => true,
                };
                if bad {
                    return Err(input(format!(
                        "boundary is not simple: edge {i} of cycle {ci} meets edge {j} of cycle {cj}"
                    )));
                }
            }
        }
        for (i, h) in self.holes.iter().enumerate() {
            if point_in_cycle(&h[0], &self.outer) != Location::Inside {
                return Err(input(format!("hole {i} is not inside the outer boundary")));
            }
            for (j, g) in self.holes.iter().enumerate() {
                if i != j && point_in_cycle(&h[0], g) != Location::Outside {
                    return Err(input(format!("hole {i} overlaps hole {j}")));
                }
            }
        }
        Ok(())
    }

    pub fn outer(&self) -> &[Point<T>] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<Point<T>>] {
        &self.holes
    }

    pub fn cycles(&self) -> impl Iterator<Item = &[Point<T>]> {
        std::iter::once(self.outer.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point<T>> {
        self.cycles().flat_map(|c| c.iter())
    }

    pub fn vertex_count(&self) -> usize {
        self.outer.len() + self.holes.iter().map(|h| h.len()).sum::<usize>()
    }

    /// All boundary edges, oriented with the interior on the left.
    pub fn edges(&self) -> impl Iterator<Item = (&Point<T>, &Point<T>)> {
        self.cycles()
            .flat_map(|c| (0..c.len()).map(move |i| (&c[i], &c[(i + 1) % c.len()])))
    }

    pub fn area(&self) -> T {
        let mut s = twice_area(&self.outer);
        for h in &self.holes {
            s = s + twice_area(h);
        }
        s / T::two()
    }

    pub fn locate(&self, p: &Point<T>) -> Location {
        for (a, b) in self.edges() {
            if on_segment(p, a, b) {
                return Location::Boundary;
            }
        }
        let mut inside = false;
        for c in self.cycles() {
            if crosses_odd(p, c) {
                inside = !inside;
            }
        }
        if inside {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        self.locate(p) != Location::Outside
    }

    pub fn cast<U: Scalar>(&self) -> PolygonWithHoles<U> {
        PolygonWithHoles {
            outer: self.outer.iter().map(|p| p.cast()).collect(),
            holes: self.holes.iter().map(|h| h.iter().map(|p| p.cast()).collect()).collect(),
        }
    }

    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for p in &self.outer {
            let q = p.to_f64();
            b[0] = b[0].min(q.x);
            b[1] = b[1].max(q.x);
            b[2] = b[2].min(q.y);
            b[3] = b[3].max(q.y);
        }
        b
    }

    /// Same region without hole `index`.
    pub fn without_hole(&self, index: usize) -> Self {
        let mut holes = self.holes.clone();
        holes.remove(index);
        PolygonWithHoles { outer: self.outer.clone(), holes }
    }

    /// Builds without validation; callers guarantee the invariants.
    pub(crate) fn from_parts(outer: Vec<Point<T>>, holes: Vec<Vec<Point<T>>>) -> Self {
        PolygonWithHoles { outer, holes }
    }
}

/// Parity of crossings of the rightward ray from `p` with cycle `c`.
fn crosses_odd<T: Scalar>(p: &Point<T>, c: &[Point<T>]) -> bool {
    let n = c.len();
    let mut odd = false;
    for i in 0..n {
        let a = &c[i];
        let b = &c[(i + 1) % n];
        let up = a.y <= p.y && b.y > p.y;
        let down = b.y <= p.y && a.y > p.y;
        if up && orient_raw(a, b, p) > 0 || down && orient_raw(a, b, p) < 0 {
            odd = !odd;
        }
    }
    odd
}

/// Location of `p` relative to one closed cycle of either orientation.
pub fn point_in_cycle<T: Scalar>(p: &Point<T>, c: &[Point<T>]) -> Location {
    let n = c.len();
    for i in 0..n {
        if on_segment(p, &c[i], &c[(i + 1) % n]) {
            return Location::Boundary;
        }
    }
    if crosses_odd(p, c) {
        Location::Inside
    } else {
        Location::Outside
    }
}

pub fn diameter<T: Scalar>(poly: &PolygonWithHoles<T>) -> f64 {
    let pts: Vec<Point<f64>> = poly.outer().iter().map(|p| p.to_f64()).collect();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(pts[i].dist2(&pts[j]));
        }
    }
    best.sqrt()
}

pub fn average_edge_length<T: Scalar>(poly: &PolygonWithHoles<T>) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (a, b) in poly.edges() {
        total += a.to_f64().dist(&b.to_f64());
        count += 1;
    }
    total / count as f64
}

pub fn scale<T: Scalar>(poly: &PolygonWithHoles<T>, factor: &T) -> Result<PolygonWithHoles<T>> {
    if !factor.is_pos() {
        return Err(input(format!("scale factor must be positive, got {factor}")));
    }
    let f = |c: &[Point<T>]| c.iter().map(|p| p.scale(factor)).collect::<Vec<_>>();
    Ok(PolygonWithHoles::from_parts(
        f(poly.outer()),
        poly.holes().iter().map(|h| f(h)).collect(),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangle<T> {
    pub v0: Point<T>,
    pub v1: Point<T>,
    pub v2: Point<T>,
}

impl<T: Scalar> Triangle<T> {
    pub fn new(v0: Point<T>, v1: Point<T>, v2: Point<T>) -> Self {
        Triangle { v0, v1, v2 }
    }

    pub fn vertices(&self) -> [&Point<T>; 3] {
        [&self.v0, &self.v1, &self.v2]
    }

    pub fn signed_area(&self) -> T {
        self.v1.sub(&self.v0).cross(&self.v2.sub(&self.v0)) / T::two()
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point<T> {
        let three = T::two() + T::one();
        let s = self.v0.add(&self.v1).add(&self.v2);
        Point::new(s.x / three.clone(), s.y / three)
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        let s = sign(&self.signed_area());
        let (a, b, c) = (&self.v0, &self.v1, &self.v2);
        [orient(a, b, p), orient(b, c, p), orient(c, a, p)]
            .iter()
            .all(|&o| o == 0 || o == s)
    }

    pub fn cast<U: Scalar>(&self) -> Triangle<U> {
        Triangle::new(self.v0.cast(), self.v1.cast(), self.v2.cast())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn sq() -> Vec<Point<f64>> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn signed_area_examples() {
        assert_eq!(signed_area(&sq()).unwrap(), 1.0);
        let mut r = sq();
        r.reverse();
        assert_eq!(signed_area(&r).unwrap(), -1.0);
        let line = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert_eq!(signed_area(&line).unwrap(), 0.0);
        assert!(signed_area(&sq()[..2]).is_err());
    }

    #[test]
    fn rejects_bad_polygons() {
        let mut cw = sq();
        cw.reverse();
        assert!(PolygonWithHoles::simple(cw).is_err());
        let bow = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(PolygonWithHoles::simple(bow).is_err());
        let outside_hole = vec![
            Point::new(2.0, 2.0),
            Point::new(2.0, 3.0),
            Point::new(3.0, 3.0),
            Point::new(3.0, 2.0),
        ];
        assert!(PolygonWithHoles::new(sq(), vec![outside_hole]).is_err());
    }

    #[test]
    fn measures() {
        let p = PolygonWithHoles::simple(sq()).unwrap();
        assert!((diameter(&p) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(average_edge_length(&p), 1.0);
        let rect = PolygonWithHoles::simple(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(average_edge_length(&rect), 2.0);
        let holed = PolygonWithHoles::new(
            sq(),
            vec![vec![
                Point::new(0.25, 0.25),
                Point::new(0.25, 0.75),
                Point::new(0.75, 0.75),
                Point::new(0.75, 0.25),
            ]],
        )
        .unwrap();
        assert_eq!(average_edge_length(&holed), 0.75);
        assert_eq!(holed.area(), 0.75);
        assert!(scale(&p, &0.0).is_err());
        assert_eq!(scale(&p, &2.0).unwrap().area(), 4.0);
    }

    #[test]
    fn exact_locate() {
        let p: PolygonWithHoles<Rational> = PolygonWithHoles::simple(sq()).unwrap().cast();
        let q = |x: f64, y: f64| Point::<Rational>::from_f64(x, y);
        assert_eq!(p.locate(&q(0.5, 0.5)), Location::Inside);
        assert_eq!(p.locate(&q(1.0, 0.5)), Location::Boundary);
        assert_eq!(p.locate(&q(1.5, 0.5)), Location::Outside);
        assert_eq!(p.locate(&q(0.0, 0.0)), Location::Boundary);
    }

    #[test]
    fn crossing_segments() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 2.0);
        let c = Point::new(0.0, 2.0);
        let d = Point::new(2.0, 0.0);
        match segment_intersection(&a, &b, &c, &d) {
            SegmentHit::Point { p, t, u } => {
                assert!(p.coincides(&Point::new(1.0, 1.0)));
                assert!((t - 0.5f64).abs() < 1e-12 && (u - 0.5f64).abs() < 1e-12);
            }
            h => panic!("{h:?}"),
        }
        let e = Point::new(1.0, 1.0);
        let f = Point::new(3.0, 3.0);
        assert!(matches!(segment_intersection(&a, &b, &e, &f), SegmentHit::Overlap { .. }));
    }
}
