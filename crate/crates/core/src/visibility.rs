//! Visibility polygons and the per-face guard visibility overlay.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::arrangement::{Curve, PlanarSubdivision};
use crate::error::{input, Result};
use crate::geom::{
    on_segment, orient, orient_raw, point_in_cycle, segment_intersection, Location, Point, PolygonWithHoles,
    SegmentHit,
};
use crate::scalar::Scalar;

/// Star-shaped region seen from `apex`. Visibility is closed: grazing
/// contact with the boundary does not block.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityPolygon<T> {
    pub apex: Point<T>,
    pub boundary: Vec<Point<T>>,
    bbox: [f64; 4],
    approx: Vec<Point<f64>>,
}

impl<T: Scalar> VisibilityPolygon<T> {
    pub fn contains(&self, q: &Point<T>) -> bool {
        let f = q.to_f64();
        let slack = 1e-7;
        if f.x < self.bbox[0] - slack
            || f.x > self.bbox[1] + slack
            || f.y < self.bbox[2] - slack
            || f.y > self.bbox[3] + slack
        {
            return false;
        }
        if T::EXACT {
            return filtered_contains(q, &f, &self.boundary, &self.approx);
        }
        point_in_cycle(q, &self.boundary) != Location::Outside
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Point<T>, &Point<T>)> {
        let n = self.boundary.len();
        (0..n).map(move |i| (&self.boundary[i], &self.boundary[(i + 1) % n]))
    }

    pub fn area(&self) -> T {
        crate::geom::twice_area(&self.boundary) / T::two()
    }
}

/// Point-in-cycle test, boundary included, that settles each edge in
/// floating point when its predicates are clear of rounding error and in
/// exact arithmetic otherwise.
fn filtered_contains<T: Scalar>(q: &Point<T>, qf: &Point<f64>, c: &[Point<T>], approx: &[Point<f64>]) -> bool {
    let n = c.len();
    let mut odd = false;
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (&approx[i], &approx[j]);
        let m = a.x.abs().max(a.y.abs()).max(b.x.abs()).max(b.y.abs()).max(qf.x.abs()).max(qf.y.abs()).max(1.0);
        // Inputs carry a conversion error of a few ulps each.
        let tol = 1e-14 * m;
        let cross = (b.x - a.x) * (qf.y - a.y) - (b.y - a.y) * (qf.x - a.x);
        let (up, down, turn) = if (a.y - qf.y).abs() > tol && (b.y - qf.y).abs() > tol && cross.abs() > 1e-13 * m * m {
            (a.y < qf.y && b.y > qf.y, b.y < qf.y && a.y > qf.y, if cross > 0.0 { 1 } else { -1 })
        } else {
            let (a, b) = (&c[i], &c[j]);
            if on_segment(q, a, b) {
                return true;
            }
            (a.y <= q.y && b.y > q.y, b.y <= q.y && a.y > q.y, orient_raw(a, b, q))
        };
        if up && turn > 0 || down && turn < 0 {
            odd = !odd;
        }
    }
    odd
}

fn bbox_of<T: Scalar>(pts: &[Point<T>]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for p in pts {
        let q = p.to_f64();
        b[0] = b[0].min(q.x);
        b[1] = b[1].max(q.x);
        b[2] = b[2].min(q.y);
        b[3] = b[3].max(q.y);
    }
    b
}

fn angle_cmp<T: Scalar>(a: &Point<T>, b: &Point<T>) -> Ordering {
    let ha = half(a);
    let hb = half(b);
    ha.cmp(&hb).then_with(|| {
        let c = a.cross(b);
        if c.is_pos() {
            Ordering::Less
        } else if c.is_neg() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    })
}

fn half<T: Scalar>(d: &Point<T>) -> u8 {
    if d.y.is_pos() || (d.y.is_zero() && d.x.is_pos()) {
        0
    } else {
        1
    }
}

/// Same direction from the apex, up to the kernel tolerance.
fn same_direction<T: Scalar>(p: &Point<T>, a: &Point<T>, b: &Point<T>) -> bool {
    let da = a.sub(p);
    let db = b.sub(p);
    if !da.dot(&db).is_pos() {
        return false;
    }
    if T::EXACT {
        da.cross(&db).is_zero()
    } else {
        orient(p, a, b) == 0
    }
}

/// Ray `p + s r` against segment `cd`: smallest `s > 0`, if any.
fn ray_hit<T: Scalar>(p: &Point<T>, r: &Point<T>, c: &Point<T>, d: &Point<T>) -> Option<T> {
    let e = d.sub(c);
    let denom = r.cross(&e);
    if denom.is_zero() {
        return None;
    }
    let cp = c.sub(p);
    let s = cp.cross(&e) / denom.clone();
    let u = cp.cross(r) / denom;
    let (zero, one) = (T::zero(), T::one());
    if T::EXACT {
        if u < zero || u > one || !s.is_pos() {
            return None;
        }
    } else {
        let rl = r.to_f64().norm();
        let el = e.to_f64().norm();
        let tol_s = T::from_f64(f64::tolerance() / rl.max(1e-300));
        let tol_u = T::from_f64(f64::tolerance() / el.max(1e-300));
        if u < zero - tol_u.clone() || u > one + tol_u || s <= tol_s {
            return None;
        }
    }
    Some(s)
}

/// Point where the ray `p + s dir` meets the line through `c`, `d`.
fn line_point<T: Scalar>(p: &Point<T>, dir: &Point<T>, c: &Point<T>, d: &Point<T>) -> Option<Point<T>> {
    let e = d.sub(c);
    let denom = dir.cross(&e);
    if denom.is_zero() {
        return None;
    }
    let s = c.sub(p).cross(&e) / denom;
    Some(p.add(&dir.scale(&s)))
}

pub fn visibility_polygon<T: Scalar>(poly: &PolygonWithHoles<T>, p: &Point<T>) -> Result<VisibilityPolygon<T>> {
    let loc = poly.locate(p);
    if loc == Location::Outside {
        return Err(input(format!("point ({}, {}) lies outside the polygon", p.x, p.y)));
    }
    let edges: Vec<(Point<T>, Point<T>)> = poly.edges().map(|(a, b)| (a.clone(), b.clone())).collect();
    // Distinct directions to all vertices, in angular order.
    let mut dirs: Vec<Point<T>> = poly
        .vertices()
        .filter(|v| !v.coincides(p))
        .map(|v| v.sub(p))
        .collect();
    dirs.sort_by(angle_cmp);
    let mut uniq: Vec<Point<T>> = Vec::with_capacity(dirs.len());
    let origin = Point::origin();
    for d in dirs {
        if let Some(last) = uniq.last() {
            if same_direction(&origin, last, &d) {
                continue;
            }
        }
        uniq.push(d);
    }
    if uniq.len() > 1 && same_direction(&origin, &uniq[0], uniq.last().unwrap()) {
        uniq.pop();
    }
    let k = uniq.len();
    let mut out: Vec<Point<T>> = Vec::new();
    let mut open = Vec::with_capacity(k);
    for i in 0..k {
        let a = &uniq[i];
        let b = &uniq[(i + 1) % k];
        let cr = a.cross(b);
        let ray = if k == 1 {
            a.perp()
        } else if cr.is_pos() && orient(&origin, a, b) != 0 {
            a.add(b)
        } else if cr.is_pos() || (cr.is_zero() && a.dot(b).is_neg()) || orient(&origin, a, b) == 0 {
            a.perp()
        } else {
            a.add(b).scale(&-T::one())
        };
        // Nearest boundary edge along the wedge's interior ray.
        let mut best: Option<(T, usize)> = None;
        for (ei, (c, d)) in edges.iter().enumerate() {
            if let Some(s) = ray_hit(p, &ray, c, d) {
                if best.as_ref().map_or(true, |(bs, _)| s < *bs) {
                    best = Some((s, ei));
                }
            }
        }
        let wedge = best.and_then(|(s, ei)| {
            let probe = p.add(&ray.scale(&(s / T::two())));
            if poly.locate(&probe) != Location::Inside {
                return None;
            }
            let (c, d) = &edges[ei];
            let pa = line_point(p, a, c, d)?;
            let pb = line_point(p, b, c, d)?;
            Some((pa, pb))
        });
        open.push(wedge);
    }
    let any_closed = open.iter().any(|w| w.is_none());
    // Start right after a blocked wedge so the apex lands in one place.
    let start = if any_closed {
        (open.iter().position(|w| w.is_none()).unwrap() + 1) % k
    } else {
        0
    };
    if any_closed {
        out.push(p.clone());
    }
    for j in 0..k {
        let i = (start + j) % k;
        match &open[i] {
            Some((pa, pb)) => {
                out.push(pa.clone());
                out.push(pb.clone());
            }
            None => {
                if out.last().map_or(true, |l| !l.coincides(p)) {
                    out.push(p.clone());
                }
            }
        }
    }
    let boundary = simplify(out, p);
    let bbox = bbox_of(&boundary);
    let approx = boundary.iter().map(|q| q.to_f64()).collect();
    Ok(VisibilityPolygon { apex: p.clone(), boundary, bbox, approx })
}

/// Removes repeated points and vertices interior to straight runs; the apex
/// is kept when it lies on the boundary.
fn simplify<T: Scalar>(pts: Vec<Point<T>>, apex: &Point<T>) -> Vec<Point<T>> {
    let mut v: Vec<Point<T>> = Vec::with_capacity(pts.len());
    for q in pts {
        if v.last().map_or(true, |l: &Point<T>| !l.coincides(&q)) {
            v.push(q);
        }
    }
    while v.len() > 1 && v[0].coincides(v.last().unwrap()) {
        v.pop();
    }
    let mut changed = true;
    while changed && v.len() > 3 {
        changed = false;
        let n = v.len();
        for i in 0..n {
            let a = &v[(i + n - 1) % n];
            let b = &v[i];
            let c = &v[(i + 1) % n];
            if b.coincides(apex) {
                continue;
            }
            if orient(a, b, c) == 0 && !a.sub(b).dot(&c.sub(b)).is_pos() {
                v.remove(i);
                changed = true;
                break;
            }
        }
    }
    v
}

/// Direct test: the closed segment `gq` stays in the closed polygon.
pub fn sees<T: Scalar>(poly: &PolygonWithHoles<T>, g: &Point<T>, q: &Point<T>) -> bool {
    if !poly.contains(g) || !poly.contains(q) {
        return false;
    }
    if g.coincides(q) {
        return true;
    }
    let mut ts: Vec<T> = vec![T::zero(), T::one()];
    for (a, b) in poly.edges() {
        match segment_intersection(g, q, a, b) {
            SegmentHit::None => {}
            SegmentHit::Point { t, .. } => ts.push(t),
            SegmentHit::Overlap { t0, t1 } => {
                ts.push(t0);
                ts.push(t1);
            }
        }
        // Vertices touching the open segment split it as well.
        if on_segment(a, g, q) {
            ts.push(crate::geom::param_on(a, g, q));
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    ts.dedup();
    for w in ts.windows(2) {
        let mid = (w[0].clone() + w[1].clone()) / T::two();
        if !poly.contains(&g.lerp(q, &mid)) {
            return false;
        }
    }
    true
}

/// Overlay of all guards' visibility polygons; each face is labelled with
/// the guards that see it.
#[derive(Clone, Debug)]
pub struct VisibilityOverlay<T> {
    pub subdivision: PlanarSubdivision<T>,
    pub polygons: Vec<VisibilityPolygon<T>>,
    /// Every face is seen by at least one guard.
    pub feasible: bool,
}

impl<T: Scalar> VisibilityOverlay<T> {
    pub fn label(&self, face: usize) -> &BTreeSet<usize> {
        &self.subdivision.faces[face].label
    }

    /// Faces seen by no guard.
    pub fn dark_faces(&self) -> Vec<usize> {
        (0..self.subdivision.faces.len()).filter(|&f| self.label(f).is_empty()).collect()
    }
}

pub fn visibility_polygons<T: Scalar>(
    poly: &PolygonWithHoles<T>,
    guards: &[Point<T>],
) -> Result<Vec<VisibilityPolygon<T>>> {
    guards
        .iter()
        .enumerate()
        .map(|(i, g)| {
            visibility_polygon(poly, g).map_err(|_| input(format!("guard {i} lies outside the polygon")))
        })
        .collect()
}

pub fn visibility_overlay<T: Scalar>(poly: &PolygonWithHoles<T>, guards: &[Point<T>]) -> Result<VisibilityOverlay<T>> {
    let polygons = visibility_polygons(poly, guards)?;
    let curves: Vec<Curve<T>> = polygons
        .iter()
        .flat_map(|v| v.edges().map(|(a, b)| Curve::Segment(a.clone(), b.clone())))
        .collect();
    let mut subdivision = PlanarSubdivision::build(poly, &curves)?;
    for face in subdivision.faces.iter_mut() {
        for (g, vp) in polygons.iter().enumerate() {
            if vp.contains(&face.interior) {
                face.label.insert(g);
            }
        }
    }
    let feasible = subdivision.faces.iter().all(|f| !f.label.is_empty());
    Ok(VisibilityOverlay { subdivision, polygons, feasible })
}
