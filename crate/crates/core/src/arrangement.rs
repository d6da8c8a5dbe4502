//! Planar arrangements of segments and circular arcs, stored as a doubly
//! connected edge list restricted to a supporting polygon.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::budget::Budget;
use crate::error::{input, Error, Result};
use crate::geom::{
    orient, point_in_cycle, segment_intersection, Location, Point, PolygonWithHoles, SegmentHit,
};
use crate::scalar::Scalar;

/// Counterclockwise arc of a circle, `sweep` in `(0, 2pi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcGeom {
    pub center: Point<f64>,
    pub radius: f64,
    pub start: f64,
    pub sweep: f64,
}

impl ArcGeom {
    pub fn circle(center: Point<f64>, radius: f64) -> Self {
        ArcGeom { center, radius, start: 0.0, sweep: TAU }
    }

    pub fn point_at(&self, theta: f64) -> Point<f64> {
        Point::new(
            self.center.x + self.radius * theta.cos(),
            self.center.y + self.radius * theta.sin(),
        )
    }

    pub fn start_point(&self) -> Point<f64> {
        self.point_at(self.start)
    }

    pub fn end_point(&self) -> Point<f64> {
        self.point_at(self.start + self.sweep)
    }

    pub fn mid_point(&self) -> Point<f64> {
        self.point_at(self.start + 0.5 * self.sweep)
    }

    /// Offset of `p`'s polar angle from `start`, snapped to the nearer end
    /// when it falls outside the arc.
    pub fn offset_of(&self, p: &Point<f64>) -> f64 {
        let th = (p.y - self.center.y).atan2(p.x - self.center.x);
        let off = (th - self.start).rem_euclid(TAU);
        if off <= self.sweep {
            off
        } else if TAU - off < off - self.sweep {
            0.0
        } else {
            self.sweep
        }
    }

    /// `p`'s polar angle lies within the arc, up to a distance tolerance.
    pub fn spans(&self, p: &Point<f64>, tol: f64) -> bool {
        let th = (p.y - self.center.y).atan2(p.x - self.center.x);
        let off = (th - self.start).rem_euclid(TAU);
        let slack = tol / self.radius.max(1e-300);
        off <= self.sweep + slack || off >= TAU - slack
    }

    /// Splits at multiples of a quarter turn; each piece is monotone in both
    /// coordinates.
    pub fn quadrant_pieces(&self) -> Vec<ArcGeom> {
        let mut cuts = vec![self.start];
        let mut k = (self.start / FRAC_PI_2).floor() + 1.0;
        let end = self.start + self.sweep;
        while k * FRAC_PI_2 < end - 1e-12 {
            let c = k * FRAC_PI_2;
            if c > self.start + 1e-12 {
                cuts.push(c);
            }
            k += 1.0;
        }
        cuts.push(end);
        cuts.windows(2)
            .map(|w| ArcGeom { center: self.center, radius: self.radius, start: w[0], sweep: w[1] - w[0] })
            .collect()
    }

    fn bbox(&self) -> [f64; 4] {
        let pieces = if self.sweep > FRAC_PI_2 + 1e-12 { self.quadrant_pieces() } else { vec![*self] };
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for p in pieces {
            for q in [p.start_point(), p.end_point()] {
                b[0] = b[0].min(q.x);
                b[1] = b[1].max(q.x);
                b[2] = b[2].min(q.y);
                b[3] = b[3].max(q.y);
            }
        }
        b
    }

    fn key(&self) -> (i64, i64, i64) {
        let q = |v: f64| (v * 1e8).round() as i64;
        (q(self.center.x), q(self.center.y), q(self.radius))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Curve<T> {
    Segment(Point<T>, Point<T>),
    Arc(ArcGeom),
}

impl<T: Scalar> Curve<T> {
    fn bbox(&self) -> [f64; 4] {
        match self {
            Curve::Segment(a, b) => {
                let (a, b) = (a.to_f64(), b.to_f64());
                [a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y)]
            }
            Curve::Arc(arc) => arc.bbox(),
        }
    }
}

/// Atomic edge between two vertices. Arcs run counterclockwise from `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub arc: Option<ArcGeom>,
}

#[derive(Clone, Debug)]
pub struct Face<T> {
    /// Half-edge ids of the outer boundary, face on the left.
    pub outer: Vec<usize>,
    pub holes: Vec<Vec<usize>>,
    pub interior: Point<T>,
    pub area: f64,
    pub label: BTreeSet<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Vertex(usize),
    Edge(usize),
    Face(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl FeatureCounts {
    pub fn total(&self) -> usize {
        self.vertices + self.edges + self.faces
    }
}

#[derive(Clone, Debug)]
pub struct PlanarSubdivision<T> {
    region: PolygonWithHoles<T>,
    pub vertices: Vec<Point<T>>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face<T>>,
    pub components: usize,
}

impl<T: Scalar> PlanarSubdivision<T> {
    /// Arrangement of the region's boundary and `curves`, which must lie in
    /// the region. Faces outside the region are dropped.
    pub fn build(region: &PolygonWithHoles<T>, curves: &[Curve<T>]) -> Result<Self> {
        Self::build_within(region, curves, &Budget::unlimited())
    }

    /// [`PlanarSubdivision::build`] that gives up with [`Error::Budget`]
    /// once `budget` runs out.
    pub fn build_within(region: &PolygonWithHoles<T>, curves: &[Curve<T>], budget: &Budget) -> Result<Self> {
        let mut all: Vec<Curve<T>> = region
            .edges()
            .map(|(a, b)| Curve::Segment(a.clone(), b.clone()))
            .collect();
        for c in curves {
            match c {
                Curve::Segment(a, b) => {
                    if !a.coincides(b) {
                        all.push(c.clone());
                    }
                }
                Curve::Arc(arc) => {
                    if T::EXACT {
                        return Err(input("circular arcs require a floating-point kernel"));
                    }
                    if arc.radius <= 0.0 || arc.sweep <= 0.0 {
                        continue;
                    }
                    all.extend(arc.quadrant_pieces().into_iter().map(Curve::Arc));
                }
            }
        }
        let (vertices, edges) = split_curves(&all, budget)?;
        assemble(region.clone(), vertices, edges, budget)
    }

    pub fn region(&self) -> &PolygonWithHoles<T> {
        &self.region
    }

    pub fn counts(&self) -> FeatureCounts {
        FeatureCounts { vertices: self.vertices.len(), edges: self.edges.len(), faces: self.faces.len() }
    }

    /// `v - e + f = C - h` for the faces inside the region, `C` counting
    /// connected components of the edge graph and `h` the region's holes.
    pub fn euler_holds(&self) -> bool {
        let c = self.counts();
        c.vertices as i64 - c.edges as i64 + c.faces as i64
            == self.components as i64 - self.region.holes().len() as i64
    }

    pub fn half_origin(&self, h: usize) -> usize {
        let e = &self.edges[h / 2];
        if h % 2 == 0 {
            e.u
        } else {
            e.v
        }
    }

    pub fn half_target(&self, h: usize) -> usize {
        self.half_origin(h ^ 1)
    }

    /// Interior point of an edge (midpoint parameter).
    pub fn edge_point(&self, e: usize) -> Point<T> {
        let edge = &self.edges[e];
        match &edge.arc {
            None => self.vertices[edge.u].midpoint(&self.vertices[edge.v]),
            Some(arc) => {
                let m = arc.mid_point();
                Point::from_f64(m.x, m.y)
            }
        }
    }

    /// One representative point per vertex, edge and face.
    pub fn feature_points(&self) -> Vec<(Feature, Point<T>)> {
        let mut out = Vec::with_capacity(self.counts().total());
        for (i, v) in self.vertices.iter().enumerate() {
            out.push((Feature::Vertex(i), v.clone()));
        }
        for e in 0..self.edges.len() {
            out.push((Feature::Edge(e), self.edge_point(e)));
        }
        for (i, f) in self.faces.iter().enumerate() {
            out.push((Feature::Face(i), f.interior.clone()));
        }
        out
    }

    pub fn on_edge(&self, e: usize, p: &Point<T>) -> bool {
        let edge = &self.edges[e];
        let (a, b) = (&self.vertices[edge.u], &self.vertices[edge.v]);
        match &edge.arc {
            None => crate::geom::on_segment(p, a, b),
            Some(arc) => {
                let q = p.to_f64();
                let tol = f64::tolerance();
                (q.dist(&arc.center) - arc.radius).abs() <= tol && arc.spans(&q, tol)
            }
        }
    }

    pub fn face_locate(&self, f: usize, p: &Point<T>) -> Location {
        let face = &self.faces[f];
        let outer = self.cycle_locate(&face.outer, p);
        if outer != Location::Inside {
            return outer;
        }
        for h in &face.holes {
            match self.cycle_locate(h, p) {
                Location::Outside => {}
                Location::Inside => return Location::Outside,
                Location::Boundary => return Location::Boundary,
            }
        }
        Location::Inside
    }

    /// Feature containing `p`, or `None` outside the region.
    pub fn locate(&self, p: &Point<T>) -> Option<Feature> {
        if let Some(i) = self.vertices.iter().position(|v| v.coincides(p)) {
            return Some(Feature::Vertex(i));
        }
        if let Some(e) = (0..self.edges.len()).find(|&e| self.on_edge(e, p)) {
            return Some(Feature::Edge(e));
        }
        (0..self.faces.len())
            .find(|&f| self.face_locate(f, p) == Location::Inside)
            .map(Feature::Face)
    }

    /// Faces whose closure contains `p`.
    pub fn faces_containing(&self, p: &Point<T>) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.face_locate(f, p) != Location::Outside).collect()
    }

    fn cycle_locate(&self, cycle: &[usize], p: &Point<T>) -> Location {
        cycle_locate(&self.vertices, &self.edges, cycle, p)
    }

    /// Boundary of a face as a polyline; arcs are sampled.
    pub fn face_polyline(&self, f: usize, per_quarter: usize) -> (Vec<Point<f64>>, Vec<Vec<Point<f64>>>) {
        let face = &self.faces[f];
        let conv = |c: &[usize]| polyline(&self.vertices, &self.edges, c, per_quarter);
        (conv(&face.outer), face.holes.iter().map(|h| conv(h)).collect())
    }

    /// Exact boundary cycles of a segment-only face.
    pub fn face_cycles(&self, f: usize) -> (Vec<Point<T>>, Vec<Vec<Point<T>>>) {
        let face = &self.faces[f];
        let conv = |c: &[usize]| c.iter().map(|&h| self.vertices[self.half_origin(h)].clone()).collect();
        (conv(&face.outer), face.holes.iter().map(|h| conv(h)).collect())
    }

    pub fn curves(&self) -> Vec<Curve<T>> {
        self.edges
            .iter()
            .map(|e| match e.arc {
                None => Curve::Segment(self.vertices[e.u].clone(), self.vertices[e.v].clone()),
                Some(a) => Curve::Arc(a),
            })
            .collect()
    }
}

/// Common refinement; each face is labelled with the union of the labels of
/// the input faces whose closure contains its interior point.
pub fn overlay<T: Scalar>(subdivisions: &[PlanarSubdivision<T>]) -> Result<PlanarSubdivision<T>> {
    let first = subdivisions.first().ok_or_else(|| input("overlay of an empty sequence"))?;
    if subdivisions.iter().any(|s| s.region != first.region) {
        return Err(input("subdivisions have different supporting regions"));
    }
    let curves: Vec<Curve<T>> = subdivisions.iter().flat_map(|s| s.curves()).collect();
    let mut out = PlanarSubdivision::build(&first.region, &curves)?;
    for face in out.faces.iter_mut() {
        for s in subdivisions {
            for f in s.faces_containing(&face.interior) {
                face.label.extend(s.faces[f].label.iter().copied());
            }
        }
    }
    Ok(out)
}

fn intersect<T: Scalar>(a: &Curve<T>, b: &Curve<T>) -> Vec<Point<T>> {
    match (a, b) {
        (Curve::Segment(p, q), Curve::Segment(r, s)) => {
            if T::EXACT && !segments_may_meet(p, q, r, s) {
                return Vec::new();
            }
            match segment_intersection(p, q, r, s) {
                SegmentHit::None => Vec::new(),
                SegmentHit::Point { p: x, .. } => vec![x],
                SegmentHit::Overlap { t0, t1 } => vec![p.lerp(q, &t0), p.lerp(q, &t1)],
            }
        }
        (Curve::Segment(p, q), Curve::Arc(arc)) | (Curve::Arc(arc), Curve::Segment(p, q)) => {
            segment_arc(&p.to_f64(), &q.to_f64(), arc)
                .into_iter()
                .map(|x| Point::from_f64(x.x, x.y))
                .collect()
        }
        (Curve::Arc(a1), Curve::Arc(a2)) => {
            arc_arc(a1, a2).into_iter().map(|x| Point::from_f64(x.x, x.y)).collect()
        }
    }
}

/// Floating filter for exact segments: `false` only when the segments are
/// certainly disjoint.
fn segments_may_meet<T: Scalar>(p: &Point<T>, q: &Point<T>, r: &Point<T>, s: &Point<T>) -> bool {
    let (p, q, r, s) = (p.to_f64(), q.to_f64(), r.to_f64(), s.to_f64());
    let side = |a: &Point<f64>, b: &Point<f64>, c: &Point<f64>| {
        let ab = b.sub(a);
        let ac = c.sub(a);
        let cr = ab.cross(&ac);
        let bound = 1e-12 * (ab.x.abs() + ab.y.abs()) * (ac.x.abs() + ac.y.abs());
        if cr > bound {
            1
        } else if cr < -bound {
            -1
        } else {
            0
        }
    };
    let o1 = side(&p, &q, &r);
    let o2 = side(&p, &q, &s);
    let o3 = side(&r, &s, &p);
    let o4 = side(&r, &s, &q);
    !(o1 * o2 > 0 || o3 * o4 > 0)
}

pub(crate) fn segment_arc(a: &Point<f64>, b: &Point<f64>, arc: &ArcGeom) -> Vec<Point<f64>> {
    let tol = f64::tolerance();
    line_circle(a, b, &arc.center, arc.radius)
        .into_iter()
        .filter(|&t| t >= -tol && t <= 1.0 + tol)
        .map(|t| a.lerp(b, &t.clamp(0.0, 1.0)))
        .filter(|p| arc.spans(p, tol))
        .collect()
}

/// Parameters along `a + t (b - a)` where the line meets the circle.
pub(crate) fn line_circle(a: &Point<f64>, b: &Point<f64>, c: &Point<f64>, r: f64) -> Vec<f64> {
    let tol = f64::tolerance();
    let d = b.sub(a);
    let len2 = d.norm2();
    if len2 == 0.0 {
        return Vec::new();
    }
    let len = len2.sqrt();
    // Foot of the perpendicular from the centre.
    let t0 = c.sub(a).dot(&d) / len2;
    let foot = a.lerp(b, &t0);
    let h = foot.dist(c);
    if h > r + tol {
        return Vec::new();
    }
    if (h - r).abs() <= tol {
        return vec![t0];
    }
    let half = (r * r - h * h).max(0.0).sqrt() / len;
    vec![t0 - half, t0 + half]
}

pub(crate) fn arc_arc(a1: &ArcGeom, a2: &ArcGeom) -> Vec<Point<f64>> {
    let tol = f64::tolerance();
    let (c1, r1, c2, r2) = (a1.center, a1.radius, a2.center, a2.radius);
    let dv = c2.sub(&c1);
    let d = dv.norm();
    if d <= tol {
        return Vec::new();
    }
    if d > r1 + r2 + tol || d < (r1 - r2).abs() - tol {
        return Vec::new();
    }
    let along = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let base = c1.add(&dv.scale(&(along / d)));
    let pts = if (d - (r1 + r2)).abs() <= tol || (d - (r1 - r2).abs()).abs() <= tol {
        vec![base]
    } else {
        let h = (r1 * r1 - along * along).max(0.0).sqrt();
        let off = dv.perp().scale(&(h / d));
        vec![base.add(&off), base.sub(&off)]
    };
    pts.into_iter().filter(|p| a1.spans(p, tol) && a2.spans(p, tol)).collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Splits every curve at its intersections and merges coincident vertices.
fn split_curves<T: Scalar>(curves: &[Curve<T>], budget: &Budget) -> Result<(Vec<Point<T>>, Vec<Edge>)> {
    // (curve, point) occurrences; endpoints first.
    let mut occ: Vec<(usize, Point<T>)> = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        match c {
            Curve::Segment(a, b) => {
                occ.push((i, a.clone()));
                occ.push((i, b.clone()));
            }
            Curve::Arc(arc) => {
                let (s, e) = (arc.start_point(), arc.end_point());
                occ.push((i, Point::from_f64(s.x, s.y)));
                occ.push((i, Point::from_f64(e.x, e.y)));
            }
        }
    }
    let boxes: Vec<[f64; 4]> = curves.iter().map(|c| c.bbox()).collect();
    let mut order: Vec<usize> = (0..curves.len()).collect();
    order.sort_by(|&a, &b| boxes[a][0].total_cmp(&boxes[b][0]));
    let slack = 1e-7;
    for (k, &i) in order.iter().enumerate() {
        if k % 256 == 0 && budget.exhausted() {
            return Err(Error::Budget);
        }
        for &j in &order[k + 1..] {
            if boxes[j][0] > boxes[i][1] + slack {
                break;
            }
            if boxes[j][2] > boxes[i][3] + slack || boxes[i][2] > boxes[j][3] + slack {
                continue;
            }
            for p in intersect(&curves[i], &curves[j]) {
                occ.push((i, p.clone()));
                occ.push((j, p));
            }
        }
    }
    let (vertex_of, vertices) = merge_points(&occ);
    let mut per_curve: Vec<Vec<usize>> = vec![Vec::new(); curves.len()];
    for (k, (c, _)) in occ.iter().enumerate() {
        per_curve[*c].push(k);
    }
    let mut edges = Vec::new();
    let mut seen: HashMap<(usize, usize, Option<(i64, i64, i64)>), ()> = HashMap::new();
    for (c, ks) in per_curve.iter().enumerate() {
        if c % 1024 == 0 && budget.exhausted() {
            return Err(Error::Budget);
        }
        match &curves[c] {
            Curve::Segment(a, b) => {
                let dir = b.sub(a);
                let mut keyed: Vec<(T, usize)> =
                    ks.iter().map(|&k| (occ[k].1.sub(a).dot(&dir), vertex_of[k])).collect();
                keyed.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
                let mut ids: Vec<usize> = keyed.into_iter().map(|x| x.1).collect();
                ids.dedup();
                for w in ids.windows(2) {
                    let (u, v) = (w[0], w[1]);
                    if u == v {
                        continue;
                    }
                    let key = (u.min(v), u.max(v), None);
                    if seen.insert(key, ()).is_none() {
                        edges.push(Edge { u, v, arc: None });
                    }
                }
            }
            Curve::Arc(arc) => {
                let mut keyed: Vec<(f64, usize)> = ks
                    .iter()
                    .map(|&k| (arc.offset_of(&occ[k].1.to_f64()), vertex_of[k]))
                    .collect();
                // The start occurrence is the first pushed; full circles end
                // where they start, so pin offsets of the endpoints.
                keyed[0].0 = 0.0;
                keyed[1].0 = arc.sweep;
                keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
                let mut pts: Vec<(f64, usize)> = Vec::new();
                for kv in keyed {
                    if pts.last().map_or(true, |l| l.1 != kv.1) {
                        pts.push(kv);
                    }
                }
                for w in pts.windows(2) {
                    let (u, v) = (w[0].1, w[1].1);
                    let sweep = w[1].0 - w[0].0;
                    if u == v || sweep <= 0.0 {
                        continue;
                    }
                    let piece = ArcGeom {
                        center: arc.center,
                        radius: arc.radius,
                        start: arc.start + w[0].0,
                        sweep,
                    };
                    let key = (u.min(v), u.max(v), Some(piece.key()));
                    if seen.insert(key, ()).is_none() {
                        edges.push(Edge { u, v, arc: Some(piece) });
                    }
                }
            }
        }
    }
    Ok((vertices, edges))
}

/// Maps each occurrence to a vertex id; coincident points share one.
fn merge_points<T: Scalar>(occ: &[(usize, Point<T>)]) -> (Vec<usize>, Vec<Point<T>>) {
    let n = occ.len();
    let approx: Vec<Point<f64>> = occ.iter().map(|(_, p)| p.to_f64()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut uf = UnionFind::new(n);
    if T::EXACT {
        idx.sort_by(|&a, &b| {
            approx[a]
                .x
                .total_cmp(&approx[b].x)
                .then(approx[a].y.total_cmp(&approx[b].y))
                .then_with(|| occ[a].1.lex_cmp(&occ[b].1))
        });
        for w in idx.windows(2) {
            if occ[w[0]].1 == occ[w[1]].1 {
                uf.union(w[0], w[1]);
            }
        }
    } else {
        let tol = f64::tolerance();
        idx.sort_by(|&a, &b| approx[a].x.total_cmp(&approx[b].x));
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k + 1..] {
                if approx[j].x - approx[i].x > tol {
                    break;
                }
                if approx[i].dist2(&approx[j]) <= tol * tol {
                    uf.union(i, j);
                }
            }
        }
    }
    let mut id_of_root: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vertex_of = vec![0; n];
    for i in 0..n {
        let r = uf.find(i);
        let id = *id_of_root.entry(r).or_insert_with(|| {
            vertices.push(occ[r].1.clone());
            vertices.len() - 1
        });
        vertex_of[i] = id;
    }
    (vertex_of, vertices)
}

/// Outgoing direction and signed curvature of half-edge `h` at its origin.
fn tangent(vertices: &[Point<f64>], edges: &[Edge], h: usize) -> (Point<f64>, f64) {
    let e = &edges[h / 2];
    let forward = h % 2 == 0;
    let (o, t) = if forward { (e.u, e.v) } else { (e.v, e.u) };
    match &e.arc {
        None => (vertices[t].sub(&vertices[o]), 0.0),
        Some(arc) => {
            let theta = if forward { arc.start } else { arc.start + arc.sweep };
            let radial = Point::new(theta.cos(), theta.sin());
            if forward {
                (radial.perp(), 1.0 / arc.radius)
            } else {
                (radial.perp().scale(&-1.0), -1.0 / arc.radius)
            }
        }
    }
}

fn half_plane<T: Scalar>(d: &Point<T>) -> u8 {
    if d.y.is_pos() || (d.y.is_zero() && d.x.is_pos()) {
        0
    } else {
        1
    }
}

/// Builds the DCEL, groups cycles into faces and keeps faces in the region.
fn assemble<T: Scalar>(
    region: PolygonWithHoles<T>,
    vertices: Vec<Point<T>>,
    edges: Vec<Edge>,
    budget: &Budget,
) -> Result<PlanarSubdivision<T>> {
    let nv = vertices.len();
    let nh = edges.len() * 2;
    let approx: Vec<Point<f64>> = vertices.iter().map(|p| p.to_f64()).collect();
    let origin = |h: usize| if h % 2 == 0 { edges[h / 2].u } else { edges[h / 2].v };

    let mut around: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for h in 0..nh {
        around[origin(h)].push(h);
    }
    let mut pos_in = vec![0usize; nh];
    for list in around.iter_mut() {
        if T::EXACT {
            // Segment-only: exact angular order of the direction vectors.
            list.sort_by(|&a, &b| {
                let da = vertices[origin(a ^ 1)].sub(&vertices[origin(a)]);
                let db = vertices[origin(b ^ 1)].sub(&vertices[origin(b)]);
                half_plane(&da).cmp(&half_plane(&db)).then_with(|| {
                    let c = da.cross(&db);
                    if c.is_pos() {
                        Ordering::Less
                    } else if c.is_neg() {
                        Ordering::Greater
                    } else {
                        Ordering::Equal
                    }
                })
            });
        } else {
            let keyed: Vec<(usize, f64, f64)> = list
                .iter()
                .map(|&h| {
                    let (d, k) = tangent(&approx, &edges, h);
                    (h, d.y.atan2(d.x), k)
                })
                .collect();
            let mut keyed = keyed;
            keyed.sort_by(|a, b| {
                if (a.1 - b.1).abs() <= 1e-9 {
                    a.2.total_cmp(&b.2)
                } else {
                    a.1.total_cmp(&b.1)
                }
            });
            *list = keyed.into_iter().map(|k| k.0).collect();
        }
        for (i, &h) in list.iter().enumerate() {
            pos_in[h] = i;
        }
    }
    let mut next = vec![0usize; nh];
    for h in 0..nh {
        let twin = h ^ 1;
        let v = origin(twin);
        let list = &around[v];
        let k = pos_in[twin];
        next[h] = list[(k + list.len() - 1) % list.len()];
    }

    let mut uf = UnionFind::new(nv);
    for e in &edges {
        uf.union(e.u, e.v);
    }
    let mut comp_id: HashMap<usize, usize> = HashMap::new();
    for v in 0..nv {
        let r = uf.find(v);
        let len = comp_id.len();
        comp_id.entry(r).or_insert(len);
    }
    let components = comp_id.len();

    // Trace cycles.
    let mut seen = vec![false; nh];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for h0 in 0..nh {
        if seen[h0] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut h = h0;
        while !seen[h] {
            seen[h] = true;
            cyc.push(h);
            h = next[h];
        }
        cycles.push(cyc);
    }
    let mut areas = Vec::with_capacity(cycles.len());
    let mut positive = Vec::with_capacity(cycles.len());
    for c in &cycles {
        let a = cycle_area_f64(&approx, &edges, c);
        let pos = if T::EXACT {
            let mut s = T::zero();
            for &h in c {
                s = s + vertices[origin(h)].cross(&vertices[origin(h ^ 1)]);
            }
            s.is_pos()
        } else {
            a > 0.0
        };
        areas.push(a);
        positive.push(pos);
    }
    let cycle_bbox: Vec<[f64; 4]> = cycles
        .iter()
        .map(|c| {
            let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
            for &h in c {
                let e = &edges[h / 2];
                let eb = match &e.arc {
                    None => {
                        let (p, q) = (&approx[e.u], &approx[e.v]);
                        [p.x.min(q.x), p.x.max(q.x), p.y.min(q.y), p.y.max(q.y)]
                    }
                    Some(a) => a.bbox(),
                };
                b[0] = b[0].min(eb[0]);
                b[1] = b[1].max(eb[1]);
                b[2] = b[2].min(eb[2]);
                b[3] = b[3].max(eb[3]);
            }
            b
        })
        .collect();
    let comp_of_cycle: Vec<usize> = cycles.iter().map(|c| comp_id[&uf.find(origin(c[0]))]).collect();

    let pos_ids: Vec<usize> = (0..cycles.len()).filter(|&i| positive[i]).collect();
    let mut holes_of: HashMap<usize, Vec<usize>> = HashMap::new();
    for (n, i) in (0..cycles.len()).filter(|&i| !positive[i]).enumerate() {
        if n % 256 == 0 && budget.exhausted() {
            return Err(Error::Budget);
        }
        let rep = &vertices[origin(cycles[i][0])];
        let ra = &approx[origin(cycles[i][0])];
        let mut best: Option<usize> = None;
        for &j in &pos_ids {
            if comp_of_cycle[j] == comp_of_cycle[i] {
                continue;
            }
            let b = cycle_bbox[j];
            if ra.x < b[0] || ra.x > b[1] || ra.y < b[2] || ra.y > b[3] {
                continue;
            }
            if best.is_some_and(|k| areas[k] <= areas[j]) {
                continue;
            }
            if cycle_locate(&vertices, &edges, &cycles[j], rep) == Location::Inside {
                best = Some(j);
            }
        }
        if let Some(j) = best {
            holes_of.entry(j).or_default().push(i);
        }
    }

    let mut sub = PlanarSubdivision { region, vertices, edges, faces: Vec::new(), components };
    for (n, &j) in pos_ids.iter().enumerate() {
        if n % 256 == 0 && budget.exhausted() {
            return Err(Error::Budget);
        }
        let holes: Vec<Vec<usize>> = holes_of
            .get(&j)
            .map(|v| v.iter().map(|&i| cycles[i].clone()).collect())
            .unwrap_or_default();
        let Some(ip) = interior_point(&sub, &cycles[j], &holes) else {
            continue;
        };
        if sub.region.locate(&ip) != Location::Inside {
            continue;
        }
        let hole_area: f64 = holes.iter().map(|h| cycle_area_f64(&approx, &sub.edges, h)).sum();
        sub.faces.push(Face {
            outer: cycles[j].clone(),
            holes,
            interior: ip,
            area: areas[j] + hole_area,
            label: BTreeSet::new(),
        });
    }
    Ok(sub)
}

fn cycle_area_f64(approx: &[Point<f64>], edges: &[Edge], c: &[usize]) -> f64 {
    let mut s = 0.0;
    for &h in c {
        let e = &edges[h / 2];
        let (o, t) = if h % 2 == 0 { (e.u, e.v) } else { (e.v, e.u) };
        s += approx[o].cross(&approx[t]) * 0.5;
        if let Some(arc) = &e.arc {
            let sw = if h % 2 == 0 { arc.sweep } else { -arc.sweep };
            s += 0.5 * arc.radius * arc.radius * (sw - sw.sin());
        }
    }
    s
}

fn cycle_locate<T: Scalar>(vertices: &[Point<T>], edges: &[Edge], cycle: &[usize], p: &Point<T>) -> Location {
    let has_arc = cycle.iter().any(|&h| edges[h / 2].arc.is_some());
    let origin = |h: usize| if h % 2 == 0 { edges[h / 2].u } else { edges[h / 2].v };
    if !has_arc {
        let pts: Vec<Point<T>> = cycle.iter().map(|&h| vertices[origin(h)].clone()).collect();
        return point_in_cycle(p, &pts);
    }
    let q = p.to_f64();
    let tol = f64::tolerance();
    let mut odd = false;
    for &h in cycle {
        let e = &edges[h / 2];
        let a = vertices[origin(h)].to_f64();
        let b = vertices[origin(h ^ 1)].to_f64();
        match &e.arc {
            None => {
                if crate::geom::on_segment(&q, &a, &b) {
                    return Location::Boundary;
                }
                let up = a.y <= q.y && b.y > q.y;
                let down = b.y <= q.y && a.y > q.y;
                if (up || down) && a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x) > q.x {
                    odd = !odd;
                }
            }
            Some(arc) => {
                if (q.dist(&arc.center) - arc.radius).abs() <= tol && arc.spans(&q, tol) {
                    return Location::Boundary;
                }
                let up = a.y <= q.y && b.y > q.y;
                let down = b.y <= q.y && a.y > q.y;
                if up || down {
                    let mid = arc.start + 0.5 * arc.sweep;
                    let dy = q.y - arc.center.y;
                    let dx = (arc.radius * arc.radius - dy * dy).max(0.0).sqrt();
                    let x = arc.center.x + mid.cos().signum() * dx;
                    if x > q.x {
                        odd = !odd;
                    }
                }
            }
        }
    }
    if odd {
        Location::Inside
    } else {
        Location::Outside
    }
}

fn polyline<T: Scalar>(vertices: &[Point<T>], edges: &[Edge], cycle: &[usize], per_quarter: usize) -> Vec<Point<f64>> {
    let mut out = Vec::new();
    for &h in cycle {
        let e = &edges[h / 2];
        let forward = h % 2 == 0;
        let o = if forward { e.u } else { e.v };
        out.push(vertices[o].to_f64());
        if let Some(arc) = &e.arc {
            let k = ((arc.sweep / FRAC_PI_2) * per_quarter as f64).ceil().max(1.0) as usize;
            for i in 1..k {
                let f = i as f64 / k as f64;
                let f = if forward { f } else { 1.0 - f };
                out.push(arc.point_at(arc.start + f * arc.sweep));
            }
        }
    }
    out
}

/// Point strictly inside the face bounded by `outer` minus `holes`: the
/// centroid of the fattest ear of a polyline approximation, verified
/// against the true boundary.
fn interior_point<T: Scalar>(sub: &PlanarSubdivision<T>, outer: &[usize], holes: &[Vec<usize>]) -> Option<Point<T>> {
    let verify = |p: &Point<T>| {
        if cycle_locate(&sub.vertices, &sub.edges, outer, p) != Location::Inside {
            return false;
        }
        holes
            .iter()
            .all(|h| cycle_locate(&sub.vertices, &sub.edges, h, p) == Location::Outside)
    };
    for per_quarter in [4usize, 16, 64] {
        let poly = polyline(&sub.vertices, &sub.edges, outer, per_quarter);
        let hole_pts: Vec<Point<f64>> = holes
            .iter()
            .flat_map(|h| polyline(&sub.vertices, &sub.edges, h, per_quarter))
            .collect();
        for tri in ranked_ears(&poly, &hole_pts) {
            let c = Point::new(
                (tri[0].x + tri[1].x + tri[2].x) / 3.0,
                (tri[0].y + tri[1].y + tri[2].y) / 3.0,
            );
            let p: Point<T> = Point::from_f64(c.x, c.y);
            if verify(&p) {
                return Some(p);
            }
        }
        if !T::EXACT && sub.edges.iter().all(|e| e.arc.is_none()) {
            break;
        }
    }
    if T::EXACT {
        // Exact ear search on the true cycle.
        let origin = |h: usize| sub.half_origin(h);
        let pts: Vec<Point<T>> = outer.iter().map(|&h| sub.vertices[origin(h)].clone()).collect();
        let hole_pts: Vec<Point<T>> =
            holes.iter().flatten().map(|&h| sub.vertices[origin(h)].clone()).collect();
        let n = pts.len();
        for i in 0..n {
            let (a, b, c) = (&pts[(i + n - 1) % n], &pts[i], &pts[(i + 1) % n]);
            if orient(a, b, c) <= 0 {
                continue;
            }
            let blocked = pts.iter().chain(hole_pts.iter()).any(|p| {
                !(p == a || p == b || p == c)
                    && orient(a, b, p) >= 0
                    && orient(b, c, p) >= 0
                    && orient(c, a, p) >= 0
            });
            if !blocked {
                let three = T::two() + T::one();
                let s = a.add(b).add(c);
                let g = Point::new(s.x / three.clone(), s.y / three);
                if verify(&g) {
                    return Some(g);
                }
            }
        }
    }
    // Ears can all be blocked by dangling curves; step inward from the
    // midpoints of the longest boundary edges instead.
    let poly = polyline(&sub.vertices, &sub.edges, outer, 16);
    let n = poly.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| poly[(j + 1) % n].dist2(&poly[j]).total_cmp(&poly[(i + 1) % n].dist2(&poly[i])));
    for i in idx {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        let len = a.dist(b);
        if len == 0.0 {
            continue;
        }
        let nrm = b.sub(a).perp().scale(&(1.0 / len));
        let m = a.midpoint(b);
        let mut step = len * 0.25;
        while step > 1e-7 {
            let c = m.add(&nrm.scale(&step));
            let p: Point<T> = Point::from_f64(c.x, c.y);
            if verify(&p) {
                return Some(p);
            }
            step *= 0.5;
        }
    }
    None
}

/// Ears of a polyline polygon (counterclockwise) ordered by decreasing
/// inradius. `blockers` are extra points that must not lie in an ear.
fn ranked_ears(poly: &[Point<f64>], blockers: &[Point<f64>]) -> Vec<[Point<f64>; 3]> {
    let n = poly.len();
    if n < 3 {
        return Vec::new();
    }
    let mut ears: Vec<(f64, [Point<f64>; 3])> = Vec::new();
    for i in 0..n {
        let a = poly[(i + n - 1) % n];
        let b = poly[i];
        let c = poly[(i + 1) % n];
        let area2 = b.sub(&a).cross(&c.sub(&a));
        if area2 <= 0.0 {
            continue;
        }
        let inside = |p: &Point<f64>| {
            if p.coincides(&a) || p.coincides(&b) || p.coincides(&c) {
                return false;
            }
            b.sub(&a).cross(&p.sub(&a)) >= 0.0
                && c.sub(&b).cross(&p.sub(&b)) >= 0.0
                && a.sub(&c).cross(&p.sub(&c)) >= 0.0
        };
        if poly.iter().chain(blockers.iter()).any(inside) {
            continue;
        }
        let per = a.dist(&b) + b.dist(&c) + c.dist(&a);
        ears.push((area2 / per, [a, b, c]));
    }
    ears.sort_by(|x, y| y.0.total_cmp(&x.0));
    ears.into_iter().map(|e| e.1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use std::f64::consts::PI;

    fn square<T: Scalar>(s: f64) -> PolygonWithHoles<T> {
        PolygonWithHoles::simple(vec![
            Point::from_f64(0.0, 0.0),
            Point::from_f64(s, 0.0),
            Point::from_f64(s, s),
            Point::from_f64(0.0, s),
        ])
        .unwrap()
    }

    #[test]
    fn bare_square() {
        let p = square::<f64>(1.0);
        let s = PlanarSubdivision::build(&p, &[]).unwrap();
        assert_eq!(s.counts(), FeatureCounts { vertices: 4, edges: 4, faces: 1 });
        assert!(s.euler_holds());
    }

    #[test]
    fn diagonals_exact() {
        let p = square::<Rational>(1.0);
        let d = |a: (f64, f64), b: (f64, f64)| Curve::Segment(Point::from_f64(a.0, a.1), Point::from_f64(b.0, b.1));
        let s = PlanarSubdivision::build(&p, &[d((0.0, 0.0), (1.0, 1.0)), d((1.0, 0.0), (0.0, 1.0))]).unwrap();
        assert_eq!(s.counts(), FeatureCounts { vertices: 5, edges: 8, faces: 4 });
        assert!(s.euler_holds());
        let total: f64 = s.faces.iter().map(|f| f.area).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_inside_square() {
        let p = square::<f64>(4.0);
        let c = Curve::Arc(ArcGeom::circle(Point::new(2.0, 2.0), 1.0));
        let s = PlanarSubdivision::build(&p, &[c]).unwrap();
        assert_eq!(s.faces.len(), 2);
        assert!(s.euler_holds());
        let total: f64 = s.faces.iter().map(|f| f.area).sum();
        assert!((total - 16.0).abs() < 1e-9, "{total}");
        let disk = s.faces.iter().find(|f| f.holes.is_empty()).unwrap();
        assert!((disk.area - PI).abs() < 1e-9);
        assert_eq!(s.locate(&Point::new(2.0, 2.0)), Some(Feature::Face(s.faces.iter().position(|f| f.holes.is_empty()).unwrap())));
    }

    #[test]
    fn arc_crossing_boundary() {
        let p = square::<f64>(2.0);
        let c = Curve::Arc(ArcGeom { center: Point::new(0.0, 0.0), radius: 1.0, start: 0.0, sweep: FRAC_PI_2 });
        let s = PlanarSubdivision::build(&p, &[c]).unwrap();
        assert_eq!(s.faces.len(), 2);
        assert!(s.euler_holds());
        let small = s.faces.iter().map(|f| f.area).fold(f64::INFINITY, f64::min);
        assert!((small - FRAC_PI_2 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn holes_count_in_euler() {
        let outer = vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(4.0, 4.0),
            Point::new(0.0, 4.0),
        ];
        let hole = vec![
            Point::new(1.0, 1.0),
            Point::new(1.0, 3.0),
            Point::new(3.0, 3.0),
            Point::new(3.0, 1.0),
        ];
        let p = PolygonWithHoles::new(outer, vec![hole]).unwrap();
        let s = PlanarSubdivision::build(&p, &[]).unwrap();
        assert_eq!(s.faces.len(), 1);
        assert_eq!(s.components, 2);
        assert!(s.euler_holds());
        assert!((s.faces[0].area - 12.0).abs() < 1e-12);
    }

    #[test]
    fn overlay_of_diagonals() {
        let p = square::<f64>(1.0);
        let mut a = PlanarSubdivision::build(&p, &[Curve::Segment(Point::new(0.0, 0.0), Point::new(1.0, 1.0))]).unwrap();
        let mut b = PlanarSubdivision::build(&p, &[Curve::Segment(Point::new(1.0, 0.0), Point::new(0.0, 1.0))]).unwrap();
        for (i, f) in a.faces.iter_mut().enumerate() {
            f.label.insert(i);
        }
        for (i, f) in b.faces.iter_mut().enumerate() {
            f.label.insert(10 + i);
        }
        let o = overlay(&[a.clone(), b]).unwrap();
        assert_eq!(o.faces.len(), 4);
        assert!(o.faces.iter().all(|f| f.label.len() == 2));
        let same = overlay(&[a.clone()]).unwrap();
        assert_eq!(same.counts(), a.counts());
    }
}
