//! Ear clipping after bridging holes into the outer cycle.

use crate::geom::{orient, orient_raw, point_in_cycle, Location, Point, SegmentHit, Triangle};
use crate::scalar::Scalar;

/// Triangulates a face given by a counterclockwise outer cycle and clockwise
/// holes. Degenerate faces yield an empty sequence.
pub fn triangulate_face<T: Scalar>(outer: &[Point<T>], holes: &[Vec<Point<T>>]) -> Vec<Triangle<T>> {
    let outer = clean_cycle(outer);
    if outer.len() < 3 {
        return Vec::new();
    }
    let holes: Vec<Vec<Point<T>>> = holes
        .iter()
        .map(|h| clean_cycle(h))
        .filter(|h| h.len() >= 3)
        .collect();
    let merged = bridge_holes(outer, holes);
    ear_clip(merged)
}

/// Drops repeated and collinear vertices.
fn clean_cycle<T: Scalar>(c: &[Point<T>]) -> Vec<Point<T>> {
    let mut v: Vec<Point<T>> = Vec::with_capacity(c.len());
    for p in c {
        if v.last().map_or(true, |q| !q.coincides(p)) {
            v.push(p.clone());
        }
    }
    while v.len() > 1 && v[0].coincides(v.last().unwrap()) {
        v.pop();
    }
    let mut changed = true;
    while changed && v.len() >= 3 {
        changed = false;
        let n = v.len();
        for i in 0..n {
            let a = &v[(i + n - 1) % n];
            let b = &v[i];
            let c = &v[(i + 1) % n];
            if orient(a, b, c) == 0 {
                v.remove(i);
                changed = true;
                break;
            }
        }
    }
    v
}

fn bridge_holes<T: Scalar>(mut poly: Vec<Point<T>>, mut holes: Vec<Vec<Point<T>>>) -> Vec<Point<T>> {
    // Rightmost holes first so bridges never need to cross unprocessed holes
    // in the common case; the explicit crossing test covers the rest.
    holes.sort_by(|a, b| {
        let ma = max_x(a);
        let mb = max_x(b);
        mb.partial_cmp(&ma).unwrap_or(std::cmp::Ordering::Equal)
    });
    for hi in 0..holes.len() {
        let hole = holes[hi].clone();
        let others: Vec<&Vec<Point<T>>> = holes[hi + 1..].iter().collect();
        let mut done = false;
        let mut hole_order: Vec<usize> = (0..hole.len()).collect();
        hole_order.sort_by(|&a, &b| hole[b].x.partial_cmp(&hole[a].x).unwrap_or(std::cmp::Ordering::Equal));
        'outer: for &mi in &hole_order {
            let m = &hole[mi];
            let mf = m.to_f64();
            let mut cands: Vec<usize> = (0..poly.len()).collect();
            cands.sort_by(|&a, &b| {
                poly[a].to_f64().dist2(&mf).total_cmp(&poly[b].to_f64().dist2(&mf))
            });
            for vi in cands {
                if bridge_ok(&poly, vi, &hole, mi, &others) {
                    let mut merged = Vec::with_capacity(poly.len() + hole.len() + 2);
                    merged.extend_from_slice(&poly[..=vi]);
                    for k in 0..=hole.len() {
                        merged.push(hole[(mi + k) % hole.len()].clone());
                    }
                    merged.push(poly[vi].clone());
                    merged.extend_from_slice(&poly[vi + 1..]);
                    poly = merged;
                    done = true;
                    break 'outer;
                }
            }
        }
        if !done {
            // Unbridgeable input; fall back to the outer cycle only.
            continue;
        }
    }
    poly
}

fn max_x<T: Scalar>(c: &[Point<T>]) -> f64 {
    c.iter().map(|p| p.x.as_f64()).fold(f64::NEG_INFINITY, f64::max)
}

fn bridge_ok<T: Scalar>(
    poly: &[Point<T>],
    vi: usize,
    hole: &[Point<T>],
    mi: usize,
    others: &[&Vec<Point<T>>],
) -> bool {
    let n = poly.len();
    let v = &poly[vi];
    let m = &hole[mi];
    if v.coincides(m) {
        return false;
    }
    let a = &poly[(vi + n - 1) % n];
    let b = &poly[(vi + 1) % n];
    if !in_wedge(a, v, b, &m.sub(v)) {
        return false;
    }
    let hn = hole.len();
    let ha = &hole[(mi + hn - 1) % hn];
    let hb = &hole[(mi + 1) % hn];
    if !in_wedge(ha, m, hb, &v.sub(m)) {
        return false;
    }
    let cycles = std::iter::once(poly).chain(std::iter::once(hole)).chain(others.iter().map(|h| h.as_slice()));
    for c in cycles {
        let k = c.len();
        for i in 0..k {
            let p = &c[i];
            let q = &c[(i + 1) % k];
            match crate::geom::segment_intersection(v, m, p, q) {
                SegmentHit::None => {}
                SegmentHit::Overlap { .. } => return false,
                SegmentHit::Point { p: x, .. } => {
                    if !(x.coincides(v) || x.coincides(m)) {
                        return false;
                    }
                }
            }
        }
    }
    for h in others {
        if point_in_cycle(&v.midpoint(m), h) != Location::Outside {
            return false;
        }
    }
    true
}

/// Direction `d` points into the interior angle at `v` (interior on the
/// left of `a -> v -> b`).
fn in_wedge<T: Scalar>(a: &Point<T>, v: &Point<T>, b: &Point<T>, d: &Point<T>) -> bool {
    let to_a = a.sub(v);
    let to_b = b.sub(v);
    let convex = orient(a, v, b) > 0;
    let left = |u: &Point<T>, w: &Point<T>| u.cross(w).is_pos();
    if convex {
        left(&to_b, d) && left(d, &to_a)
    } else {
        let on_or_left = |u: &Point<T>, w: &Point<T>| !u.cross(w).is_neg();
        !(on_or_left(&to_a, d) && on_or_left(d, &to_b))
    }
}

fn ear_clip<T: Scalar>(mut v: Vec<Point<T>>) -> Vec<Triangle<T>> {
    let mut out = Vec::with_capacity(v.len().saturating_sub(2));
    let mut guard = 0usize;
    while v.len() > 3 {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        let n = v.len();
        let mut clipped = false;
        // Degenerate vertices go first; they cost nothing to remove.
        for i in 0..n {
            let a = &v[(i + n - 1) % n];
            let b = &v[i];
            let c = &v[(i + 1) % n];
            if orient(a, b, c) == 0 {
                v.remove(i);
                clipped = true;
                break;
            }
        }
        if clipped {
            continue;
        }
        for i in 0..n {
            if is_ear(&v, i) {
                let a = v[(i + n - 1) % n].clone();
                let c = v[(i + 1) % n].clone();
                out.push(Triangle::new(a, v[i].clone(), c));
                v.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // No clean ear; clip the first convex corner.
            let pos = (0..n).find(|&i| orient_raw(&v[(i + n - 1) % n], &v[i], &v[(i + 1) % n]) > 0);
            match pos {
                Some(i) => {
                    let a = v[(i + n - 1) % n].clone();
                    let c = v[(i + 1) % n].clone();
                    out.push(Triangle::new(a, v[i].clone(), c));
                    v.remove(i);
                }
                None => break,
            }
        }
    }
    if v.len() == 3 && orient_raw(&v[0], &v[1], &v[2]) > 0 {
        out.push(Triangle::new(v[0].clone(), v[1].clone(), v[2].clone()));
    }
    out
}

fn is_ear<T: Scalar>(v: &[Point<T>], i: usize) -> bool {
    let n = v.len();
    let a = &v[(i + n - 1) % n];
    let b = &v[i];
    let c = &v[(i + 1) % n];
    if orient(a, b, c) <= 0 {
        return false;
    }
    for (k, p) in v.iter().enumerate() {
        if k == i || k == (i + n - 1) % n || k == (i + 1) % n {
            continue;
        }
        if p.coincides(a) || p.coincides(b) || p.coincides(c) {
            // A bridge duplicate of a corner blocks only if the polygon
            // re-enters the ear there.
            if p.coincides(b) {
                let pa = &v[(k + n - 1) % n];
                let pc = &v[(k + 1) % n];
                if strictly_inside(pa, a, b, c) || strictly_inside(pc, a, b, c) {
                    return false;
                }
            }
            continue;
        }
        if orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0 {
            return false;
        }
    }
    true
}

fn strictly_inside<T: Scalar>(p: &Point<T>, a: &Point<T>, b: &Point<T>, c: &Point<T>) -> bool {
    orient(a, b, p) > 0 && orient(b, c, p) > 0 && orient(c, a, p) > 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn total<T: Scalar>(ts: &[Triangle<T>]) -> f64 {
        ts.iter().map(|t| t.area().as_f64()).sum()
    }

    #[test]
    fn convex_quad() {
        let q = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let t = triangulate_face(&q, &[]);
        assert_eq!(t.len(), 2);
        assert_eq!(total(&t), 2.0);
    }

    #[test]
    fn square_with_hole_exact() {
        let f = |v: &[(i64, i64)]| -> Vec<Point<Rational>> {
            v.iter().map(|&(x, y)| Point::from_f64(x as f64, y as f64)).collect()
        };
        let outer = f(&[(0, 0), (4, 0), (4, 4), (0, 4)]);
        let hole = f(&[(1, 1), (1, 3), (3, 3), (3, 1)]);
        let t = triangulate_face(&outer, &[hole]);
        assert!(t.len() >= 8);
        let area: Rational = t.iter().fold(Rational::from_integer(0.into()), |s, x| s + x.area());
        assert_eq!(area, Rational::from_integer(12.into()));
    }

    #[test]
    fn degenerate_face_is_empty() {
        let line = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(triangulate_face(&line, &[]).is_empty());
    }
}
