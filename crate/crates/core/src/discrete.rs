//! Step-function solver: arrangement of visibility and ring curves, one
//! witness per feature, exact LP over the witnesses.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use crate::arrangement::{ArcGeom, Curve, Feature, FeatureCounts, PlanarSubdivision};
use crate::budget::Budget;
use crate::error::{input, Error, Result};
use crate::fading::{octagon_radius, octagon_ring, ring_radii, tau, tau_exact, FadingSpec, RingMode, StepFadingSpec};
use crate::geom::{param_on, Point, PolygonWithHoles, SegmentHit};
use crate::lp::{IlluminationLp, LpStatus, Solution};
use crate::scalar::Scalar;
use crate::visibility::{visibility_overlay, visibility_polygons, VisibilityPolygon};
use crate::Point64;

/// Slack below 1 tolerated before a feature counts as dark.
pub const DARK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Witness<T> {
    pub feature: Feature,
    pub point: Point<T>,
    /// Step coefficients of the guards that see the point.
    pub row: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct FadingArrangement<T> {
    pub subdivision: PlanarSubdivision<T>,
    pub guards: Vec<Point<T>>,
    pub visibility: Vec<VisibilityPolygon<T>>,
    pub fading: FadingSpec,
    pub step: StepFadingSpec,
    /// Rings drawn per guard (before clipping).
    pub ring_counts: Vec<usize>,
    pub witnesses: Vec<Witness<T>>,
}

impl<T: Scalar> FadingArrangement<T> {
    /// Every feature is seen by some guard.
    pub fn feasible(&self) -> bool {
        self.witnesses.iter().all(|w| !w.row.is_empty())
    }

    pub fn counts(&self) -> FeatureCounts {
        self.subdivision.counts()
    }

    pub fn coefficients(&self, w: &Point<T>) -> Vec<(usize, f64)> {
        coefficient_row(&self.guards, &self.visibility, w, &self.fading, &self.step)
    }

    /// Step illumination of `w` under intensities `x`.
    pub fn illumination(&self, w: &Point<T>, x: &[f64]) -> f64 {
        self.coefficients(w).iter().map(|&(g, c)| c * x[g]).sum()
    }
}

fn coefficient_row<T: Scalar>(
    guards: &[Point<T>],
    vis: &[VisibilityPolygon<T>],
    w: &Point<T>,
    fading: &FadingSpec,
    step: &StepFadingSpec,
) -> Vec<(usize, f64)> {
    guards
        .iter()
        .zip(vis)
        .enumerate()
        .filter(|(_, (_, v))| v.contains(w))
        .map(|(i, (g, _))| (i, step_coefficient(g, w, fading, step)))
        .collect()
}

fn step_coefficient<T: Scalar>(g: &Point<T>, w: &Point<T>, fading: &FadingSpec, step: &StepFadingSpec) -> f64 {
    if T::EXACT {
        tau_exact(&g.cast(), &w.cast(), fading, step)
    } else {
        tau(&g.to_f64(), &w.to_f64(), fading, step)
    }
}

/// Arrangement of the region, all visibility polygons and every guard's
/// rings clipped to its visibility polygon. Circle rings need the floating
/// kernel.
pub fn build_fading_arrangement<T: Scalar>(
    poly: &PolygonWithHoles<T>,
    guards: &[Point<T>],
    fading: &FadingSpec,
    step: &StepFadingSpec,
) -> Result<FadingArrangement<T>> {
    build_fading_arrangement_within(poly, guards, fading, step, &Budget::unlimited())
}

/// [`build_fading_arrangement`] that stops with [`Error::Budget`] once
/// `budget` runs out.
pub fn build_fading_arrangement_within<T: Scalar>(
    poly: &PolygonWithHoles<T>,
    guards: &[Point<T>],
    fading: &FadingSpec,
    step: &StepFadingSpec,
    budget: &Budget,
) -> Result<FadingArrangement<T>> {
    if step.ring_mode() == RingMode::Circle && T::EXACT {
        return Err(input("circle rings need the floating-point kernel"));
    }
    let visibility = visibility_polygons(poly, guards)?;
    let mut curves: Vec<Curve<T>> = Vec::new();
    let mut ring_counts = Vec::with_capacity(guards.len());
    for (g, vp) in guards.iter().zip(&visibility) {
        for (a, b) in vp.edges() {
            curves.push(Curve::Segment(a.clone(), b.clone()));
        }
        let gf = g.to_f64();
        let reach = vp.boundary.iter().map(|p| p.to_f64().dist(&gf)).fold(0.0, f64::max);
        let rings = match step.ring_mode() {
            RingMode::Circle => {
                let radii = ring_radii(fading, step, reach);
                for r in &radii {
                    for arc in clip_circle(vp, &gf, *r) {
                        curves.push(Curve::Arc(arc));
                    }
                }
                radii.len()
            }
            RingMode::Octagon => {
                let gq = g.cast::<crate::Rational>();
                let inradius = (PI / 8.0).cos();
                let mut z = 0i64;
                loop {
                    if budget.exhausted() {
                        return Err(Error::Budget);
                    }
                    let ring: Vec<Point<T>> =
                        octagon_ring(&gq, z, fading, step).iter().map(|p| p.cast()).collect();
                    for k in 0..ring.len() {
                        let (a, b) = (&ring[k], &ring[(k + 1) % ring.len()]);
                        for (p, q) in clip_segment(vp, a, b) {
                            curves.push(Curve::Segment(p, q));
                        }
                    }
                    if fading.alpha() == 0.0 || octagon_radius(z, fading, step) * inradius > reach {
                        break;
                    }
                    z += 1;
                }
                (z + 1) as usize
            }
        };
        ring_counts.push(rings);
    }
    let subdivision = PlanarSubdivision::build_within(poly, &curves, budget)?;
    let mut witnesses = Vec::new();
    for (k, (feature, point)) in subdivision.feature_points().into_iter().enumerate() {
        if k % 256 == 0 && budget.exhausted() {
            return Err(Error::Budget);
        }
        let row = coefficient_row(guards, &visibility, &point, fading, step);
        witnesses.push(Witness { feature, point, row });
    }
    Ok(FadingArrangement {
        subdivision,
        guards: guards.to_vec(),
        visibility,
        fading: *fading,
        step: *step,
        ring_counts,
        witnesses,
    })
}

/// Arcs of the circle `(c, r)` inside the closed polygon `vp`.
fn clip_circle<T: Scalar>(vp: &VisibilityPolygon<T>, c: &Point64, r: f64) -> Vec<ArcGeom> {
    let mut angles: Vec<f64> = Vec::new();
    for (a, b) in vp.edges() {
        for p in segment_circle(&a.to_f64(), &b.to_f64(), c, r) {
            angles.push((p.y - c.y).atan2(p.x - c.x).rem_euclid(TAU));
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if angles.len() > 1 && angles[0] + TAU - angles[angles.len() - 1] < 1e-12 {
        angles.pop();
    }
    let inside = |theta: f64| {
        let p = Point::new(c.x + r * theta.cos(), c.y + r * theta.sin());
        vp.contains(&Point::from_f64(p.x, p.y))
    };
    if angles.len() < 2 {
        // At most a tangency: the circle is entirely on one side.
        let probe = angles.first().map_or(0.0, |a| a + PI);
        return if inside(probe) { vec![ArcGeom::circle(*c, r)] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for i in 0..angles.len() {
        let s = angles[i];
        let e = if i + 1 < angles.len() { angles[i + 1] } else { angles[0] + TAU };
        let sweep = e - s;
        if sweep <= 1e-12 {
            continue;
        }
        if inside(s + sweep / 2.0) {
            out.push(ArcGeom { center: *c, radius: r, start: s, sweep });
        }
    }
    out
}

fn segment_circle(a: &Point64, b: &Point64, c: &Point64, r: f64) -> Vec<Point64> {
    let d = b.sub(a);
    let f = a.sub(c);
    let qa = d.dot(&d);
    if qa == 0.0 {
        return Vec::new();
    }
    let qb = 2.0 * f.dot(&d);
    let qc = f.dot(&f) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let mut ts = vec![(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)];
    ts.dedup();
    let tol = 1e-12;
    ts.into_iter()
        .filter(|t| *t >= -tol && *t <= 1.0 + tol)
        .map(|t| a.lerp(b, &t.clamp(0.0, 1.0)))
        .collect()
}

/// Pieces of segment `ab` inside the closed polygon `vp`.
fn clip_segment<T: Scalar>(vp: &VisibilityPolygon<T>, a: &Point<T>, b: &Point<T>) -> Vec<(Point<T>, Point<T>)> {
    let mut ts: Vec<T> = vec![T::zero(), T::one()];
    let (af, bf) = (a.to_f64(), b.to_f64());
    let lo = [af.x.min(bf.x), af.x.max(bf.x), af.y.min(bf.y), af.y.max(bf.y)];
    for (p, q) in vp.edges() {
        let (pf, qf) = (p.to_f64(), q.to_f64());
        let slack = 1e-7;
        if pf.x.max(qf.x) < lo[0] - slack
            || pf.x.min(qf.x) > lo[1] + slack
            || pf.y.max(qf.y) < lo[2] - slack
            || pf.y.min(qf.y) > lo[3] + slack
        {
            continue;
        }
        match crate::geom::segment_intersection(a, b, p, q) {
            SegmentHit::None => {}
            SegmentHit::Point { p: x, .. } => ts.push(param_on(&x, a, b)),
            SegmentHit::Overlap { t0, t1 } => {
                ts.push(t0);
                ts.push(t1);
            }
        }
    }
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ts.dedup_by(|x, y| x == y || (!T::EXACT && (x.clone() - y.clone()).abs().as_f64() <= 1e-12));
    let mut out = Vec::new();
    for w in ts.windows(2) {
        let (p, q) = (a.lerp(b, &w[0]), a.lerp(b, &w[1]));
        if p.coincides(&q) {
            continue;
        }
        if vp.contains(&p.midpoint(&q)) {
            out.push((p, q));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscreteMode {
    Full,
    Separation,
}

#[derive(Clone, Debug)]
pub struct DiscreteOptions {
    pub mode: DiscreteMode,
    pub iteration_limit: usize,
    pub budget: Budget,
}

impl Default for DiscreteOptions {
    fn default() -> Self {
        DiscreteOptions { mode: DiscreteMode::Full, iteration_limit: 1000, budget: Budget::unlimited() }
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteRunReport {
    pub solution: Solution,
    pub iterations: usize,
    pub witnesses_used: usize,
    pub features: FeatureCounts,
    pub ring_counts: Vec<usize>,
    pub wall_time: Duration,
    pub declared_factor: f64,
    /// `objective / declared_factor`, a lower bound on the exact optimum.
    pub lower_bound: f64,
    /// Separation mode stopped at its iteration limit.
    pub iteration_limit_hit: bool,
    pub lp: IlluminationLp,
}

/// One witness per feature.
pub fn place_witnesses<T: Scalar>(arr: &FadingArrangement<T>) -> Vec<Point<T>> {
    arr.witnesses.iter().map(|w| w.point.clone()).collect()
}

pub fn solve_discrete<T: Scalar>(
    poly: &PolygonWithHoles<T>,
    guards: &[Point<T>],
    fading: &FadingSpec,
    step: &StepFadingSpec,
    options: &DiscreteOptions,
) -> Result<DiscreteRunReport> {
    let start = Instant::now();
    let arr = build_fading_arrangement_within(poly, guards, fading, step, &options.budget)?;
    if options.budget.exhausted() {
        return Err(Error::Budget);
    }
    if !arr.feasible() {
        return Err(Error::Infeasible("some part of the polygon is seen by no guard".into()));
    }
    let guards64: Vec<Point64> = guards.iter().map(|g| g.to_f64()).collect();
    let mut lp = IlluminationLp::new(guards64);
    let mut iterations = 0;
    let mut limit_hit = false;
    let solution = match options.mode {
        DiscreteMode::Full => {
            for w in &arr.witnesses {
                lp.add_row(w.point.to_f64(), w.row.clone());
            }
            iterations = 1;
            lp.solve()
        }
        DiscreteMode::Separation => {
            let overlay = visibility_overlay(poly, guards)?;
            for f in &overlay.subdivision.faces {
                lp.add_row(f.interior.to_f64(), arr.coefficients(&f.interior));
            }
            let mut used: BTreeSet<usize> = BTreeSet::new();
            loop {
                if options.budget.exhausted() {
                    return Err(Error::Budget);
                }
                let sol = lp.solve();
                iterations += 1;
                if sol.status != LpStatus::Optimal {
                    break sol;
                }
                let x = sol.intensities.values();
                let dark: Vec<usize> = (0..arr.witnesses.len())
                    .filter(|i| !used.contains(i))
                    .filter(|&i| arr.witnesses[i].row.iter().map(|&(g, c)| c * x[g]).sum::<f64>() < 1.0 - DARK_TOL)
                    .collect();
                if dark.is_empty() {
                    break sol;
                }
                if iterations >= options.iteration_limit {
                    limit_hit = true;
                    break Solution { status: LpStatus::IterationLimit, ..sol };
                }
                for i in dark {
                    used.insert(i);
                    lp.add_row(arr.witnesses[i].point.to_f64(), arr.witnesses[i].row.clone());
                }
            }
        }
    };
    let declared_factor = step.declared_factor();
    Ok(DiscreteRunReport {
        lower_bound: solution.objective / declared_factor,
        solution,
        iterations,
        witnesses_used: lp.row_count(),
        features: arr.counts(),
        ring_counts: arr.ring_counts.clone(),
        wall_time: start.elapsed(),
        declared_factor,
        iteration_limit_hit: limit_hit,
        lp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn square<T: Scalar>(side: f64) -> PolygonWithHoles<T> {
        let p = |x: f64, y: f64| Point::from_f64(x, y);
        PolygonWithHoles::simple(vec![p(0.0, 0.0), p(side, 0.0), p(side, side), p(0.0, side)]).unwrap()
    }

    fn run<T: Scalar>(poly: &PolygonWithHoles<T>, g: &[Point<T>], alpha: f64, eps: f64, ring: RingMode, mode: DiscreteMode) -> DiscreteRunReport {
        let f = FadingSpec::new(alpha).unwrap();
        let s = StepFadingSpec::new(eps, ring, &f).unwrap();
        let opts = DiscreteOptions { mode, ..Default::default() };
        solve_discrete(poly, g, &f, &s, &opts).unwrap()
    }

    #[test]
    fn small_convex_costs_one() {
        let p = square::<f64>(0.7);
        let r = run(&p, &[Point::new(0.1, 0.2)], 2.0, 0.5, RingMode::Circle, DiscreteMode::Full);
        assert!((r.solution.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn far_corner_binds() {
        let p = square::<f64>(2f64.sqrt());
        for mode in [DiscreteMode::Full, DiscreteMode::Separation] {
            let r = run(&p, &[Point::new(0.0, 0.0)], 1.0, 1.0, RingMode::Circle, mode);
            assert_eq!(r.solution.status, LpStatus::Optimal);
            assert!((r.solution.objective - 2.0).abs() < 1e-9, "{mode:?} {}", r.solution.objective);
            assert!((r.lower_bound - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn halving_bands() {
        let p = square::<f64>(16.0 / 2f64.sqrt());
        let f = FadingSpec::new(1.0).unwrap();
        let s = StepFadingSpec::circle(1.0).unwrap();
        let arr = build_fading_arrangement(&p, &[Point::new(0.0, 0.0)], &f, &s).unwrap();
        assert_eq!(arr.ring_counts, vec![5]);
        let mut coefs: Vec<f64> = arr.witnesses.iter().filter(|w| matches!(w.feature, Feature::Face(_))).map(|w| w.row[0].1).collect();
        coefs.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(coefs, vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
        assert!(arr.subdivision.euler_holds());
    }

    #[test]
    fn octagon_exact_matches_declared_factor() {
        let pq = square::<Rational>(3.0);
        let g = [Point::from_f64(1.5, 1.5)];
        let r = run(&pq, &g, 1.0, 1.0, RingMode::Octagon, DiscreteMode::Full);
        let exact = 1.5 * 2f64.sqrt();
        assert!(r.solution.objective >= exact - 1e-9);
        assert!(r.solution.objective <= 2.0 * exact + 1e-9);
        let sep = run(&pq, &g, 1.0, 1.0, RingMode::Octagon, DiscreteMode::Separation);
        assert!((sep.solution.objective - r.solution.objective).abs() < 1e-7);
    }

    #[test]
    fn circle_rings_reject_exact_kernel() {
        let pq = square::<Rational>(3.0);
        let f = FadingSpec::new(1.0).unwrap();
        let s = StepFadingSpec::circle(1.0).unwrap();
        assert!(build_fading_arrangement(&pq, &[Point::from_f64(1.0, 1.0)], &f, &s).is_err());
    }
}
