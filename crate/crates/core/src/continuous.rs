//! Cutting-plane solver on the exact fading function. Each round solves the
//! LP on the current witnesses, then searches for the darkest point by
//! branch and bound over the triangulated visibility overlay.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::fading::{rho, FadingSpec};
use crate::geom::{Point, PolygonWithHoles, Triangle};
use crate::lp::{IlluminationLp, LpStatus, Solution};
use crate::scalar::Scalar;
use crate::triangulate::triangulate_face;
use crate::visibility::visibility_overlay;
use crate::{Point64, Triangle64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Geometric,
    Lipschitz,
    Max,
}

/// Light at `p` from the guards in `seeing` only.
pub fn light(p: &Point64, guards: &[Point64], seeing: &[usize], x: &[f64], fading: &FadingSpec) -> f64 {
    seeing.iter().filter(|&&g| x[g] > 0.0).map(|&g| x[g] * rho(&guards[g], p, fading)).sum()
}

/// Sum over guards of `x_g` times the smallest fading value at a vertex.
pub fn geometric_lower_bound(
    tri: &Triangle64,
    guards: &[Point64],
    seeing: &[usize],
    x: &[f64],
    fading: &FadingSpec,
) -> f64 {
    seeing
        .iter()
        .filter(|&&g| x[g] > 0.0)
        .map(|&g| {
            let worst = tri.vertices().iter().map(|v| rho(&guards[g], v, fading)).fold(f64::INFINITY, f64::min);
            x[g] * worst
        })
        .sum()
}

pub fn lipschitz_constant(seeing: &[usize], x: &[f64], fading: &FadingSpec) -> f64 {
    fading.alpha() * seeing.iter().map(|&g| x[g]).sum::<f64>()
}

pub fn lipschitz_lower_bound(tri: &Triangle64, z: [f64; 3], l: f64) -> f64 {
    let v = tri.vertices();
    let spread = (0..3)
        .map(|i| (0..3).map(|j| v[i].dist(v[j])).sum::<f64>())
        .fold(0.0, f64::max);
    (z.iter().sum::<f64>() - l * spread) / 3.0
}

/// Splits at the midpoint of the longest edge; ties go to the
/// lexicographically smallest edge. Returns the children and the midpoint.
pub fn bisect(tri: &Triangle64) -> (Triangle64, Triangle64, Point64) {
    let v = tri.vertices();
    let key = |i: usize, j: usize| {
        let (a, b) = if v[i].lex_cmp(v[j]) == Ordering::Greater { (v[j], v[i]) } else { (v[i], v[j]) };
        (a.x, a.y, b.x, b.y)
    };
    let mut best = (0usize, 1usize);
    let mut best_len = -1.0;
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let len = v[i].dist2(v[j]);
        let better = len > best_len
            || (len == best_len && key(i, j).partial_cmp(&key(best.0, best.1)) == Some(Ordering::Less));
        if better {
            best = (i, j);
            best_len = len;
        }
    }
    let (i, j) = best;
    let k = 3 - i - j;
    let m = v[i].midpoint(v[j]);
    (Triangle::new(*v[i], m, *v[k]), Triangle::new(m, *v[j], *v[k]), m)
}

#[derive(Clone, Debug)]
pub struct PspOptions {
    pub delta: f64,
    pub bound: BoundKind,
    /// Expansion cap per root triangle.
    pub iteration_cap: usize,
    /// Triangles whose bound reaches this value are dropped.
    pub threshold: f64,
    pub record_trace: bool,
    pub budget: Budget,
}

impl Default for PspOptions {
    fn default() -> Self {
        PspOptions {
            delta: 1e-3,
            bound: BoundKind::Geometric,
            iteration_cap: 100_000,
            threshold: f64::INFINITY,
            record_trace: false,
            budget: Budget::unlimited(),
        }
    }
}

/// Triangle in the search set with its vertex values and bound.
#[derive(Clone, Debug)]
pub struct SearchTriangle {
    pub tri: Triangle64,
    pub values: [f64; 3],
    pub bound: f64,
    pub root: usize,
    pub depth: usize,
    seq: usize,
}

impl PartialEq for SearchTriangle {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for SearchTriangle {}
impl PartialOrd for SearchTriangle {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for SearchTriangle {
    // Max-heap order reversed: smallest bound first, then oldest.
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound).then(o.seq.cmp(&self.seq))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PspStep {
    pub incumbent: f64,
    pub beta: f64,
}

/// Branch and bound state over several root triangles sharing one
/// incumbent.
#[derive(Clone, Debug)]
pub struct PspState<'a> {
    guards: &'a [Point64],
    labels: Vec<Vec<usize>>,
    x: &'a [f64],
    fading: FadingSpec,
    options: &'a PspOptions,
    pub search: BinaryHeap<SearchTriangle>,
    pub incumbent: Point64,
    pub incumbent_value: f64,
    /// Root triangle the incumbent was measured in.
    pub incumbent_root: usize,
    /// Per root: darkest point seen and its value.
    pub root_best: Vec<(Point64, f64)>,
    pub beta: f64,
    pub iterations: usize,
    pub deepest: usize,
    dropped_min: f64,
    seq: usize,
    pub trace: Vec<PspStep>,
}

impl<'a> PspState<'a> {
    pub fn new(
        roots: &[(Triangle64, Vec<usize>)],
        guards: &'a [Point64],
        x: &'a [f64],
        fading: &FadingSpec,
        options: &'a PspOptions,
    ) -> Self {
        let mut st = PspState {
            guards,
            labels: roots.iter().map(|r| r.1.clone()).collect(),
            x,
            fading: *fading,
            options,
            search: BinaryHeap::new(),
            incumbent: Point::new(f64::NAN, f64::NAN),
            incumbent_value: f64::INFINITY,
            incumbent_root: 0,
            root_best: Vec::with_capacity(roots.len()),
            beta: f64::INFINITY,
            iterations: 0,
            deepest: 0,
            dropped_min: f64::INFINITY,
            seq: 0,
            trace: Vec::new(),
        };
        let mut pending = Vec::with_capacity(roots.len());
        for (r, (tri, _)) in roots.iter().enumerate() {
            let v = tri.vertices();
            let values = [0, 1, 2].map(|i| st.value(r, v[i]));
            let (bi, bv) = (0..3).map(|i| (i, values[i])).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            st.root_best.push((*v[bi], bv));
            if bv < st.incumbent_value {
                st.incumbent_value = bv;
                st.incumbent = *v[bi];
                st.incumbent_root = r;
            }
            let bound = st.bound_of(r, tri, values);
            pending.push(st.make(tri.clone(), values, bound, r, 0));
        }
        for t in pending {
            st.offer(t);
        }
        st.refresh_beta();
        st.record();
        st
    }

    fn value(&self, root: usize, p: &Point64) -> f64 {
        light(p, self.guards, &self.labels[root], self.x, &self.fading)
    }

    fn bound_of(&self, root: usize, tri: &Triangle64, values: [f64; 3]) -> f64 {
        let seeing = &self.labels[root];
        let geo = || geometric_lower_bound(tri, self.guards, seeing, self.x, &self.fading);
        let lip = || lipschitz_lower_bound(tri, values, lipschitz_constant(seeing, self.x, &self.fading));
        match self.options.bound {
            BoundKind::Geometric => geo(),
            BoundKind::Lipschitz => lip(),
            BoundKind::Max => geo().max(lip()),
        }
    }

    fn make(&mut self, tri: Triangle64, values: [f64; 3], bound: f64, root: usize, depth: usize) -> SearchTriangle {
        self.seq += 1;
        SearchTriangle { tri, values, bound, root, depth, seq: self.seq }
    }

    fn offer(&mut self, t: SearchTriangle) {
        if t.bound >= self.options.threshold {
            self.dropped_min = self.dropped_min.min(t.bound);
        } else if t.bound <= self.incumbent_value {
            self.search.push(t);
        }
    }

    fn refresh_beta(&mut self) {
        // Bright triangles at the top no longer matter.
        while self.search.peek().is_some_and(|t| t.bound > self.incumbent_value) {
            self.search.pop();
        }
        let top = self.search.peek().map_or(f64::INFINITY, |t| t.bound);
        self.beta = top.min(self.dropped_min).min(self.incumbent_value);
    }

    fn record(&mut self) {
        if self.options.record_trace {
            self.trace.push(PspStep { incumbent: self.incumbent_value, beta: self.beta });
        }
    }

    pub fn converged(&self) -> bool {
        self.search.is_empty() || self.incumbent_value <= self.beta + self.options.delta
    }

    /// One expansion: pick the triangle with the smallest bound, bisect it
    /// and evaluate the new vertex.
    pub fn step(&mut self) {
        let Some(s) = self.search.pop() else { return };
        let (c1, c2, m) = bisect(&s.tri);
        let mv = self.value(s.root, &m);
        if mv < self.root_best[s.root].1 {
            self.root_best[s.root] = (m, mv);
        }
        if mv < self.incumbent_value {
            self.incumbent_value = mv;
            self.incumbent = m;
            self.incumbent_root = s.root;
        }
        for child in [c1, c2] {
            let v = child.vertices();
            let values = [0, 1, 2].map(|i| {
                if v[i] == &m {
                    mv
                } else {
                    s.tri.vertices().iter().position(|p| *p == v[i]).map_or_else(|| self.value(s.root, v[i]), |k| s.values[k])
                }
            });
            let bound = self.bound_of(s.root, &child, values).max(s.bound);
            let t = self.make(child, values, bound, s.root, s.depth + 1);
            self.deepest = self.deepest.max(s.depth + 1);
            self.offer(t);
        }
        self.iterations += 1;
        self.refresh_beta();
        self.record();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PspResult {
    pub point: Point64,
    pub value: f64,
    pub root: usize,
    pub lower_bound: f64,
    pub iterations: usize,
    pub deepest: usize,
    pub capped: bool,
    pub root_best: Vec<(Point64, f64)>,
    pub trace: Vec<PspStep>,
}

/// Darkest point over the union of `roots`, each searched with the guards
/// in its label.
pub fn psp_search(
    roots: &[(Triangle64, Vec<usize>)],
    guards: &[Point64],
    x: &[f64],
    fading: &FadingSpec,
    options: &PspOptions,
) -> Result<PspResult> {
    let mut st = PspState::new(roots, guards, x, fading, options);
    let cap = options.iteration_cap.saturating_mul(roots.len().max(1));
    let mut capped = false;
    while !st.converged() {
        if st.iterations >= cap {
            capped = true;
            break;
        }
        if st.iterations % 1024 == 0 && options.budget.exhausted() {
            return Err(Error::Budget);
        }
        st.step();
    }
    Ok(PspResult {
        point: st.incumbent,
        value: st.incumbent_value,
        root: st.incumbent_root,
        lower_bound: st.beta,
        iterations: st.iterations,
        deepest: st.deepest,
        capped,
        root_best: st.root_best,
        trace: st.trace,
    })
}

/// Single triangle search seen by `seeing`.
pub fn psp_solve(
    s0: &Triangle64,
    guards: &[Point64],
    seeing: &[usize],
    x: &[f64],
    fading: &FadingSpec,
    options: &PspOptions,
) -> Result<PspResult> {
    psp_search(&[(s0.clone(), seeing.to_vec())], guards, x, fading, options)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessPolicy {
    Darkest,
    Batch,
}

#[derive(Clone, Debug)]
pub struct ContinuousOptions {
    pub delta: f64,
    /// Outer acceptance tolerance; defaults to `delta`.
    pub delta_feas: Option<f64>,
    pub bound: BoundKind,
    pub policy: WitnessPolicy,
    pub outer_cap: usize,
    pub psp_cap: usize,
    pub budget: Budget,
}

impl Default for ContinuousOptions {
    fn default() -> Self {
        ContinuousOptions {
            delta: 1e-3,
            delta_feas: None,
            bound: BoundKind::Geometric,
            policy: WitnessPolicy::Darkest,
            outer_cap: 500,
            psp_cap: 100_000,
            budget: Budget::unlimited(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ContinuousRunReport {
    pub solution: Solution,
    /// LP optimum on the final witness set before repair; a lower bound on
    /// the true optimum.
    pub lp_objective: f64,
    pub outer_iterations: usize,
    pub triangles: usize,
    pub triangles_expanded: usize,
    pub deepest: usize,
    /// Darkest value before repair and its certified lower bound.
    pub darkest_value: f64,
    pub darkest_point: Point64,
    pub darkest_lower_bound: f64,
    pub repair_factor: f64,
    pub psp_capped: bool,
    pub outer_cap_hit: bool,
    pub lp: IlluminationLp,
    pub objective_trace: Vec<f64>,
    pub wall_time: Duration,
}

/// Triangles of the visibility overlay, each with the guards that see it.
pub fn overlay_triangles<T: Scalar>(
    poly: &PolygonWithHoles<T>,
    guards: &[Point<T>],
) -> Result<Vec<(Triangle64, Vec<usize>)>> {
    let ov = visibility_overlay(poly, guards)?;
    if !ov.feasible {
        return Err(Error::Infeasible("some part of the polygon is seen by no guard".into()));
    }
    let mut out = Vec::new();
    for (f, face) in ov.subdivision.faces.iter().enumerate() {
        let (outer, holes) = ov.subdivision.face_cycles(f);
        let label: Vec<usize> = face.label.iter().copied().collect();
        for t in triangulate_face(&outer, &holes) {
            let t = t.cast::<f64>();
            if t.area() > 0.0 {
                out.push((t, label.clone()));
            }
        }
    }
    Ok(out)
}

pub fn solve_continuous<T: Scalar>(
    poly: &PolygonWithHoles<T>,
    guards: &[Point<T>],
    fading: &FadingSpec,
    options: &ContinuousOptions,
) -> Result<ContinuousRunReport> {
    let start = Instant::now();
    let roots = overlay_triangles(poly, guards)?;
    let guards64: Vec<Point64> = guards.iter().map(|g| g.to_f64()).collect();
    let delta_feas = options.delta_feas.unwrap_or(options.delta);
    let psp_opts = PspOptions {
        delta: options.delta,
        bound: options.bound,
        iteration_cap: options.psp_cap,
        threshold: 1.0,
        record_trace: false,
        budget: options.budget.clone(),
    };
    let mut lp = IlluminationLp::new(guards64.clone());
    let mut expanded = 0;
    let mut deepest = 0;
    let mut capped = false;
    let mut trace = Vec::new();
    let mut outer = 0;
    loop {
        if options.budget.exhausted() {
            return Err(Error::Budget);
        }
        let sol = lp.solve();
        outer += 1;
        trace.push(sol.objective);
        if sol.status != LpStatus::Optimal {
            return Ok(report(sol, outer, &roots, expanded, deepest, None, 1.0, capped, false, &lp, trace, start));
        }
        let x = sol.intensities.values().to_vec();
        let res = psp_search(&roots, &guards64, &x, fading, &psp_opts)?;
        expanded += res.iterations;
        deepest = deepest.max(res.deepest);
        capped |= res.capped;
        let dark = res.value < 1.0 - delta_feas;
        if !dark || outer >= options.outer_cap {
            let cap_hit = dark;
            let certified = res.lower_bound.min(res.value);
            let (sol, factor) = if certified < 1.0 && certified > 0.0 {
                // Lift the certified minimum to 1, with a hair of margin
                // for rounding in later evaluations.
                let k = (1.0 / certified) * (1.0 + 1e-12);
                let scaled = sol.intensities.scaled(k);
                (Solution { objective: scaled.total(), intensities: scaled, ..sol }, k)
            } else {
                (sol, 1.0)
            };
            return Ok(report(sol, outer, &roots, expanded, deepest, Some(&res), factor, capped, cap_hit, &lp, trace, start));
        }
        match options.policy {
            WitnessPolicy::Darkest => add_point(&mut lp, &roots[res.root].1, &guards64, fading, res.point),
            WitnessPolicy::Batch => {
                for (r, &(p, v)) in res.root_best.iter().enumerate() {
                    if v < 1.0 - delta_feas {
                        add_point(&mut lp, &roots[r].1, &guards64, fading, p);
                    }
                }
            }
        }
    }
}

/// Row for `p` as seen from inside its root triangle: on a face boundary
/// that is the limit of the light from the face interior.
fn add_point(lp: &mut IlluminationLp, label: &[usize], guards: &[Point64], fading: &FadingSpec, p: Point64) {
    let row = label.iter().map(|&g| (g, rho(&guards[g], &p, fading))).collect();
    lp.add_row(p, row);
}

#[allow(clippy::too_many_arguments)]
fn report(
    solution: Solution,
    outer: usize,
    roots: &[(Triangle64, Vec<usize>)],
    expanded: usize,
    deepest: usize,
    last: Option<&PspResult>,
    repair_factor: f64,
    psp_capped: bool,
    outer_cap_hit: bool,
    lp: &IlluminationLp,
    objective_trace: Vec<f64>,
    start: Instant,
) -> ContinuousRunReport {
    ContinuousRunReport {
        lp_objective: *objective_trace.last().unwrap_or(&0.0),
        solution,
        outer_iterations: outer,
        triangles: roots.len(),
        triangles_expanded: expanded,
        deepest,
        darkest_value: last.map_or(f64::NAN, |r| r.value),
        darkest_point: last.map_or(Point::new(f64::NAN, f64::NAN), |r| r.point),
        darkest_lower_bound: last.map_or(f64::NAN, |r| r.lower_bound),
        repair_factor,
        psp_capped,
        outer_cap_hit,
        lp: lp.clone(),
        objective_trace,
        wall_time: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Triangle64 {
        Triangle::new(Point::new(a.0, a.1), Point::new(b.0, b.1), Point::new(c.0, c.1))
    }

    #[test]
    fn geometric_bound_takes_farthest_vertex() {
        let g = [Point::new(0.0, 0.0)];
        let t = tri((2.0, 0.0), (0.0, 3.0), (0.0, -4.0));
        let f = FadingSpec::new(1.0).unwrap();
        assert!((geometric_lower_bound(&t, &g, &[0], &[1.0], &f) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lipschitz_bound_example() {
        let t = tri((0.0, 0.0), (1.0, 0.0), (0.0, 1.0));
        let want = (3.0 - (1.0 + 2f64.sqrt())) / 3.0;
        assert!((lipschitz_lower_bound(&t, [1.0; 3], 1.0) - want).abs() < 1e-15);
        assert_eq!(lipschitz_lower_bound(&t, [0.5, 1.0, 1.5], 0.0), 1.0);
    }

    #[test]
    fn single_guard_darkest_vertex() {
        let g = [Point::new(0.0, 0.0)];
        let t = tri((1.0, 0.0), (3.0, 0.0), (2.0, 2.0));
        let f = FadingSpec::new(1.0).unwrap();
        let r = psp_solve(&t, &g, &[0], &[1.0], &f, &PspOptions::default()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.point, Point::new(3.0, 0.0));
        assert!(r.value - r.lower_bound <= 1e-3);
    }

    #[test]
    fn corner_guard_square() {
        let p = |x: f64, y: f64| Point::new(x, y);
        let sq = PolygonWithHoles::simple(vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 2.0), p(0.0, 2.0)]).unwrap();
        let f = FadingSpec::new(2.0).unwrap();
        let opts = ContinuousOptions { delta: 1e-6, ..Default::default() };
        let r = solve_continuous(&sq, &[p(0.0, 0.0)], &f, &opts).unwrap();
        assert!((r.solution.objective - 8.0).abs() < 1e-6, "{}", r.solution.objective);
        assert!(r.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }

    #[test]
    fn tiny_polygon_one_round() {
        let p = |x: f64, y: f64| Point::new(x, y);
        let sq = PolygonWithHoles::simple(vec![p(0.0, 0.0), p(0.5, 0.0), p(0.5, 0.5), p(0.0, 0.5)]).unwrap();
        let f = FadingSpec::new(1.0).unwrap();
        let r = solve_continuous(&sq, &[p(0.2, 0.2)], &f, &ContinuousOptions::default()).unwrap();
        assert!((r.solution.objective - 1.0).abs() < 1e-12);
        assert_eq!(r.outer_iterations, 2);
    }
}
