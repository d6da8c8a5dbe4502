//! Minimum total intensity LP over a fixed guard set and a growing witness
//! set: `min 1'x  s.t.  A x >= 1, x >= 0`.
//!
//! Solved through its packing dual `max 1'y  s.t.  A'y <= 1, y >= 0` with a
//! revised simplex that starts from the all-slack basis, so no phase one is
//! needed and added rows keep the current basis feasible. The primal
//! intensities are the simplex multipliers of the dual.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::fading::{FadingModel, IntensityAssignment};
use crate::Point64;

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    NumericalFailure,
}

impl LpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::IterationLimit => "iteration-limit",
            LpStatus::NumericalFailure => "solver-failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub intensities: IntensityAssignment,
    pub objective: f64,
    pub status: LpStatus,
    pub pivots: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    Slack(usize),
    Y(usize),
}

#[derive(Clone, Debug)]
struct Basis {
    vars: Vec<Var>,
    inv: DMatrix<f64>,
    values: DVector<f64>,
}

impl Basis {
    fn slack(n: usize) -> Self {
        Basis { vars: (0..n).map(Var::Slack).collect(), inv: DMatrix::identity(n, n), values: DVector::from_element(n, 1.0) }
    }
}

/// Harris two-pass ratio test: bound the step with a small feasibility
/// allowance, then pick the largest pivot among rows reaching that bound.
fn ratio_test(u: &DVector<f64>, basis: &Basis, bland: bool) -> Option<(usize, f64)> {
    let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let piv_tol = PIVOT_TOL.max(1e-9 * umax);
    let mut bound = f64::INFINITY;
    for i in 0..u.len() {
        if u[i] > piv_tol {
            bound = bound.min((basis.values[i].max(0.0) + FEASIBILITY_TOL) / u[i]);
        }
    }
    let mut leave: Option<(usize, f64)> = None;
    for i in 0..u.len() {
        if u[i] <= piv_tol {
            continue;
        }
        let ratio = basis.values[i].max(0.0) / u[i];
        if ratio > bound {
            continue;
        }
        let better = match leave {
            None => true,
            Some((r, _)) if bland => basis.vars[i] < basis.vars[r],
            Some((r, _)) => u[i] > u[r],
        };
        if better {
            leave = Some((i, ratio));
        }
    }
    leave
}

#[derive(Clone, Debug)]
pub struct IlluminationLp {
    guards: Vec<Point64>,
    witnesses: Vec<Point64>,
    rows: Vec<Vec<(usize, f64)>>,
    basis: Option<Basis>,
    pub iteration_limit: usize,
}

impl IlluminationLp {
    pub fn new(guards: Vec<Point64>) -> Self {
        IlluminationLp { guards, witnesses: Vec::new(), rows: Vec::new(), basis: None, iteration_limit: 200_000 }
    }

    pub fn guards(&self) -> &[Point64] {
        &self.guards
    }

    pub fn witnesses(&self) -> &[Point64] {
        &self.witnesses
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Adds the constraint `sum coef x_g >= 1` for witness `w`. Entries
    /// outside `(0, 1]` are dropped; they would not be coverage terms.
    pub fn add_row(&mut self, w: Point64, row: Vec<(usize, f64)>) {
        let mut row: Vec<(usize, f64)> =
            row.into_iter().filter(|&(g, c)| g < self.guards.len() && c > 0.0).collect();
        row.sort_by_key(|e| e.0);
        row.dedup_by_key(|e| e.0);
        self.witnesses.push(w);
        self.rows.push(row);
    }

    pub fn add_witness<F>(&mut self, w: Point64, model: &FadingModel, sees: F)
    where
        F: Fn(usize, &Point64) -> bool,
    {
        let row = (0..self.guards.len())
            .filter(|&g| sees(g, &w))
            .map(|g| (g, model.coefficient(&self.guards[g], &w)))
            .collect();
        self.add_row(w, row);
    }

    /// Value of `A_w x` for every row.
    pub fn row_values(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(g, c)| c * x[g]).sum()).collect()
    }

    pub fn solve(&mut self) -> Solution {
        let n = self.guards.len();
        if self.rows.iter().any(|r| r.is_empty()) {
            return self.finish(vec![0.0; n], LpStatus::Infeasible, 0);
        }
        if self.rows.is_empty() || n == 0 {
            return self.finish(vec![0.0; n], LpStatus::Optimal, 0);
        }
        let mut basis = match self.basis.take() {
            Some(b) if b.vars.len() == n => b,
            _ => Basis::slack(n),
        };
        let mut pivots = 0usize;
        let mut bland = false;
        let mut since_refactor = 0usize;
        let mut restarted = false;
        loop {
            if pivots >= self.iteration_limit {
                self.basis = Some(basis);
                return self.finish(vec![0.0; n], LpStatus::IterationLimit, pivots);
            }
            if since_refactor >= REFACTOR_EVERY {
                if !self.refactor(&mut basis) || basis.values.min() < -FEASIBILITY_TOL {
                    if restarted {
                        self.basis = None;
                        return self.finish(vec![0.0; n], LpStatus::NumericalFailure, pivots);
                    }
                    restarted = true;
                    basis = Basis::slack(n);
                    bland = false;
                }
                since_refactor = 0;
            }
            let pi = self.multipliers(&basis);
            let Some(entering) = self.price(&basis, &pi, bland) else {
                break;
            };
            let col = self.column(entering);
            let u = &basis.inv * &col;
            let leave = ratio_test(&u, &basis, bland);
            let Some((r, ratio)) = leave else {
                // Unbounded dual: cannot happen with nonempty rows.
                self.basis = None;
                return self.finish(vec![0.0; n], LpStatus::NumericalFailure, pivots);
            };
            bland = ratio <= 1e-12;
            let piv = u[r];
            {
                let mut row_r = basis.inv.row(r).clone_owned();
                row_r /= piv;
                for i in 0..n {
                    if i != r && u[i] != 0.0 {
                        let f = u[i];
                        for c in 0..n {
                            basis.inv[(i, c)] -= f * row_r[c];
                        }
                    }
                }
                basis.inv.set_row(r, &row_r);
                let xr = basis.values[r] / piv;
                for i in 0..n {
                    if i != r {
                        basis.values[i] -= u[i] * xr;
                    }
                }
                basis.values[r] = xr;
            }
            basis.vars[r] = entering;
            pivots += 1;
            since_refactor += 1;
        }
        if !self.refactor(&mut basis) || basis.values.min() < -FEASIBILITY_TOL {
            self.basis = None;
            if restarted {
                return self.finish(vec![0.0; n], LpStatus::NumericalFailure, pivots);
            }
            let mut cold = self.clone();
            let sol = cold.solve();
            self.basis = cold.basis;
            return Solution { pivots: pivots + sol.pivots, ..sol };
        }
        // Multipliers from a fresh factorisation: B' pi = c_B.
        let bmat = self.basis_matrix(&basis);
        let cb = DVector::from_iterator(n, basis.vars.iter().map(|v| matches!(v, Var::Y(_)) as u8 as f64));
        let pi = match bmat.transpose().lu().solve(&cb) {
            Some(p) => p,
            None => return self.finish(vec![0.0; n], LpStatus::NumericalFailure, pivots),
        };
        let mut x: Vec<f64> = pi.iter().map(|v| v.max(0.0)).collect();
        let worst = self.row_values(&x).into_iter().fold(f64::INFINITY, f64::min);
        if worst < 1.0 {
            if worst < 1.0 - 1e-6 {
                self.basis = None;
                return self.finish(vec![0.0; n], LpStatus::NumericalFailure, pivots);
            }
            for v in x.iter_mut() {
                *v /= worst;
            }
        }
        self.basis = Some(basis);
        self.finish(x, LpStatus::Optimal, pivots)
    }

    fn finish(&self, x: Vec<f64>, status: LpStatus, pivots: usize) -> Solution {
        let objective = x.iter().sum();
        Solution {
            intensities: IntensityAssignment::new(x).expect("clamped to nonnegative"),
            objective,
            status,
            pivots,
        }
    }

    fn column(&self, v: Var) -> DVector<f64> {
        let n = self.guards.len();
        let mut c = DVector::zeros(n);
        match v {
            Var::Slack(i) => c[i] = 1.0,
            Var::Y(j) => {
                for &(g, a) in &self.rows[j] {
                    c[g] = a;
                }
            }
        }
        c
    }

    fn basis_matrix(&self, b: &Basis) -> DMatrix<f64> {
        let n = self.guards.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, &v) in b.vars.iter().enumerate() {
            m.set_column(k, &self.column(v));
        }
        m
    }

    fn refactor(&self, b: &mut Basis) -> bool {
        let n = self.guards.len();
        match self.basis_matrix(b).try_inverse() {
            Some(inv) => {
                b.values = &inv * DVector::from_element(n, 1.0);
                b.inv = inv;
                true
            }
            None => false,
        }
    }

    fn multipliers(&self, b: &Basis) -> DVector<f64> {
        let n = self.guards.len();
        let cb = DVector::from_iterator(n, b.vars.iter().map(|v| matches!(v, Var::Y(_)) as u8 as f64));
        b.inv.tr_mul(&cb)
    }

    /// Entering variable with positive reduced cost, or `None` at optimum.
    fn price(&self, b: &Basis, pi: &DVector<f64>, bland: bool) -> Option<Var> {
        let n = self.guards.len();
        let mut in_basis_y = vec![false; self.rows.len()];
        let mut in_basis_s = vec![false; n];
        for v in &b.vars {
            match *v {
                Var::Slack(i) => in_basis_s[i] = true,
                Var::Y(j) => in_basis_y[j] = true,
            }
        }
        let mut best: Option<(Var, f64)> = None;
        let mut consider = |v: Var, d: f64| -> bool {
            if d > OPTIMALITY_TOL {
                if bland {
                    best = Some((v, d));
                    return true;
                }
                if best.map_or(true, |(_, bd)| d > bd) {
                    best = Some((v, d));
                }
            }
            false
        };
        for i in 0..n {
            if !in_basis_s[i] && consider(Var::Slack(i), -pi[i]) {
                return best.map(|b| b.0);
            }
        }
        for (j, row) in self.rows.iter().enumerate() {
            if in_basis_y[j] {
                continue;
            }
            let d = 1.0 - row.iter().map(|&(g, a)| a * pi[g]).sum::<f64>();
            if consider(Var::Y(j), d) {
                return best.map(|b| b.0);
            }
        }
        best.map(|b| b.0)
    }

    /// The model in the common LP text format.
    pub fn to_lp_format(&self) -> String {
        let mut s = String::new();
        let n = self.guards.len();
        s.push_str("\\ minimum total intensity\nMinimize\n obj:");
        for g in 0..n {
            let _ = write!(s, "{} x{}", if g == 0 { "" } else { " +" }, g);
        }
        if n == 0 {
            s.push_str(" 0");
        }
        s.push_str("\nSubject To\n");
        for (j, row) in self.rows.iter().enumerate() {
            let _ = write!(s, " w{j}:");
            if row.is_empty() {
                s.push_str(" 0 x0");
            }
            for (k, &(g, a)) in row.iter().enumerate() {
                let _ = write!(s, "{} {} x{}", if k == 0 { "" } else { " +" }, a, g);
            }
            s.push_str(" >= 1\n");
        }
        s.push_str("Bounds\n");
        for g in 0..n {
            let _ = writeln!(s, " x{g} >= 0");
        }
        s.push_str("End\n");
        s
    }
}

/// One row per witness with coefficient `fading(g, w)` for the guards that
/// see `w`.
pub fn build_lp<F>(guards: &[Point64], witnesses: &[Point64], model: &FadingModel, sees: F) -> IlluminationLp
where
    F: Fn(usize, &Point64) -> bool,
{
    let mut lp = IlluminationLp::new(guards.to_vec());
    for w in witnesses {
        lp.add_witness(*w, model, &sees);
    }
    lp
}

pub fn solve_lp(lp: &mut IlluminationLp) -> Solution {
    lp.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    fn lp(rows: &[&[(usize, f64)]], n: usize) -> IlluminationLp {
        let mut lp = IlluminationLp::new(vec![Point::new(0.0, 0.0); n]);
        for r in rows {
            lp.add_row(Point::new(0.0, 0.0), r.to_vec());
        }
        lp
    }

    #[test]
    fn empty_witness_set() {
        let s = lp(&[], 3).solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn cheaper_unit_coefficient() {
        let s = lp(&[&[(0, 1.0), (1, 0.5)]], 2).solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!((s.intensities.values()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separate_quarter_coefficients() {
        let s = lp(&[&[(0, 0.25)], &[(1, 0.25)]], 2).solve();
        assert!((s.objective - 8.0).abs() < 1e-9);
        let s2 = lp(&[&[(0, 0.25)], &[(1, 0.25)], &[(1, 0.25)]], 2).solve();
        assert!((s2.objective - 8.0).abs() < 1e-9);
    }

    #[test]
    fn unseen_witness_is_infeasible() {
        let mut l = lp(&[&[(0, 1.0)]], 1);
        assert_eq!(l.solve().status, LpStatus::Optimal);
        l.add_row(Point::new(1.0, 1.0), vec![]);
        assert_eq!(l.solve().status, LpStatus::Infeasible);
    }

    #[test]
    fn warm_start_matches_cold() {
        let rows: Vec<Vec<(usize, f64)>> = vec![
            vec![(0, 1.0), (1, 0.3)],
            vec![(1, 0.7), (2, 0.2)],
            vec![(0, 0.1), (2, 0.9)],
            vec![(0, 0.4), (1, 0.4), (2, 0.4)],
        ];
        let mut warm = IlluminationLp::new(vec![Point::new(0.0, 0.0); 3]);
        let mut last = 0.0;
        for r in &rows {
            warm.add_row(Point::new(0.0, 0.0), r.clone());
            let s = warm.solve();
            assert!(s.objective >= last - 1e-12);
            last = s.objective;
        }
        let refs: Vec<&[(usize, f64)]> = rows.iter().map(|r| r.as_slice()).collect();
        let cold = lp(&refs, 3).solve();
        assert!((cold.objective - last).abs() < 1e-9);
    }

    #[test]
    fn exports_lp_text() {
        let text = lp(&[&[(0, 1.0), (1, 0.5)]], 2).to_lp_format();
        assert!(text.contains("Minimize"));
        assert!(text.contains(" w0: 1 x0 + 0.5 x1 >= 1"));
        assert!(text.trim_end().ends_with("End"));
    }
}
