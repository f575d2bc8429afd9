//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Variables carry finite box bounds. Variables fixed by their box or by a
//! single-variable equality are substituted out before the tableau is built,
//! so problems where most of the table is already determined stay small.

use std::fmt::Write as _;

/// Feasibility tolerance on constraint residuals.
pub const FEAS_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Origin of a constraint row, kept for diagnostics and counting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowKind {
    Triangle,
    Square,
    Fiber,
    CellFix,
    EdgeFix,
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub kind: RowKind,
}

impl LinearRow {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64, kind: RowKind) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
            kind,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A linear program over box-bounded real variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub inequalities: Vec<LinearRow>,
    pub equalities: Vec<LinearRow>,
    pub objective: Vec<f64>,
    pub sense: Sense,
}

impl LpProblem {
    /// Problem with `num_vars` variables boxed in `[0, 1]` and a zero objective.
    pub fn unit_box(num_vars: usize) -> Self {
        Self {
            num_vars,
            lower: vec![0.0; num_vars],
            upper: vec![1.0; num_vars],
            inequalities: Vec::new(),
            equalities: Vec::new(),
            objective: vec![0.0; num_vars],
            sense: Sense::Minimize,
        }
    }

    pub fn push(&mut self, row: LinearRow) {
        if row.relation == Relation::Eq {
            self.equalities.push(row);
        } else {
            self.inequalities.push(row);
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &LinearRow> {
        self.inequalities.iter().chain(&self.equalities)
    }

    pub fn count_rows(&self, kind: RowKind) -> usize {
        self.rows().filter(|r| r.kind == kind).count()
    }

    /// Largest violation of any row or box bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let boxes = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| (lo - v).max(v - hi).max(0.0));
        self.rows()
            .map(|r| r.violation(x))
            .chain(boxes)
            .fold(0.0, f64::max)
    }

    /// Renders the problem in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        fn terms(out: &mut String, coeffs: &[(usize, f64)]) {
            if coeffs.is_empty() {
                out.push_str(" 0 x0");
            }
            for &(j, a) in coeffs {
                let sign = if a < 0.0 { '-' } else { '+' };
                let _ = write!(out, " {sign} {} x{j}", a.abs());
            }
        }
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Minimize => "Minimize\n obj:",
            Sense::Maximize => "Maximize\n obj:",
        });
        let obj: Vec<(usize, f64)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(j, &c)| (j, c))
            .collect();
        terms(&mut out, &obj);
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows().enumerate() {
            let _ = write!(out, " c{i}:");
            terms(&mut out, &row.coeffs);
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {rel} {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars {
            let _ = writeln!(out, " {} <= x{j} <= {}", self.lower[j], self.upper[j]);
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub value: Option<f64>,
    pub solution: Option<Vec<f64>>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        Self {
            status: LpStatus::Infeasible,
            value: None,
            solution: None,
        }
    }

    fn unbounded() -> Self {
        Self {
            status: LpStatus::Unbounded,
            value: None,
            solution: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status != LpStatus::Infeasible
    }
}

/// Solves `problem`. Deterministic for identical input.
pub fn solve_lp(problem: &LpProblem) -> LpOutcome {
    assert!(problem.num_vars >= 1, "LP needs at least one variable");
    let n = problem.num_vars;
    if problem
        .lower
        .iter()
        .zip(&problem.upper)
        .any(|(lo, hi)| lo > &(hi + FEAS_TOL))
    {
        return LpOutcome::infeasible();
    }

    // Presolve: fix boxed-in variables and propagate singleton equalities.
    let mut fixed: Vec<Option<f64>> = (0..n)
        .map(|j| (problem.upper[j] - problem.lower[j] <= 1e-12).then_some(problem.lower[j]))
        .collect();
    let mut settled = vec![false; problem.equalities.len()];
    loop {
        let mut changed = false;
        for (row, done) in problem.equalities.iter().zip(settled.iter_mut()) {
            if *done {
                continue;
            }
            let mut free = None;
            let mut free_count = 0;
            let mut rhs = row.rhs;
            for &(j, a) in &row.coeffs {
                match fixed[j] {
                    Some(v) => rhs -= a * v,
                    None if a != 0.0 => {
                        free_count += 1;
                        free = Some((j, a));
                    }
                    None => {}
                }
            }
            match (free_count, free) {
                (0, _) => {
                    if rhs.abs() > FEAS_TOL {
                        return LpOutcome::infeasible();
                    }
                    *done = true;
                }
                (1, Some((j, a))) => {
                    let v = rhs / a;
                    if v < problem.lower[j] - FEAS_TOL || v > problem.upper[j] + FEAS_TOL {
                        return LpOutcome::infeasible();
                    }
                    fixed[j] = Some(v.clamp(problem.lower[j], problem.upper[j]));
                    *done = true;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    // Map the free variables to tableau columns, shifted to y = x - lower.
    let mut column_of = vec![usize::MAX; n];
    let mut free_vars = Vec::new();
    for j in 0..n {
        if fixed[j].is_none() {
            column_of[j] = free_vars.len();
            free_vars.push(j);
        }
    }
    let base: Vec<f64> = (0..n)
        .map(|j| fixed[j].unwrap_or(problem.lower[j]))
        .collect();

    let mut rows: Vec<ReducedRow> = Vec::new();
    for (row, &done) in problem
        .inequalities
        .iter()
        .zip(std::iter::repeat(&false))
        .chain(problem.equalities.iter().zip(&settled))
    {
        if done {
            continue;
        }
        let mut rhs = row.rhs;
        let mut coeffs = Vec::with_capacity(row.coeffs.len());
        for &(j, a) in &row.coeffs {
            rhs -= a * base[j];
            if fixed[j].is_none() && a != 0.0 {
                coeffs.push((column_of[j], a));
            }
        }
        if coeffs.is_empty() {
            let ok = match row.relation {
                Relation::Le => rhs >= -FEAS_TOL,
                Relation::Ge => rhs <= FEAS_TOL,
                Relation::Eq => rhs.abs() <= FEAS_TOL,
            };
            if !ok {
                return LpOutcome::infeasible();
            }
            continue;
        }
        rows.push((coeffs, row.relation, rhs));
    }
    for (col, &j) in free_vars.iter().enumerate() {
        let width = problem.upper[j] - problem.lower[j];
        if width.is_finite() {
            rows.push((vec![(col, 1.0)], Relation::Le, width));
        }
    }

    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let cost: Vec<f64> = free_vars
        .iter()
        .map(|&j| sign * problem.objective[j])
        .collect();
    let constant: f64 = (0..n).map(|j| problem.objective[j] * base[j]).sum();

    let y = if free_vars.is_empty() {
        Some(Vec::new())
    } else {
        match Tableau::new(free_vars.len(), &rows).solve(&cost) {
            TableauResult::Optimal(y) => Some(y),
            TableauResult::Infeasible => return LpOutcome::infeasible(),
            TableauResult::Unbounded => return LpOutcome::unbounded(),
        }
    };
    let y = y.expect("set above");
    let mut x = base;
    for (col, &j) in free_vars.iter().enumerate() {
        x[j] = (x[j] + y[col]).clamp(problem.lower[j], problem.upper[j]);
    }
    let value = constant
        + free_vars
            .iter()
            .zip(&y)
            .map(|(&j, &v)| problem.objective[j] * v)
            .sum::<f64>();
    LpOutcome {
        status: LpStatus::Optimal,
        value: Some(value),
        solution: Some(x),
    }
}

enum TableauResult {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Row-major dense tableau. Column layout: structural, slack/surplus,
/// artificial, then the right-hand side.
struct Tableau {
    m: usize,
    width: usize,
    structural: usize,
    artificial_start: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

/// Sparse coefficients over the free variables, relation, right-hand side.
type ReducedRow = (Vec<(usize, f64)>, Relation, f64);

impl Tableau {
    fn new(structural: usize, rows: &[ReducedRow]) -> Self {
        let m = rows.len();
        // Normalize to nonnegative right-hand sides.
        let normalized: Vec<(f64, Relation, f64)> = rows
            .iter()
            .map(|(_, rel, rhs)| {
                if *rhs < 0.0 {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (-1.0, flipped, -rhs)
                } else {
                    (1.0, *rel, *rhs)
                }
            })
            .collect();
        let slacks = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Eq)
            .count();
        let artificials = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Le)
            .count();
        let artificial_start = structural + slacks;
        let width = artificial_start + artificials + 1;
        let mut data = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (structural, artificial_start);
        for (i, ((coeffs, _, _), &(mult, rel, rhs))) in rows.iter().zip(&normalized).enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            for &(j, v) in coeffs {
                row[j] += mult * v;
            }
            row[width - 1] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -1.0;
                    s += 1;
                    row[a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        Self {
            m,
            width,
            structural,
            artificial_start,
            data,
            basis,
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let w = self.width;
        let p = self.data[r * w + c];
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        let nz: Vec<usize> = (0..w).filter(|&j| pivot_row[j] != 0.0).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for &j in &nz {
                row[j] -= f * pivot_row[j];
            }
            row[c] = 0.0;
        }
        let f = obj[c];
        if f != 0.0 {
            for &j in &nz {
                obj[j] -= f * pivot_row[j];
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the reduced-cost row `obj` restricted to
    /// columns `< limit`. Returns false when unbounded.
    fn iterate(&mut self, obj: &mut [f64], limit: usize) -> bool {
        loop {
            // Bland: lowest-index improving column.
            let Some(c) = (0..limit).find(|&j| obj[j] < -COST_TOL) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.data[i * self.width + c];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, c, obj);
        }
    }

    fn solve(mut self, cost: &[f64]) -> TableauResult {
        let w = self.width;
        if self.artificial_start < w - 1 {
            // Phase 1: minimize the sum of artificials.
            let mut obj = vec![0.0; w];
            for j in self.artificial_start..w - 1 {
                obj[j] = 1.0;
            }
            for i in 0..self.m {
                if self.basis[i] >= self.artificial_start {
                    for j in 0..w {
                        obj[j] -= self.data[i * w + j];
                    }
                }
            }
            self.iterate(&mut obj, w - 1);
            let infeasibility = -obj[w - 1];
            if infeasibility > FEAS_TOL {
                return TableauResult::Infeasible;
            }
            // Drive zero-level artificials out of the basis where possible.
            for i in 0..self.m {
                if self.basis[i] < self.artificial_start {
                    continue;
                }
                let row = self.row(i);
                if let Some(c) = (0..self.artificial_start).find(|&j| row[j].abs() > PIVOT_TOL) {
                    self.pivot(i, c, &mut obj);
                }
            }
        }

        // Phase 2 over structural and slack columns only.
        let mut obj = vec![0.0; w];
        obj[..self.structural].copy_from_slice(cost);
        for i in 0..self.m {
            let b = self.basis[i];
            let cb = obj[b];
            if cb != 0.0 {
                for j in 0..w {
                    obj[j] -= cb * self.data[i * w + j];
                }
            }
        }
        if !self.iterate(&mut obj, self.artificial_start) {
            return TableauResult::Unbounded;
        }
        let mut y = vec![0.0; self.structural];
        for i in 0..self.m {
            let b = self.basis[i];
            if b < self.structural {
                y[b] = self.rhs(i).max(0.0);
            }
        }
        TableauResult::Optimal(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, f64)], rel: Relation, rhs: f64) -> LinearRow {
        LinearRow::new(coeffs.to_vec(), rel, rhs, RowKind::Other)
    }

    #[test]
    fn box_only_minimum() {
        let mut p = LpProblem::unit_box(1);
        p.lower[0] = 0.3;
        p.objective[0] = 1.0;
        let out = solve_lp(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value.unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut p = LpProblem::unit_box(1);
        p.lower[0] = -10.0;
        p.upper[0] = 10.0;
        p.push(row(&[(0, 1.0)], Relation::Ge, 2.0));
        p.push(row(&[(0, 1.0)], Relation::Le, 1.0));
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction_detected() {
        let mut p = LpProblem::unit_box(2);
        p.upper = vec![f64::INFINITY; 2];
        p.objective = vec![1.0, 1.0];
        p.sense = Sense::Maximize;
        p.push(row(&[(0, 1.0), (1, -1.0)], Relation::Le, 1.0));
        assert_eq!(solve_lp(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn small_textbook_problem() {
        // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> 36 at (2, 6)
        let mut p = LpProblem::unit_box(2);
        p.upper = vec![100.0; 2];
        p.objective = vec![3.0, 5.0];
        p.sense = Sense::Maximize;
        p.push(row(&[(0, 1.0)], Relation::Le, 4.0));
        p.push(row(&[(1, 2.0)], Relation::Le, 12.0));
        p.push(row(&[(0, 3.0), (1, 2.0)], Relation::Le, 18.0));
        let out = solve_lp(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value.unwrap() - 36.0).abs() < 1e-9);
        let x = out.solution.unwrap();
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y  s.t. x + y = 1, x >= 0.25 (boxes [0,1])
        let mut p = LpProblem::unit_box(2);
        p.objective = vec![1.0, 2.0];
        p.push(row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0));
        p.push(row(&[(0, 1.0)], Relation::Ge, 0.25));
        let out = solve_lp(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn presolve_fixes_singletons_and_checks_residuals() {
        let mut p = LpProblem::unit_box(3);
        p.push(row(&[(0, 1.0)], Relation::Eq, 1.0));
        p.push(row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0));
        p.push(row(&[(1, 1.0), (2, 1.0)], Relation::Ge, 0.5));
        p.objective = vec![0.0, 0.0, 1.0];
        let out = solve_lp(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value.unwrap() - 0.5).abs() < 1e-9);
        p.push(row(&[(1, 1.0)], Relation::Eq, 0.5));
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's classic cycling example under the largest-coefficient rule.
        let mut p = LpProblem::unit_box(4);
        p.upper = vec![1e6; 4];
        p.objective = vec![-0.75, 150.0, -0.02, 6.0];
        p.push(row(
            &[(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)],
            Relation::Le,
            0.0,
        ));
        p.push(row(
            &[(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)],
            Relation::Le,
            0.0,
        ));
        p.push(row(&[(2, 1.0)], Relation::Le, 1.0));
        let out = solve_lp(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value.unwrap() + 0.05).abs() < 1e-9);
    }

    #[test]
    fn lp_format_mentions_every_row() {
        let mut p = LpProblem::unit_box(2);
        p.push(row(&[(0, 1.0), (1, -1.0)], Relation::Le, 0.5));
        let text = p.to_lp_format();
        assert!(text.contains("c0: + 1 x0 - 1 x1 <= 0.5"));
        assert!(text.starts_with("Minimize"));
        assert!(text.ends_with("End\n"));
    }
}
