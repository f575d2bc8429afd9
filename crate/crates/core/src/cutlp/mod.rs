//! Cut-polytope LP relaxation of the fiber.
//!
//! A table `x` on the `m x n` grid corresponds to the cut of the suspension
//! graph (grid plus an apex `w` joined to every cell) that separates the ones
//! from `{w} ∪ zeros`. Its edge vector has an apex block `E1` (one coordinate
//! per cell, equal to the cell value) and a grid block `E2` (one coordinate per
//! grid edge, equal to 1 on discordant pairs), with `sum(E1) = T1` and
//! `sum(E2) = T2`. Relaxing the 0-1 constraint and keeping only the triangle
//! inequalities through `w` and the square inequalities of each unit square
//! gives an LP whose optimum over a cell coordinate bounds that cell over the
//! fiber.
//!
//! Variable layout: `E1` first (index = cell raster index), then `E2` in the
//! order of [`Shape::edge_list`].

mod simplex;

pub use simplex::{
    solve_lp, LinearRow, LpOutcome, LpProblem, LpStatus, Relation, RowKind, Sense, FEAS_TOL,
};

use crate::error::{Error, Result};
use crate::grid::{PartialTable, Shape, SuffStats};

/// Tolerance used when rounding LP optima to integer cell bounds.
pub const ROUND_TOL: f64 = 1e-6;

/// Edge bookkeeping for the suspension of the grid graph.
#[derive(Clone, Debug)]
pub struct SuspensionIndex {
    shape: Shape,
    edges: Vec<(usize, usize)>,
    right: Vec<Option<usize>>,
    down: Vec<Option<usize>>,
}

impl SuspensionIndex {
    pub fn new(shape: Shape) -> Self {
        let edges = shape.edge_list();
        let mut right = vec![None; shape.cells()];
        let mut down = vec![None; shape.cells()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            if b == a + 1 && shape.cols > 1 && b % shape.cols != 0 {
                right[a] = Some(e);
            } else {
                down[a] = Some(e);
            }
        }
        Self {
            shape,
            edges,
            right,
            down,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// `|E1| = mn`.
    pub fn e1_count(&self) -> usize {
        self.shape.cells()
    }

    /// `|E2| = 2mn - m - n`.
    pub fn e2_count(&self) -> usize {
        self.edges.len()
    }

    pub fn num_vars(&self) -> usize {
        self.e1_count() + self.e2_count()
    }

    /// Variable of the apex edge `w - cell`.
    pub fn cell_var(&self, cell: usize) -> usize {
        cell
    }

    /// Variable of grid edge number `edge`.
    pub fn edge_var(&self, edge: usize) -> usize {
        self.e1_count() + edge
    }

    pub fn grid_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge number of the grid edge joining two adjacent cells.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if b == a + self.shape.cols {
            self.down[a]
        } else if b == a + 1 {
            self.right[a]
        } else {
            None
        }
    }

    /// Apex vertex id in [`SuspensionIndex::graph_edges`].
    pub fn apex(&self) -> usize {
        self.shape.cells()
    }

    /// Edges of the suspension graph in variable order; grid vertices are
    /// cell indices and the apex is [`SuspensionIndex::apex`].
    pub fn graph_edges(&self) -> Vec<(usize, usize)> {
        let w = self.apex();
        (0..self.shape.cells())
            .map(|v| (w, v))
            .chain(self.edges.iter().copied())
            .collect()
    }

    /// Unit squares as their four cycle edges `(top, right, bottom, left)`,
    /// each given as an edge number, keyed by the top-left cell.
    pub fn squares(&self) -> impl Iterator<Item = (usize, [usize; 4])> + '_ {
        let s = self.shape;
        (0..s.rows.saturating_sub(1)).flat_map(move |r| {
            (0..s.cols.saturating_sub(1)).map(move |c| {
                let tl = s.index(r, c);
                let top = self.right[tl].expect("square edge");
                let left = self.down[tl].expect("square edge");
                let right = self.down[tl + 1].expect("square edge");
                let bottom = self.right[tl + s.cols].expect("square edge");
                (tl, [top, right, bottom, left])
            })
        })
    }

    /// Calls `emit` with every triangle and square row, as
    /// `(kind, coefficients, relation, rhs)` over global variable indices.
    fn for_each_cut_row(
        &self,
        edge_filter: impl Fn(usize) -> bool,
        square_filter: impl Fn(usize) -> bool,
        mut emit: impl FnMut(RowKind, &[(usize, f64)], Relation, f64),
    ) {
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if !edge_filter(e) {
                continue;
            }
            let (a, b, c) = (self.cell_var(u), self.cell_var(v), self.edge_var(e));
            emit(
                RowKind::Triangle,
                &[(a, 1.0), (b, 1.0), (c, 1.0)],
                Relation::Le,
                2.0,
            );
            emit(
                RowKind::Triangle,
                &[(a, 1.0), (b, 1.0), (c, -1.0)],
                Relation::Ge,
                0.0,
            );
            emit(
                RowKind::Triangle,
                &[(a, 1.0), (b, -1.0), (c, 1.0)],
                Relation::Ge,
                0.0,
            );
            emit(
                RowKind::Triangle,
                &[(a, -1.0), (b, 1.0), (c, 1.0)],
                Relation::Ge,
                0.0,
            );
        }
        for (tl, cycle) in self.squares() {
            if !square_filter(tl) {
                continue;
            }
            let vars = cycle.map(|e| self.edge_var(e));
            for negated in 0..4 {
                let coeffs: Vec<(usize, f64)> = vars
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (x, if i == negated { -1.0 } else { 1.0 }))
                    .collect();
                emit(RowKind::Square, &coeffs, Relation::Ge, 0.0);
                emit(RowKind::Square, &coeffs, Relation::Le, 2.0);
            }
        }
    }
}

/// Cut semimetric of the partition `A | B` where `in_a[v]` marks `A`:
/// coordinate `e = (i, j)` is 1 iff exactly one endpoint lies in `A`.
pub fn cut_semimetric(in_a: &[bool], edges: &[(usize, usize)]) -> Vec<u8> {
    edges
        .iter()
        .map(|&(i, j)| u8::from(in_a[i] != in_a[j]))
        .collect()
}

/// The full LP for the fiber restricted to completions of `partial`, with
/// objective equal to the apex-edge variable of `objective_cell`.
pub fn build_lp(
    partial: &PartialTable,
    stats: SuffStats,
    objective_cell: usize,
    sense: Sense,
) -> LpProblem {
    let index = SuspensionIndex::new(partial.shape());
    build_lp_with(&index, partial, stats, objective_cell, sense)
}

pub fn build_lp_with(
    index: &SuspensionIndex,
    partial: &PartialTable,
    stats: SuffStats,
    objective_cell: usize,
    sense: Sense,
) -> LpProblem {
    let mut lp = LpProblem::unit_box(index.num_vars());
    index.for_each_cut_row(
        |_| true,
        |_| true,
        |kind, coeffs, rel, rhs| lp.push(LinearRow::new(coeffs.to_vec(), rel, rhs, kind)),
    );
    let e1: Vec<(usize, f64)> = (0..index.e1_count())
        .map(|v| (index.cell_var(v), 1.0))
        .collect();
    let e2: Vec<(usize, f64)> = (0..index.e2_count())
        .map(|e| (index.edge_var(e), 1.0))
        .collect();
    lp.push(LinearRow::new(
        e1,
        Relation::Eq,
        stats.t1 as f64,
        RowKind::Fiber,
    ));
    lp.push(LinearRow::new(
        e2,
        Relation::Eq,
        stats.t2 as f64,
        RowKind::Fiber,
    ));
    for (v, &value) in partial.determined().iter().enumerate() {
        lp.push(LinearRow::new(
            vec![(index.cell_var(v), 1.0)],
            Relation::Eq,
            value as f64,
            RowKind::CellFix,
        ));
    }
    for (e, &(a, b)) in index.grid_edges().iter().enumerate() {
        if let (Some(x), Some(y)) = (partial.value(a), partial.value(b)) {
            lp.push(LinearRow::new(
                vec![(index.edge_var(e), 1.0)],
                Relation::Eq,
                f64::from(x != y),
                RowKind::EdgeFix,
            ));
        }
    }
    lp.objective[index.cell_var(objective_cell)] = 1.0;
    lp.sense = sense;
    lp
}

/// The same LP with every determined variable substituted out: variables are
/// the apex edges of undetermined cells followed by the grid edges with at
/// least one undetermined endpoint, and only rows touching them are kept.
/// Rows over determined variables alone are satisfied by any genuine table
/// and are dropped.
///
/// Returns `None` when no variable is free. Feasibility agrees with the full
/// LP from [`build_lp`].
pub fn build_window_lp(
    index: &SuspensionIndex,
    partial: &PartialTable,
    stats: SuffStats,
    objective_cell: Option<usize>,
    sense: Sense,
) -> Option<LpProblem> {
    let shape = index.shape();
    let k = partial.next_index();
    let cells = shape.cells();
    if k == cells {
        return None;
    }
    // Global variable -> window column.
    let first_edge = index
        .grid_edges()
        .iter()
        .position(|&(_, b)| b >= k)
        .unwrap_or(index.e2_count());
    let free_edges: Vec<usize> = (first_edge..index.e2_count())
        .filter(|&e| index.grid_edges()[e].1 >= k)
        .collect();
    let free_cells = cells - k;
    let mut column = std::collections::HashMap::with_capacity(free_cells + free_edges.len());
    for v in k..cells {
        column.insert(index.cell_var(v), v - k);
    }
    for (i, &e) in free_edges.iter().enumerate() {
        column.insert(index.edge_var(e), free_cells + i);
    }
    let fixed_value = |var: usize| -> f64 {
        if var < index.e1_count() {
            partial.value(var).expect("determined cell") as f64
        } else {
            let (a, b) = index.grid_edges()[var - index.e1_count()];
            f64::from(partial.value(a) != partial.value(b))
        }
    };

    let mut lp = LpProblem::unit_box(free_cells + free_edges.len());
    let (rows, cols) = (shape.rows, shape.cols);
    index.for_each_cut_row(
        |e| index.grid_edges()[e].1 >= k,
        |tl| {
            let br = tl + cols + 1;
            br >= k && tl / cols + 1 < rows
        },
        |kind, coeffs, rel, rhs| {
            let mut rhs = rhs;
            let mut local = Vec::with_capacity(coeffs.len());
            for &(var, a) in coeffs {
                match column.get(&var) {
                    Some(&c) => local.push((c, a)),
                    None => rhs -= a * fixed_value(var),
                }
            }
            lp.push(LinearRow::new(local, rel, rhs, kind));
        },
    );
    let r1 = stats.t1 as f64 - partial.placed_ones() as f64;
    let r2 = stats.t2 as f64 - partial.discord() as f64;
    lp.push(LinearRow::new(
        (0..free_cells).map(|c| (c, 1.0)).collect(),
        Relation::Eq,
        r1,
        RowKind::Fiber,
    ));
    lp.push(LinearRow::new(
        (free_cells..lp.num_vars).map(|c| (c, 1.0)).collect(),
        Relation::Eq,
        r2,
        RowKind::Fiber,
    ));
    if let Some(cell) = objective_cell {
        if cell >= k {
            lp.objective[cell - k] = 1.0;
        }
    }
    lp.sense = sense;
    Some(lp)
}

/// Whether the relaxation admits any completion of `partial`.
pub fn window_feasible(index: &SuspensionIndex, partial: &PartialTable, stats: SuffStats) -> bool {
    match build_window_lp(index, partial, stats, None, Sense::Minimize) {
        Some(lp) => solve_lp(&lp).is_feasible(),
        None => partial.placed_ones() == stats.t1 && partial.discord() == stats.t2,
    }
}

/// Integer bounds for one cell over the completions of a partial table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellBounds {
    Bounded { lo: u8, hi: u8 },
    Infeasible,
}

impl CellBounds {
    pub fn contains(&self, value: u8) -> bool {
        match *self {
            CellBounds::Bounded { lo, hi } => lo <= value && value <= hi,
            CellBounds::Infeasible => false,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, CellBounds::Infeasible)
    }
}

/// Lower and upper bounds on an undetermined cell, from minimizing and
/// maximizing its apex-edge variable over the relaxation. Every completion
/// of `partial` in the fiber has the cell inside the returned range.
pub fn cell_bounds(partial: &PartialTable, stats: SuffStats, cell: usize) -> Result<CellBounds> {
    if partial.value(cell).is_some() {
        return Err(Error::CellDetermined(cell));
    }
    let min = solve_lp(&build_lp(partial, stats, cell, Sense::Minimize));
    let max = solve_lp(&build_lp(partial, stats, cell, Sense::Maximize));
    let (Some(lo), Some(hi)) = (min.value, max.value) else {
        return Ok(CellBounds::Infeasible);
    };
    let lo = (lo - ROUND_TOL).ceil().clamp(0.0, 1.0) as u8;
    let hi = (hi + ROUND_TOL).floor().clamp(0.0, 1.0) as u8;
    // An empty integer range means no 0-1 completion survives either.
    if lo > hi {
        return Ok(CellBounds::Infeasible);
    }
    Ok(CellBounds::Bounded { lo, hi })
}

/// True iff `x` breaks a box, triangle or square constraint of the suspension
/// LP by more than [`FEAS_TOL`].
pub fn violates_cut_inequalities(x: &[f64], shape: Shape) -> Result<bool> {
    let index = SuspensionIndex::new(shape);
    if x.len() != index.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: index.num_vars(),
            got: x.len(),
        });
    }
    if x.iter()
        .any(|&v| !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(&v))
    {
        return Ok(true);
    }
    let mut violated = false;
    index.for_each_cut_row(
        |_| true,
        |_| true,
        |kind, coeffs, rel, rhs| {
            if !violated {
                let row = LinearRow::new(coeffs.to_vec(), rel, rhs, kind);
                violated = row.violation(x) > FEAS_TOL;
            }
        },
    );
    Ok(violated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{t2, BinaryTable};

    #[test]
    fn figure_graph_cut() {
        // Vertices 1..6 (index 0 unused); edges 12,23,45,56,14,25,36.
        let edges = [(1, 2), (2, 3), (4, 5), (5, 6), (1, 4), (2, 5), (3, 6)];
        let mut in_a = [false; 7];
        for v in [1, 2, 5] {
            in_a[v] = true;
        }
        assert_eq!(cut_semimetric(&in_a, &edges), vec![0, 1, 1, 1, 1, 0, 0]);
        let all = [true; 7];
        assert_eq!(cut_semimetric(&all, &edges), vec![0; 7]);
    }

    #[test]
    fn triangle_star_cut() {
        let edges = [(0, 1), (0, 2), (1, 2)];
        assert_eq!(cut_semimetric(&[true, false, false], &edges), vec![1, 1, 0]);
    }

    #[test]
    fn suspension_counts() {
        for (m, n) in [(1, 1), (1, 4), (2, 2), (3, 3), (4, 5)] {
            let idx = SuspensionIndex::new(Shape::new(m, n));
            assert_eq!(idx.num_vars(), 3 * m * n - m - n);
            for (e, &(a, b)) in idx.grid_edges().iter().enumerate() {
                assert_eq!(idx.edge_between(a, b), Some(e));
                assert_eq!(idx.edge_between(b, a), Some(e));
            }
            assert_eq!(idx.squares().count(), (m - 1) * (n - 1));
        }
    }

    #[test]
    fn build_lp_row_counts() {
        let s = Shape::new(2, 2);
        let lp = build_lp(
            &PartialTable::new(s),
            SuffStats::new(1, 2),
            0,
            Sense::Minimize,
        );
        assert_eq!(lp.num_vars, 8);
        assert_eq!(lp.count_rows(RowKind::Triangle), 16);
        assert_eq!(lp.count_rows(RowKind::Square), 8);
        assert_eq!(lp.count_rows(RowKind::Fiber), 2);
        assert_eq!(lp.equalities.len(), 2);

        let s = Shape::new(3, 3);
        let lp = build_lp(
            &PartialTable::new(s),
            SuffStats::new(1, 2),
            0,
            Sense::Minimize,
        );
        assert_eq!(lp.num_vars, 21);
        assert_eq!(lp.count_rows(RowKind::Triangle), 48);
        assert_eq!(lp.count_rows(RowKind::Square), 32);
        assert_eq!(lp.equalities.len(), 2);

        let p = PartialTable::from_prefix(Shape::new(2, 2), &[1]);
        let lp = build_lp(&p, SuffStats::new(1, 2), 1, Sense::Minimize);
        assert_eq!(lp.count_rows(RowKind::CellFix), 1);
        assert_eq!(lp.count_rows(RowKind::EdgeFix), 0);
    }

    #[test]
    fn infeasible_fiber_detected() {
        let p = PartialTable::new(Shape::new(2, 2));
        let lp = build_lp(&p, SuffStats::new(1, 3), 0, Sense::Minimize);
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
        assert_eq!(
            cell_bounds(&p, SuffStats::new(1, 3), 0).unwrap(),
            CellBounds::Infeasible
        );
    }

    #[test]
    fn forced_full_table() {
        let p = PartialTable::new(Shape::new(2, 2));
        for cell in 0..4 {
            assert_eq!(
                cell_bounds(&p, SuffStats::new(4, 0), cell).unwrap(),
                CellBounds::Bounded { lo: 1, hi: 1 }
            );
        }
    }

    #[test]
    fn corner_of_sparse_fiber_is_free() {
        let p = PartialTable::new(Shape::new(3, 3));
        assert_eq!(
            cell_bounds(&p, SuffStats::new(1, 2), 0).unwrap(),
            CellBounds::Bounded { lo: 0, hi: 1 }
        );
    }

    #[test]
    fn determined_cell_rejected() {
        let p = PartialTable::from_prefix(Shape::new(2, 2), &[0]);
        assert_eq!(
            cell_bounds(&p, SuffStats::new(1, 2), 0),
            Err(Error::CellDetermined(0))
        );
    }

    #[test]
    fn violation_examples() {
        let shape = Shape::new(2, 2);
        let idx = SuspensionIndex::new(shape);
        let n = idx.num_vars();
        assert!(!violates_cut_inequalities(&vec![0.0; n], shape).unwrap());
        assert!(violates_cut_inequalities(&[0.0; 3], shape).is_err());
        // Odd cut around the unit square with the apex block at zero.
        let mut x = vec![0.0; n];
        let (_, cycle) = idx.squares().next().unwrap();
        for (i, &e) in cycle.iter().enumerate() {
            x[idx.edge_var(e)] = if i == 0 { 0.0 } else { 1.0 };
        }
        assert!(violates_cut_inequalities(&x, shape).unwrap());
        // Every partition of the 2x2 suspension.
        let edges = idx.graph_edges();
        for mask in 0u32..32 {
            let in_a: Vec<bool> = (0..5).map(|v| mask >> v & 1 == 1).collect();
            let cut: Vec<f64> = cut_semimetric(&in_a, &edges)
                .into_iter()
                .map(f64::from)
                .collect();
            assert!(!violates_cut_inequalities(&cut, shape).unwrap());
        }
    }

    #[test]
    fn table_cut_satisfies_fiber_equalities() {
        let table = BinaryTable::from_rows(&[[1, 0, 0], [0, 1, 1]]);
        let idx = SuspensionIndex::new(table.shape());
        let mut in_a = vec![true; idx.apex() + 1];
        for (v, &x) in table.cells().iter().enumerate() {
            in_a[v] = x == 0;
        }
        let cut = cut_semimetric(&in_a, &idx.graph_edges());
        let e1: usize = cut[..idx.e1_count()].iter().map(|&v| v as usize).sum();
        let e2: usize = cut[idx.e1_count()..].iter().map(|&v| v as usize).sum();
        assert_eq!(e1, 3);
        assert_eq!(e2, t2(&table));
        assert_eq!(&cut[..idx.e1_count()], table.cells());
    }

    #[test]
    fn window_matches_full_lp() {
        let shape = Shape::new(3, 3);
        let idx = SuspensionIndex::new(shape);
        let stats = SuffStats::new(3, 6);
        for prefix_len in 0..9 {
            for mask in 0u32..(1 << prefix_len) {
                let prefix: Vec<u8> = (0..prefix_len).map(|i| (mask >> i & 1) as u8).collect();
                let p = PartialTable::from_prefix(shape, &prefix);
                let cell = prefix_len;
                let full = solve_lp(&build_lp_with(&idx, &p, stats, cell, Sense::Maximize));
                let window = solve_lp(
                    &build_window_lp(&idx, &p, stats, Some(cell), Sense::Maximize).unwrap(),
                );
                assert_eq!(full.status, window.status, "prefix {prefix:?}");
                if let (Some(a), Some(b)) = (full.value, window.value) {
                    assert!((a - b).abs() < 1e-7, "prefix {prefix:?}: {a} vs {b}");
                }
            }
        }
    }
}
