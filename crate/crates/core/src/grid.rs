//! Binary tables on the open `m x n` lattice and the statistics computed on them.
//!
//! Cells are stored row-major; every routine that "vectorizes" a table uses
//! this raster order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

/// Grid dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub const fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub const fn cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Number of 4-neighbour edges of the open grid, `2mn - m - n`.
    pub const fn edges(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        2 * self.rows * self.cols - self.rows - self.cols
    }

    /// Number of unit squares, `(m - 1)(n - 1)`.
    pub const fn squares(&self) -> usize {
        self.rows.saturating_sub(1) * self.cols.saturating_sub(1)
    }

    #[inline]
    pub const fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    #[inline]
    pub const fn position(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    /// Number of 4-neighbours of a cell.
    pub fn degree(&self, index: usize) -> usize {
        let (r, c) = self.position(index);
        4 - usize::from(r == 0)
            - usize::from(r + 1 == self.rows)
            - usize::from(c == 0)
            - usize::from(c + 1 == self.cols)
    }

    /// 4-neighbours of a cell in the order up, left, right, down.
    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = usize> {
        let (r, c) = self.position(index);
        let cols = self.cols;
        let up = (r > 0).then(|| index - cols);
        let left = (c > 0).then(|| index - 1);
        let right = (c + 1 < cols).then(|| index + 1);
        let down = (r + 1 < self.rows).then(|| index + cols);
        [up, left, right, down].into_iter().flatten()
    }

    /// Enumerates grid edges as `(a, b)` with `a < b`: for each cell in raster
    /// order, first its right neighbour then its down neighbour.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edges());
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = self.index(r, c);
                if c + 1 < self.cols {
                    out.push((i, i + 1));
                }
                if r + 1 < self.rows {
                    out.push((i, i + self.cols));
                }
            }
        }
        out
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// The pair `(T1, T2)`: number of ones and number of discordant adjacent pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuffStats {
    pub t1: usize,
    pub t2: usize,
}

impl SuffStats {
    pub const fn new(t1: usize, t2: usize) -> Self {
        Self { t1, t2 }
    }

    /// Checks the range invariants against a grid shape. This is necessary,
    /// not sufficient, for the fiber to be nonempty.
    pub fn is_admissible(&self, shape: Shape) -> bool {
        let n = shape.cells();
        if self.t1 > n || self.t2 > shape.edges() {
            return false;
        }
        if (self.t1 == 0 || self.t1 == n) && self.t2 != 0 {
            return false;
        }
        true
    }
}

/// A fully observed `rows x cols` 0-1 table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryTable {
    shape: Shape,
    cells: Vec<u8>,
}

impl BinaryTable {
    pub fn zeros(shape: Shape) -> Self {
        Self {
            shape,
            cells: vec![0; shape.cells()],
        }
    }

    /// Builds a table from row-major cells. Panics if the length does not
    /// match the shape or a cell is not 0/1.
    pub fn from_cells(shape: Shape, cells: Vec<u8>) -> Self {
        assert_eq!(
            cells.len(),
            shape.cells(),
            "cell count does not match shape"
        );
        assert!(cells.iter().all(|&v| v <= 1), "cells must be 0 or 1");
        Self { shape, cells }
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut cells = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            cells.extend_from_slice(r.as_ref());
        }
        Self::from_cells(Shape::new(rows.len(), cols), cells)
    }

    /// Table whose ones sit at the given raster indices.
    pub fn from_ones(shape: Shape, ones: &[usize]) -> Self {
        let mut t = Self::zeros(shape);
        for &i in ones {
            t.cells[i] = 1;
        }
        t
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn rows(&self) -> usize {
        self.shape.rows
    }

    pub fn cols(&self) -> usize {
        self.shape.cols
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[self.shape.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        assert!(value <= 1);
        let i = self.shape.index(row, col);
        self.cells[i] = value;
    }

    pub fn complement(&self) -> Self {
        Self {
            shape: self.shape,
            cells: self.cells.iter().map(|&v| 1 - v).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let (m, n) = (self.rows(), self.cols());
        let shape = Shape::new(n, m);
        let mut cells = vec![0; m * n];
        for r in 0..m {
            for c in 0..n {
                cells[shape.index(c, r)] = self.get(r, c);
            }
        }
        Self { shape, cells }
    }

    pub fn suff_stats(&self) -> SuffStats {
        SuffStats::new(t1(self), t2(self))
    }
}

impl fmt::Display for BinaryTable {
    /// Rows of `0`/`1` characters, each newline-terminated, no separators.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.cols().max(1)) {
            for &v in row {
                f.write_str(if v == 1 { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

impl FromStr for BinaryTable {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_table(s)
    }
}

/// Parses the table text format: one line per row of `0`/`1` characters,
/// optionally separated by single spaces. Blank lines are skipped.
pub fn parse_table(text: &str) -> Result<BinaryTable, ParseError> {
    let mut cols: Option<usize> = None;
    let mut cells = Vec::new();
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let mut width = 0;
        for ch in line.chars() {
            match ch {
                '0' => cells.push(0),
                '1' => cells.push(1),
                ' ' => continue,
                other => {
                    return Err(ParseError::BadCharacter {
                        line: lineno,
                        found: other,
                    })
                }
            }
            width += 1;
        }
        match cols {
            None => cols = Some(width),
            Some(w) if w != width => return Err(ParseError::RaggedRow { line: lineno }),
            Some(_) => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or(ParseError::Empty)?;
    Ok(BinaryTable::from_cells(Shape::new(rows, cols), cells))
}

/// Number of ones.
pub fn t1(table: &BinaryTable) -> usize {
    table.cells.iter().map(|&v| v as usize).sum()
}

/// Number of horizontally or vertically adjacent pairs with different values.
pub fn t2(table: &BinaryTable) -> usize {
    let (m, n) = (table.rows(), table.cols());
    let c = &table.cells;
    let mut count = 0;
    for r in 0..m {
        let row = &c[r * n..(r + 1) * n];
        count += row.windows(2).filter(|w| w[0] != w[1]).count();
        if r + 1 < m {
            let below = &c[(r + 1) * n..(r + 2) * n];
            count += row.iter().zip(below).filter(|(a, b)| a != b).count();
        }
    }
    count
}

fn count_windows(table: &BinaryTable, matches: impl Fn([u8; 4]) -> bool) -> usize {
    let (m, n) = (table.rows(), table.cols());
    if m < 2 || n < 2 {
        return 0;
    }
    let mut count = 0;
    for r in 0..m - 1 {
        for c in 0..n - 1 {
            let w = [
                table.get(r, c),
                table.get(r, c + 1),
                table.get(r + 1, c),
                table.get(r + 1, c + 1),
            ];
            if matches(w) {
                count += 1;
            }
        }
    }
    count
}

/// Number of 2x2 windows holding a diagonal pair of ones, i.e. exactly
/// `[[1,0],[0,1]]` or `[[0,1],[1,0]]`.
pub fn u_stat(table: &BinaryTable) -> usize {
    count_windows(table, |w| w == [1, 0, 0, 1] || w == [0, 1, 1, 0])
}

/// Number of 2x2 windows exactly equal to `[[0,0],[1,1]]`. Rotations are not
/// counted.
pub fn u_prime_stat(table: &BinaryTable) -> usize {
    count_windows(table, |w| w == [0, 0, 1, 1])
}

/// Test statistic used by an exact test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    U,
    #[serde(rename = "uprime")]
    UPrime,
}

impl Statistic {
    pub fn evaluate(self, table: &BinaryTable) -> usize {
        match self {
            Statistic::U => u_stat(table),
            Statistic::UPrime => u_prime_stat(table),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistic::U => "u",
            Statistic::UPrime => "uprime",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "u" => Ok(Statistic::U),
            "uprime" | "u'" => Ok(Statistic::UPrime),
            other => Err(format!(
                "unknown statistic `{other}` (expected u or uprime)"
            )),
        }
    }
}

/// State of one cell of a partially filled table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Unknown,
}

impl Cell {
    pub fn value(self) -> Option<u8> {
        match self {
            Cell::Zero => Some(0),
            Cell::One => Some(1),
            Cell::Unknown => None,
        }
    }
}

/// A table filled in raster order: every cell before `next_index` is
/// determined, every cell at or after it is unknown.
///
/// Keeps running counts of placed ones, of discordances among edges whose
/// endpoints are both determined, and of undetermined edges leaving a
/// determined one (the discord an all-zero completion would add).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialTable {
    shape: Shape,
    cells: Vec<u8>,
    placed_ones: usize,
    discord: usize,
    determined_edges: usize,
    frontier_ones: usize,
}

impl PartialTable {
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            cells: Vec::with_capacity(shape.cells()),
            placed_ones: 0,
            discord: 0,
            determined_edges: 0,
            frontier_ones: 0,
        }
    }

    /// The first `prefix.len()` raster cells determined by `prefix`.
    pub fn from_prefix(shape: Shape, prefix: &[u8]) -> Self {
        let mut p = Self::new(shape);
        for &v in prefix {
            p.push(v);
        }
        p
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn next_index(&self) -> usize {
        self.cells.len()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.len() == self.shape.cells()
    }

    pub fn placed_ones(&self) -> usize {
        self.placed_ones
    }

    pub fn discord(&self) -> usize {
        self.discord
    }

    pub fn remaining_cells(&self) -> usize {
        self.shape.cells() - self.cells.len()
    }

    /// Edges with at least one undetermined endpoint.
    pub fn undetermined_edges(&self) -> usize {
        self.shape.edges() - self.determined_edges
    }

    /// Undetermined edges whose determined endpoint holds a one.
    pub fn frontier_ones(&self) -> usize {
        self.frontier_ones
    }

    pub fn determined(&self) -> &[u8] {
        &self.cells
    }

    pub fn cell(&self, index: usize) -> Cell {
        match self.cells.get(index) {
            Some(0) => Cell::Zero,
            Some(_) => Cell::One,
            None => Cell::Unknown,
        }
    }

    pub fn value(&self, index: usize) -> Option<u8> {
        self.cells.get(index).copied()
    }

    /// Determined up/left neighbours of the next cell, as `(zeros, ones)`.
    pub fn next_neighbor_counts(&self) -> (usize, usize) {
        let k = self.next_index();
        let (r, c) = self.shape.position(k);
        let mut counts = (0, 0);
        let mut add = |v: u8| {
            if v == 0 {
                counts.0 += 1
            } else {
                counts.1 += 1
            }
        };
        if r > 0 {
            add(self.cells[k - self.shape.cols]);
        }
        if c > 0 {
            add(self.cells[k - 1]);
        }
        counts
    }

    /// Number of forward (right/down) neighbours of cell `k`.
    pub fn forward_degree(&self, k: usize) -> usize {
        let (r, c) = self.shape.position(k);
        usize::from(c + 1 < self.shape.cols) + usize::from(r + 1 < self.shape.rows)
    }

    /// Determines the next raster cell.
    pub fn push(&mut self, value: u8) {
        assert!(value <= 1, "cell values are 0 or 1");
        assert!(!self.is_complete(), "table already complete");
        let k = self.next_index();
        let (zeros, ones) = self.next_neighbor_counts();
        self.determined_edges += zeros + ones;
        self.discord += if value == 1 { zeros } else { ones };
        self.frontier_ones -= ones;
        self.frontier_ones += value as usize * self.forward_degree(k);
        self.placed_ones += value as usize;
        self.cells.push(value);
    }

    pub fn to_table(&self) -> Option<BinaryTable> {
        self.is_complete()
            .then(|| BinaryTable::from_cells(self.shape, self.cells.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag3() -> BinaryTable {
        BinaryTable::from_rows(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    #[test]
    fn t1_examples() {
        assert_eq!(t1(&BinaryTable::zeros(Shape::new(2, 2))), 0);
        assert_eq!(t1(&BinaryTable::from_rows(&[[1, 0], [0, 0]])), 1);
        assert_eq!(t1(&diag3()), 3);
    }

    #[test]
    fn t2_examples() {
        assert_eq!(t2(&BinaryTable::zeros(Shape::new(2, 2))), 0);
        assert_eq!(t2(&BinaryTable::from_rows(&[[1, 0], [0, 0]])), 2);
        assert_eq!(t2(&BinaryTable::from_ones(Shape::new(3, 3), &[4])), 4);
    }

    #[test]
    fn u_examples() {
        assert_eq!(u_stat(&BinaryTable::from_rows(&[[1, 0], [0, 1]])), 1);
        assert_eq!(u_stat(&BinaryTable::zeros(Shape::new(2, 2))), 0);
        assert_eq!(u_stat(&diag3()), 2);
        assert_eq!(u_stat(&BinaryTable::from_rows(&[[1, 0, 1]])), 0);
    }

    #[test]
    fn u_prime_examples() {
        assert_eq!(u_prime_stat(&BinaryTable::from_rows(&[[0, 0], [1, 1]])), 1);
        assert_eq!(u_prime_stat(&BinaryTable::from_rows(&[[1, 1], [0, 0]])), 0);
        let ones = BinaryTable::from_rows(&[[1, 1, 1], [1, 1, 1], [1, 1, 1]]);
        assert_eq!(u_prime_stat(&ones), 0);
    }

    #[test]
    fn parse_examples() {
        let t = parse_table("10\n01\n").unwrap();
        assert_eq!(t, BinaryTable::from_rows(&[[1, 0], [0, 1]]));
        assert_eq!(parse_table("1 0\n0 1\n").unwrap(), t);
        let err = parse_table("10\n011\n").unwrap_err();
        assert_eq!(err.to_string(), "ragged row at line 2");
        assert!(matches!(
            parse_table("10\n0x\n"),
            Err(ParseError::BadCharacter {
                line: 2,
                found: 'x'
            })
        ));
        assert!(matches!(parse_table("\n\n"), Err(ParseError::Empty)));
    }

    #[test]
    fn writer_round_trips() {
        let t = diag3();
        assert_eq!(t.to_string(), "100\n010\n001\n");
        assert_eq!(parse_table(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn shape_counts() {
        let s = Shape::new(3, 4);
        assert_eq!(s.edges(), 17);
        assert_eq!(s.edge_list().len(), 17);
        assert_eq!(s.squares(), 6);
        assert_eq!(s.degree(0), 2);
        assert_eq!(s.degree(5), 4);
        assert_eq!(Shape::new(1, 1).edges(), 0);
    }

    #[test]
    fn suff_stats_admissibility() {
        let s = Shape::new(2, 2);
        assert!(SuffStats::new(1, 2).is_admissible(s));
        assert!(!SuffStats::new(0, 1).is_admissible(s));
        assert!(!SuffStats::new(4, 2).is_admissible(s));
        assert!(!SuffStats::new(5, 0).is_admissible(s));
        assert!(!SuffStats::new(2, 5).is_admissible(s));
    }

    #[test]
    fn partial_table_tracks_counts() {
        let shape = Shape::new(3, 3);
        let table = diag3();
        let mut p = PartialTable::new(shape);
        for (k, &v) in table.cells().iter().enumerate() {
            p.push(v);
            let prefix = &table.cells()[..=k];
            let ones: usize = prefix.iter().map(|&v| v as usize).sum();
            assert_eq!(p.placed_ones(), ones);
            let mut disc = 0;
            let mut det = 0;
            let mut frontier = 0;
            for (a, b) in shape.edge_list() {
                match (a <= k, b <= k) {
                    (true, true) => {
                        det += 1;
                        disc += usize::from(prefix[a] != prefix[b]);
                    }
                    (true, false) => frontier += prefix[a] as usize,
                    _ => {}
                }
            }
            assert_eq!(p.discord(), disc);
            assert_eq!(p.undetermined_edges(), shape.edges() - det);
            assert_eq!(p.frontier_ones(), frontier);
        }
        assert_eq!(p.to_table().unwrap(), table);
        assert_eq!(p.discord(), t2(&table));
    }
}
