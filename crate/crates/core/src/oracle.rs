//! Exhaustive ground truth for small grids.
//!
//! Fibers are enumerated by walking the `C(mn, T1)` placements of the ones
//! and keeping those with the right number of discordant pairs. Tables are
//! packed into a `u64`, so the hard cap never exceeds 64 cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cutlp::CellBounds;
use crate::error::{Error, Result};
use crate::grid::{BinaryTable, PartialTable, Shape, Statistic, SuffStats};

pub const DEFAULT_CELL_CAP: usize = 25;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberSummary {
    pub shape: Shape,
    pub stats: SuffStats,
    pub statistic: Statistic,
    pub size: u64,
    pub histogram: BTreeMap<usize, u64>,
}

/// Bit-packed discord counter for one grid shape.
#[derive(Clone, Copy, Debug)]
struct Packed {
    shape: Shape,
    horizontal: u64,
    vertical: u64,
}

impl Packed {
    fn new(shape: Shape) -> Self {
        let mut horizontal = 0u64;
        let mut vertical = 0u64;
        for i in 0..shape.cells() {
            let (r, c) = shape.position(i);
            if c + 1 < shape.cols {
                horizontal |= 1 << i;
            }
            if r + 1 < shape.rows {
                vertical |= 1 << i;
            }
        }
        Self {
            shape,
            horizontal,
            vertical,
        }
    }

    fn t2(&self, x: u64) -> usize {
        let h = (x ^ (x >> 1)) & self.horizontal;
        let v = (x ^ (x >> self.shape.cols)) & self.vertical;
        (h.count_ones() + v.count_ones()) as usize
    }

    fn table(&self, x: u64) -> BinaryTable {
        let cells = (0..self.shape.cells())
            .map(|i| (x >> i & 1) as u8)
            .collect();
        BinaryTable::from_cells(self.shape, cells)
    }
}

fn check_cap(shape: Shape, cap: usize) -> Result<()> {
    let cap = cap.min(64);
    if shape.cells() > cap {
        return Err(Error::CapExceeded {
            cells: shape.cells(),
            cap,
        });
    }
    Ok(())
}

/// Calls `f` with every `k`-subset of `positions`, as a bit mask.
fn for_each_combination(positions: &[usize], k: usize, mut f: impl FnMut(u64)) {
    let n = positions.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(idx.iter().fold(0u64, |m, &i| m | 1 << positions[i]));
        // Advance to the next combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Calls `f` with every member of the fiber.
pub fn for_each_member(
    shape: Shape,
    stats: SuffStats,
    cap: usize,
    mut f: impl FnMut(BinaryTable),
) -> Result<()> {
    check_cap(shape, cap)?;
    if stats.t1 > shape.cells() {
        return Ok(());
    }
    let packed = Packed::new(shape);
    let positions: Vec<usize> = (0..shape.cells()).collect();
    for_each_combination(&positions, stats.t1, |x| {
        if packed.t2(x) == stats.t2 {
            f(packed.table(x));
        }
    });
    Ok(())
}

pub fn enumerate_fiber(
    shape: Shape,
    stats: SuffStats,
    statistic: Statistic,
    cap: usize,
) -> Result<FiberSummary> {
    let mut histogram = BTreeMap::new();
    let mut size = 0;
    for_each_member(shape, stats, cap, |t| {
        size += 1;
        *histogram.entry(statistic.evaluate(&t)).or_insert(0) += 1;
    })?;
    Ok(FiberSummary {
        shape,
        stats,
        statistic,
        size,
        histogram,
    })
}

/// Exact `(p1, p2)` under the uniform distribution on the fiber.
pub fn exact_pvalues(summary: &FiberSummary, observed: usize) -> Result<(f64, f64)> {
    if summary.size == 0 {
        return Err(Error::EmptyFiber);
    }
    let above: u64 = summary
        .histogram
        .range(observed + 1..)
        .map(|(_, c)| c)
        .sum();
    let at_least: u64 = summary.histogram.range(observed..).map(|(_, c)| c).sum();
    let n = summary.size as f64;
    Ok((above as f64 / n, at_least as f64 / n))
}

/// Exact bounds of `cell` over the fiber completions of `partial`.
pub fn exact_cell_bounds(
    stats: SuffStats,
    partial: &PartialTable,
    cell: usize,
    cap: usize,
) -> Result<CellBounds> {
    let shape = partial.shape();
    check_cap(shape, cap)?;
    if partial.value(cell).is_some() {
        return Err(Error::CellDetermined(cell));
    }
    let k = partial.next_index();
    let placed = partial.placed_ones();
    if placed > stats.t1 || stats.t1 - placed > shape.cells() - k {
        return Ok(CellBounds::Infeasible);
    }
    let packed = Packed::new(shape);
    let prefix = partial
        .determined()
        .iter()
        .enumerate()
        .fold(0u64, |m, (i, &v)| m | (v as u64) << i);
    let free: Vec<usize> = (k..shape.cells()).collect();
    let (mut lo, mut hi) = (1u8, 0u8);
    for_each_combination(&free, stats.t1 - placed, |x| {
        let x = x | prefix;
        if packed.t2(x) == stats.t2 {
            let v = (x >> cell & 1) as u8;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    });
    Ok(if lo > hi {
        CellBounds::Infeasible
    } else {
        CellBounds::Bounded { lo, hi }
    })
}

/// All fibers of a shape that have at least one member, with their sizes.
pub fn nonempty_fibers(shape: Shape, cap: usize) -> Result<Vec<(SuffStats, u64)>> {
    check_cap(shape, cap)?;
    let packed = Packed::new(shape);
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let n = shape.cells();
    for x in 0..(1u64 << n) {
        *counts
            .entry((x.count_ones() as usize, packed.t2(x)))
            .or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .map(|((t1, t2), c)| (SuffStats::new(t1, t2), c))
        .collect())
}
