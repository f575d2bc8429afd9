//! Exact completion counts for the last row.
//!
//! Once every cell above the last row is known, the unknown cells form a path
//! whose up-neighbours are fixed. The number of ways to finish the row with
//! exactly `o` ones and `d` discordant edges then follows from a backward
//! recursion along the row.

use std::cell::RefCell;
use std::rc::Rc;

/// Tables larger than this many entries are not built.
pub const MAX_ENTRIES: usize = 1 << 22;

#[derive(Debug)]
pub struct RowTail {
    /// Values above the row; empty for a one-row grid.
    up: Vec<u8>,
    max_ones: usize,
    max_discord: usize,
    /// `counts[(j, left, o, d)]`: completions of cells `j..` given the value
    /// `left` of cell `j - 1` (ignored at `j = 0`), using `o` ones and `d`
    /// discordant edges among the edges touching cells `j..`.
    counts: Vec<f64>,
}

impl RowTail {
    pub fn entries(cols: usize, max_ones: usize, max_discord: usize) -> usize {
        (cols + 1) * 2 * (max_ones + 1) * (max_discord + 1)
    }

    /// `up` has one value per column, or is empty when the grid has one row.
    pub fn new(cols: usize, up: &[u8], max_ones: usize, max_discord: usize) -> Self {
        assert!(up.is_empty() || up.len() == cols);
        let mut tail = Self {
            up: up.to_vec(),
            max_ones,
            max_discord,
            counts: vec![0.0; Self::entries(cols, max_ones, max_discord)],
        };
        for left in 0..2 {
            let i = tail.index(cols, left, 0, 0);
            tail.counts[i] = 1.0;
        }
        for j in (0..cols).rev() {
            for left in 0..2u8 {
                for o in 0..=max_ones {
                    for d in 0..=max_discord {
                        let total: f64 = (0..2u8)
                            .map(|v| {
                                let cost = tail.edge_cost(j, left, v);
                                if (v as usize) > o || cost > d {
                                    0.0
                                } else {
                                    tail.counts[tail.index(j + 1, v, o - v as usize, d - cost)]
                                }
                            })
                            .sum();
                        let i = tail.index(j, left, o, d);
                        tail.counts[i] = total;
                    }
                }
            }
        }
        tail
    }

    fn index(&self, j: usize, left: u8, o: usize, d: usize) -> usize {
        ((j * 2 + left as usize) * (self.max_ones + 1) + o) * (self.max_discord + 1) + d
    }

    /// Discordant edges closed by putting `v` in cell `j`.
    pub fn edge_cost(&self, j: usize, left: u8, v: u8) -> usize {
        let horizontal = usize::from(j > 0 && v != left);
        let vertical = usize::from(!self.up.is_empty() && v != self.up[j]);
        horizontal + vertical
    }

    pub fn covers(&self, up: &[u8], ones: usize, discord: usize) -> bool {
        self.up == up && ones <= self.max_ones && discord <= self.max_discord
    }

    /// Completions of cells `j..`; see the field description.
    pub fn count(&self, j: usize, left: u8, ones: usize, discord: usize) -> f64 {
        debug_assert!(ones <= self.max_ones && discord <= self.max_discord);
        self.counts[self.index(j, left, ones, discord)]
    }
}

thread_local! {
    static RECENT: RefCell<Vec<Rc<RowTail>>> = const { RefCell::new(Vec::new()) };
}

/// A table covering `(up, ones, discord)`, reusing one of the two most
/// recently built on this thread when possible. `None` if it would exceed
/// [`MAX_ENTRIES`].
pub fn cached(cols: usize, up: &[u8], ones: usize, discord: usize) -> Option<Rc<RowTail>> {
    RECENT.with(|recent| {
        let mut recent = recent.borrow_mut();
        if let Some(pos) = recent.iter().position(|t| t.covers(up, ones, discord)) {
            let hit = recent.remove(pos);
            recent.push(hit.clone());
            return Some(hit);
        }
        if RowTail::entries(cols, ones, discord) > MAX_ENTRIES {
            return None;
        }
        let built = Rc::new(RowTail::new(cols, up, ones, discord));
        if recent.len() == 2 {
            recent.remove(0);
        }
        recent.push(built.clone());
        Some(built)
    })
}
