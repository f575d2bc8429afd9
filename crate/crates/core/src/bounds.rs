//! Cheap, sound bounds on the discord that a completion of a raster prefix
//! can still add.
//!
//! Fix a prefix with `value` about to be placed at the next cell, and let `S`
//! be the set of later cells that will hold ones. The discord on the edges
//! that are still undetermined after the placement is
//!
//! ```text
//! F + sum_{f in S} (deg f - 2 a_f) - 2 e(S)
//! ```
//!
//! where `F` counts edges from determined ones to later cells, `a_f` is the
//! number of determined one neighbours of `f` and `e(S)` the number of edges
//! inside `S`.
//!
//! Upper bound: the grid is tiled into 2x2 blocks, cut down to the later
//! cells, in each of the four possible alignments. Counting only edges
//! inside blocks in `e(S)`, block `B` contributes `v_B(j)`, the best total
//! of `j` terms in `B` less twice the edges among them. Every such `v_B` is
//! concave (checked by the tests for all shapes a raster cut can produce),
//! so the best total for `|S| = ones` is the sum of the `ones` largest
//! marginal gains over all blocks. Each alignment gives a valid bound; the
//! smallest is used.
//!
//! Lower bound: the same discord equals `F + sum_{f in S} h_f + d(S)`, where
//! `h_f` is the number of determined neighbours of `f` less `2 a_f` and
//! `d(S)` counts edges from `S` to the other later cells. `d(S)` is at least
//! one when `S` is a proper nonempty subset, since the later cells form a
//! connected region.

use crate::grid::{PartialTable, Shape};

/// Marginal gains lie in `-8..=4`.
const OFFSET: isize = 8;
const GAINS: usize = 13;

type Histogram = [u32; GAINS];

/// Per-shape tables for [`DiscordBounds::after`].
#[derive(Clone, Debug)]
pub struct DiscordBounds {
    shape: Shape,
    /// The four placements of the block grid; the upper bound is the best
    /// of them.
    tilings: Vec<Tiling>,
}

/// Blocks anchored at rows `2i - dr` and columns `2j - dc`.
#[derive(Clone, Debug)]
struct Tiling {
    shape: Shape,
    dr: usize,
    dc: usize,
    block_cols: usize,
    /// Gains of every uncut block with no determined neighbours.
    whole: Vec<([isize; 4], usize)>,
    /// `suffix[i]`: block gains over cells `>= i`, assuming no determined
    /// neighbours.
    suffix: Vec<Histogram>,
}

/// Marginal gains `v(1) - v(0), v(2) - v(1), ...` of one block, given its
/// cells (at most four, raster order) and their terms.
fn block_gains(cols: usize, cells: &[usize], terms: &[isize]) -> ([isize; 4], usize) {
    let n = cells.len();
    let adjacent = |a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        (b == a + 1 && b % cols != 0) || b == a + cols
    };
    let mut best = [isize::MIN; 5];
    for mask in 0u32..1 << n {
        let mut total = 0;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                total += terms[i];
                for j in i + 1..n {
                    if mask >> j & 1 == 1 && adjacent(cells[i], cells[j]) {
                        total -= 2;
                    }
                }
            }
        }
        let size = mask.count_ones() as usize;
        best[size] = best[size].max(total);
    }
    let mut gains = [0; 4];
    for j in 0..n {
        gains[j] = best[j + 1] - best[j];
    }
    debug_assert!(
        gains[..n].windows(2).all(|w| w[0] >= w[1]),
        "block gains must be concave"
    );
    (gains, n)
}

fn add(hist: &mut Histogram, gains: &[isize], sign: i32) {
    for &g in gains {
        let slot = &mut hist[(g + OFFSET) as usize];
        *slot = (*slot as i32 + sign) as u32;
    }
}

/// Sum of the `count` largest gains.
fn top_sum(hist: &Histogram, count: usize) -> isize {
    let mut left = count;
    let mut total = 0isize;
    for slot in (0..GAINS).rev() {
        let take = left.min(hist[slot] as usize);
        total += take as isize * (slot as isize - OFFSET);
        left -= take;
    }
    total
}

/// Smallest possible edge boundary of a set of `r` cells in the grid, from
/// below: `min(ceil(2 sqrt r), ceil(2 sqrt(mn - r)), min(m, n))` for
/// `0 < r < mn`. If no row and no column is full, every occupied row and
/// column holds a boundary edge, so the boundary is at least `a + b` for a
/// set spanning `a` rows and `b` columns, and `a + b >= 2 sqrt(ab) >= 2
/// sqrt r`. A full row together with an unoccupied row, or a full column
/// together with an unoccupied column, puts a boundary edge in every column
/// or row. A full row together with a full column leaves the complement
/// with neither, and the first case applies to it.
pub fn isoperimetric_floor(shape: Shape, r: usize) -> usize {
    let n = shape.cells();
    if r == 0 || r >= n {
        return 0;
    }
    let ceil_2sqrt = |x: usize| {
        // Smallest b with b^2 >= 4x.
        let mut b = (2.0 * (x as f64).sqrt()) as usize;
        while b * b < 4 * x {
            b += 1;
        }
        while b > 0 && (b - 1) * (b - 1) >= 4 * x {
            b -= 1;
        }
        b
    };
    ceil_2sqrt(r)
        .min(ceil_2sqrt(n - r))
        .min(shape.rows.min(shape.cols))
}

impl Tiling {
    fn new(shape: Shape, dr: usize, dc: usize) -> Self {
        let n = shape.cells();
        let block_rows = (shape.rows + dr).div_ceil(2);
        let block_cols = (shape.cols + dc).div_ceil(2);
        let mut this = Self {
            shape,
            dr,
            dc,
            block_cols,
            whole: Vec::new(),
            suffix: Vec::new(),
        };
        this.whole = (0..block_rows * block_cols)
            .map(|b| {
                let (cells, len) = this.block_cells((b / block_cols, b % block_cols), 0);
                let mut terms = [0; 4];
                for (t, &i) in terms.iter_mut().zip(&cells[..len]) {
                    *t = shape.degree(i) as isize;
                }
                block_gains(shape.cols, &cells[..len], &terms[..len])
            })
            .collect();
        // Whole block rows `>= br`.
        let mut rows_below = vec![[0u32; GAINS]; block_rows + 1];
        for br in (0..block_rows).rev() {
            rows_below[br] = rows_below[br + 1];
            for bc in 0..block_cols {
                this.add_default(&mut rows_below[br], (br, bc), 0, 1);
            }
        }
        this.suffix = (0..=n)
            .map(|i| {
                if i == n {
                    return [0; GAINS];
                }
                let br = (i / shape.cols + dr) / 2;
                let mut h = rows_below[br + 1];
                for bc in 0..block_cols {
                    this.add_default(&mut h, (br, bc), i, 1);
                }
                h
            })
            .collect();
        this
    }

    fn block_of(&self, cell: usize) -> (usize, usize) {
        let (r, c) = self.shape.position(cell);
        ((r + self.dr) / 2, (c + self.dc) / 2)
    }

    /// Cells of a block with index `>= start`, in raster order.
    fn block_cells(&self, (br, bc): (usize, usize), start: usize) -> ([usize; 4], usize) {
        let mut out = [0; 4];
        let mut len = 0;
        let rows = (2 * br).saturating_sub(self.dr)..(2 * br + 2 - self.dr).min(self.shape.rows);
        for r in rows {
            let cols =
                (2 * bc).saturating_sub(self.dc)..(2 * bc + 2 - self.dc).min(self.shape.cols);
            for c in cols {
                let i = self.shape.index(r, c);
                if i >= start {
                    out[len] = i;
                    len += 1;
                }
            }
        }
        (out, len)
    }

    fn add_default(&self, hist: &mut Histogram, block: (usize, usize), start: usize, sign: i32) {
        let (g, len) = self.default_gains(block, start);
        add(hist, &g[..len], sign);
    }

    fn default_gains(&self, block: (usize, usize), start: usize) -> ([isize; 4], usize) {
        let (cells, len) = self.block_cells(block, start);
        if len > 0 && cells[0] == self.block_cells(block, 0).0[0] {
            return self.whole[block.0 * self.block_cols + block.1];
        }
        let mut terms = [0; 4];
        for (t, &i) in terms.iter_mut().zip(&cells[..len]) {
            *t = self.shape.degree(i) as isize;
        }
        block_gains(self.shape.cols, &cells[..len], &terms[..len])
    }

    /// Largest `sum (deg f - 2 a_f)` less twice the in-block edges over
    /// `ones` cells `>= start`. `a[f - start]` is `a_f` for the cells of the
    /// band; `touched` lists the band cells with `a_f > 0`, increasing.
    fn best_gain(&self, start: usize, a: &[usize], touched: &[usize], ones: usize) -> isize {
        let mut hist = self.suffix[start];
        let mut seen: Vec<(usize, usize)> = Vec::with_capacity(touched.len());
        for &f in touched {
            let block = self.block_of(f);
            if seen.contains(&block) {
                continue;
            }
            seen.push(block);
            self.add_default(&mut hist, block, start, -1);
            let (cells, len) = self.block_cells(block, start);
            let mut terms = [0; 4];
            for (t, &i) in terms.iter_mut().zip(&cells[..len]) {
                let shared = a.get(i - start).copied().unwrap_or(0);
                *t = self.shape.degree(i) as isize - 2 * shared as isize;
            }
            let (g, len) = block_gains(self.shape.cols, &cells[..len], &terms[..len]);
            add(&mut hist, &g[..len], 1);
        }
        top_sum(&hist, ones)
    }
}

impl DiscordBounds {
    pub fn new(shape: Shape) -> Self {
        let tilings = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .filter(|&(dr, dc)| (dr == 0 || shape.rows > 1) && (dc == 0 || shape.cols > 1))
            .map(|(dr, dc)| Tiling::new(shape, dr, dc))
            .collect();
        Self { shape, tilings }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// `(lo, hi)` bounding the discord on the edges still undetermined after
    /// `value` is placed at the next cell of `state` and exactly `ones`
    /// further ones fill the remaining cells.
    pub fn after(&self, state: &PartialTable, value: u8, ones: usize) -> (usize, usize) {
        let band = Band::new(self.shape, state, value);
        (band.lower(self.shape, ones), self.upper(&band, ones))
    }

    /// Whether `discord` lies within [`DiscordBounds::after`]. The block
    /// work is skipped when the bound without determined neighbours already
    /// decides: lowering the terms by `2 a_f` lowers the upper bound by at
    /// most `2 sum a_f`.
    pub fn admits(&self, state: &PartialTable, value: u8, ones: usize, discord: usize) -> bool {
        let band = Band::new(self.shape, state, value);
        if band.start >= self.shape.cells() {
            return discord == band.frontier;
        }
        if discord < band.lower(self.shape, ones) {
            return false;
        }
        let loose = self
            .tilings
            .iter()
            .map(|t| top_sum(&t.suffix[band.start], ones))
            .min()
            .expect("at least one tiling");
        let loose = band.frontier as isize + loose;
        let shared: usize = band.a.iter().sum();
        let d = discord as isize;
        if d > loose {
            return false;
        }
        if d + 2 * shared as isize <= loose {
            return true;
        }
        discord <= self.upper(&band, ones)
    }

    fn upper(&self, band: &Band, ones: usize) -> usize {
        if band.start >= self.shape.cells() {
            return band.frontier;
        }
        let gain = self
            .tilings
            .iter()
            .map(|t| t.best_gain(band.start, &band.a, &band.touched, ones))
            .min()
            .expect("at least one tiling");
        (band.frontier as isize + gain).max(0) as usize
    }
}

/// The cells after the next one that can have determined neighbours.
struct Band {
    start: usize,
    /// `F`, counted after the placement.
    frontier: usize,
    /// `a[f - start] = a_f`.
    a: Vec<usize>,
    /// Cells with `a_f > 0`, increasing.
    touched: Vec<usize>,
    /// Number of later cells with each `h_f`, shifted by 2 into `0..=4`.
    h_counts: [usize; 5],
}

impl Band {
    fn new(shape: Shape, state: &PartialTable, value: u8) -> Self {
        let cols = shape.cols;
        let n = shape.cells();
        let k = state.next_index();
        let start = k + 1;
        let (_, ones_nb) = state.next_neighbor_counts();
        let frontier = state.frontier_ones() - ones_nb + value as usize * state.forward_degree(k);
        let mut band = Self {
            start,
            frontier,
            a: Vec::new(),
            touched: Vec::new(),
            h_counts: [0; 5],
        };
        if start >= n {
            return band;
        }
        // Only cells up to `k + cols` can have determined neighbours: their
        // up neighbour, and for `start` also its left one when in the same row.
        let cells = state.determined();
        let value_at = |i: usize| if i == k { value } else { cells[i] };
        let band_end = (k + cols).min(n - 1);
        band.a = vec![0; band_end + 1 - start];
        for f in start..=band_end {
            let mut det = 0;
            let mut a = 0;
            if f >= cols {
                det += 1;
                a += value_at(f - cols) as usize;
            }
            if f == start && !start.is_multiple_of(cols) {
                det += 1;
                a += value as usize;
            }
            if a > 0 {
                band.a[f - start] = a;
                band.touched.push(f);
            }
            band.h_counts[det + 2 - 2 * a] += 1;
        }
        band.h_counts[2] += n - 1 - band_end;
        band
    }

    fn lower(&self, shape: Shape, ones: usize) -> usize {
        let n = shape.cells();
        if self.start >= n {
            return self.frontier;
        }
        let mut left = ones;
        let mut least = 0isize;
        for (slot, &count) in self.h_counts.iter().enumerate() {
            let take = left.min(count);
            least += take as isize * (slot as isize - 2);
            left -= take;
        }
        let boundary = isize::from(ones > 0 && ones < n - self.start);
        let local = self.frontier as isize + least + boundary;

        // `a_f <= 2`, and only `start` can reach 2.
        let twos = usize::from(self.a[0] == 2);
        let shared = if ones <= twos {
            2 * ones
        } else {
            (self.touched.len() + twos).min(ones + twos)
        };
        let global = self.frontier as isize + isoperimetric_floor(shape, ones) as isize
            - 2 * shared as isize;
        local.max(global).max(0) as usize
    }
}
