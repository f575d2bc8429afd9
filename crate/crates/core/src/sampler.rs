//! Sequential importance sampling of tables in a fiber.
//!
//! Cells are filled in raster order. At each step the sampler keeps only the
//! values that can still lead to a table with the target `(T1, T2)` (counting
//! and discord-budget checks, plus the cut-polytope LP near the end of the
//! table), then draws from a proposal that steers the discordance of the
//! newly closed edges towards the remaining budget. The exact probability of
//! every step is recorded so that `1/q(X)` is available as an importance
//! weight.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::DiscordBounds;
use crate::cutlp::{self, SuspensionIndex};
use crate::error::{Error, Result};
use crate::grid::{BinaryTable, PartialTable, Shape, SuffStats};
use crate::tail;

/// Conditional proposal used for each cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposal {
    /// Remaining-ones ratio reweighted by the discordance it would create.
    Weighted,
    /// `P(1) = remaining ones / remaining cells`.
    Naive,
    /// Naive odds corrected by how a one here spends the loss budget; see
    /// [`Sampler::prob_one`].
    Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// LP checks run only when at most this many cells remain unknown.
    pub lp_cell_threshold: usize,
    /// ... and the remaining discord is at most this multiple of the
    /// remaining ones (at least one).
    pub lp_ratio_threshold: f64,
    /// Clamp `rho` into `[eps, 1 - eps]`.
    pub rho_clamp: f64,
    pub lp_enabled: bool,
    pub proposal: Proposal,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            lp_cell_threshold: 20,
            lp_ratio_threshold: 2.0,
            rho_clamp: 1e-3,
            lp_enabled: true,
            proposal: Proposal::Budget,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.lp_ratio_threshold.is_nan() || self.lp_ratio_threshold < 0.0 {
            return Err("lp ratio threshold must be nonnegative".into());
        }
        if !(self.rho_clamp > 0.0 && self.rho_clamp < 0.5) {
            return Err("rho clamp must lie in (0, 0.5)".into());
        }
        Ok(())
    }
}

/// Outcome of one SIS trial.
#[derive(Clone, Debug, PartialEq)]
pub enum Draw {
    /// A table in the fiber and the log of its proposal probability.
    Accepted { table: BinaryTable, log_q: f64 },
    /// No value was feasible at raster cell `stage`.
    Rejected { stage: usize },
}

impl Draw {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Draw::Accepted { .. })
    }

    pub fn log_q(&self) -> Option<f64> {
        match self {
            Draw::Accepted { log_q, .. } => Some(*log_q),
            Draw::Rejected { .. } => None,
        }
    }

    pub fn table(&self) -> Option<&BinaryTable> {
        match self {
            Draw::Accepted { table, .. } => Some(table),
            Draw::Rejected { .. } => None,
        }
    }
}

/// Values allowed for the next cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Feasible {
    pub zero: bool,
    pub one: bool,
}

impl Feasible {
    pub fn allows(&self, value: u8) -> bool {
        if value == 0 {
            self.zero
        } else {
            self.one
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.zero && !self.one
    }

    pub fn values(&self) -> Vec<u8> {
        [(0, self.zero), (1, self.one)]
            .into_iter()
            .filter_map(|(v, ok)| ok.then_some(v))
            .collect()
    }
}

/// State of the LP-relevant part of a partial table: everything the
/// substituted LP depends on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct LpKey {
    next: usize,
    r1: usize,
    r2: usize,
    frontier: Box<[u64]>,
}

const LP_CACHE_LIMIT: usize = 1 << 20;

/// A sampler for one fiber.
///
/// LP verdicts are memoized; they are pure functions of the key, so sharing
/// the sampler across threads does not affect any draw.
pub struct Sampler {
    shape: Shape,
    stats: SuffStats,
    config: SamplerConfig,
    index: SuspensionIndex,
    bounds: DiscordBounds,
    /// `loss_suffix[i]`: sum of `4 - deg` over cells `>= i`.
    loss_suffix: Vec<usize>,
    lp_cache: Mutex<HashMap<LpKey, bool>>,
    root_feasible: OnceLock<bool>,
}

impl Sampler {
    pub fn new(shape: Shape, stats: SuffStats, config: SamplerConfig) -> Self {
        Self {
            shape,
            stats,
            config,
            index: SuspensionIndex::new(shape),
            bounds: DiscordBounds::new(shape),
            loss_suffix: {
                let mut v = vec![0; shape.cells() + 1];
                for i in (0..shape.cells()).rev() {
                    v[i] = v[i + 1] + 4 - shape.degree(i);
                }
                v
            },
            lp_cache: Mutex::new(HashMap::new()),
            root_feasible: OnceLock::new(),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn stats(&self) -> SuffStats {
        self.stats
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    /// Values of the next cell that survive the counting check, the discord
    /// budget check and (when triggered) LP feasibility.
    pub fn feasible_values(&self, state: &PartialTable) -> Feasible {
        assert!(!state.is_complete(), "no unknown cell left");
        if state.next_index() == 0 && !self.root_feasible() {
            return Feasible::default();
        }
        Feasible {
            zero: self.value_feasible(state, 0),
            one: self.value_feasible(state, 1),
        }
    }

    fn value_feasible(&self, state: &PartialTable, v: u8) -> bool {
        let t1 = self.stats.t1;
        let t2 = self.stats.t2;
        let k = state.next_index();
        let remaining_after = state.remaining_cells() - 1;

        // (a) counting
        let ones = state.placed_ones() + v as usize;
        if ones > t1 || t1 - ones > remaining_after {
            return false;
        }
        let r1 = t1 - ones;

        // (b) discord budget
        let (nz, no) = state.next_neighbor_counts();
        let discord = state.discord() + if v == 1 { nz } else { no };
        if discord > t2 {
            return false;
        }
        let r2 = t2 - discord;
        let open_edges = state.undetermined_edges() - (nz + no);
        let frontier = state.frontier_ones() - no + v as usize * state.forward_degree(k);
        // Each open discordant edge either touches a future one or joins a
        // determined one to a future zero.
        if r2 > open_edges || r2 > 4 * r1 + frontier {
            return false;
        }
        if r1 == 0 {
            return r2 == frontier;
        }
        if let Some(count) = self.tail_count(state, v, r1, r2) {
            return count > 0.0;
        }
        if !self.bounds.admits(state, v, r1, r2) {
            return false;
        }

        // (c) LP relaxation
        if self.config.lp_enabled
            && remaining_after <= self.config.lp_cell_threshold
            && (r2 as f64) <= self.config.lp_ratio_threshold * (r1.max(1) as f64)
        {
            let mut next = state.clone();
            next.push(v);
            return self.lp_feasible(&next, r1, r2);
        }
        true
    }

    /// Whether the fiber survives the range checks and, for grids no larger
    /// than the LP cell threshold, the LP relaxation. Evaluated once.
    pub fn root_feasible(&self) -> bool {
        *self.root_feasible.get_or_init(|| {
            if !self.stats.is_admissible(self.shape) {
                return false;
            }
            if self.config.lp_enabled && self.shape.cells() <= self.config.lp_cell_threshold {
                let root = PartialTable::new(self.shape);
                return cutlp::window_feasible(&self.index, &root, self.stats);
            }
            true
        })
    }

    fn lp_feasible(&self, state: &PartialTable, r1: usize, r2: usize) -> bool {
        let key = self.lp_key(state, r1, r2);
        if let Some(&hit) = self.lp_cache.lock().expect("lp cache").get(&key) {
            return hit;
        }
        let verdict = cutlp::window_feasible(&self.index, state, self.stats);
        let mut cache = self.lp_cache.lock().expect("lp cache");
        if cache.len() < LP_CACHE_LIMIT {
            cache.insert(key, verdict);
        }
        verdict
    }

    fn lp_key(&self, state: &PartialTable, r1: usize, r2: usize) -> LpKey {
        let k = state.next_index();
        let start = k.saturating_sub(self.shape.cols + 1);
        let cells = &state.determined()[start..k];
        let mut frontier = vec![0u64; cells.len().div_ceil(64)];
        for (i, &v) in cells.iter().enumerate() {
            frontier[i / 64] |= (v as u64) << (i % 64);
        }
        LpKey {
            next: k,
            r1,
            r2,
            frontier: frontier.into_boxed_slice(),
        }
    }

    /// Exact number of completions after placing `v`, when every unknown
    /// cell left would be in the last row and the count table is small
    /// enough. `r1` and `r2` are the ones and discord still owed after `v`.
    fn tail_count(&self, state: &PartialTable, v: u8, r1: usize, r2: usize) -> Option<f64> {
        let cols = self.shape.cols;
        let start = self.shape.cells() - cols;
        let k = state.next_index();
        if k + 1 < start {
            return None;
        }
        let up: Vec<u8> = if self.shape.rows == 1 {
            Vec::new()
        } else {
            let cells = state.determined();
            (start - cols..start)
                .map(|i| if i == k { v } else { cells[i] })
                .collect()
        };
        let tail = tail::cached(cols, &up, r1, r2)?;
        Some(tail.count(k + 1 - start, v, r1, r2))
    }

    /// Probability that the proposal puts a one in the next cell, given that
    /// both values are feasible.
    ///
    /// For [`Proposal::Budget`]: with `F` the undetermined edges at
    /// determined ones, the loss `l = F + 4 r1 - r2` must reach exactly 0,
    /// and a one here spends `c = (4 - deg) + 2 (up/left ones)` of it while
    /// a zero spends nothing. Treating the losses of the other ones as
    /// independent Poisson(`kappa`), the odds of a one are the naive odds
    /// times `P(Pois((r1 - 1) kappa) = l - c) / P(Pois(r1 kappa) = l)`,
    /// where `kappa` is the loss of a one dropped at random on the later
    /// cells: their mean `4 - deg` plus `4 r1 / rc` for adjacency.
    pub fn prob_one(&self, state: &PartialTable) -> f64 {
        let r1 = (self.stats.t1 - state.placed_ones()) as f64;
        let rc = state.remaining_cells() as f64;
        let p = r1 / rc;
        match self.config.proposal {
            Proposal::Naive => p,
            Proposal::Weighted => {
                let (a0, a1) = state.next_neighbor_counts();
                let open = state.undetermined_edges();
                let eps = self.config.rho_clamp;
                let rho = if open == 0 {
                    0.5
                } else {
                    let r2 = self.stats.t2.saturating_sub(state.discord()) as f64;
                    (r2 / open as f64).clamp(eps, 1.0 - eps)
                };
                let w1 = p * rho.powi(a0 as i32) * (1.0 - rho).powi(a1 as i32);
                let w0 = (1.0 - p) * rho.powi(a1 as i32) * (1.0 - rho).powi(a0 as i32);
                w1 / (w1 + w0)
            }
            Proposal::Budget => {
                if r1 == 0.0 || r1 >= rc {
                    return p;
                }
                if let Some(exact) = self.tail_ratio(state) {
                    return exact;
                }
                let k = state.next_index();
                let (_, a1) = state.next_neighbor_counts();
                let r2 = self.stats.t2 as f64 - state.discord() as f64;
                let loss = (state.frontier_ones() as f64 + 4.0 * r1 - r2).max(0.0);
                let cost = (4 - self.shape.degree(k) + 2 * a1) as f64;
                let later = rc - 1.0;
                let kappa = self.loss_suffix[k + 1] as f64 / later + 4.0 * p;
                let spare = loss - cost;
                let mut log_odds = (r1 / (rc - r1)).ln() + kappa;
                if spare < 0.0 {
                    log_odds = f64::NEG_INFINITY;
                } else {
                    if spare > 0.0 {
                        log_odds += spare * (1.0 - 1.0 / r1).ln();
                    }
                    for i in 0..cost as usize {
                        log_odds += (loss - i as f64).ln();
                    }
                    log_odds -= cost * (r1 * kappa).ln();
                }
                let eps = self.config.rho_clamp;
                (1.0 / (1.0 + (-log_odds).exp())).clamp(eps, 1.0 - eps)
            }
        }
    }

    /// Share of the completions that put a one in the next cell, when both
    /// counts are available.
    fn tail_ratio(&self, state: &PartialTable) -> Option<f64> {
        let (nz, no) = state.next_neighbor_counts();
        let r1 = self.stats.t1 - state.placed_ones();
        let r2 = self.stats.t2.checked_sub(state.discord())?;
        let zero = self.tail_count(state, 0, r1, r2.checked_sub(no)?)?;
        let one = self.tail_count(state, 1, r1.checked_sub(1)?, r2.checked_sub(nz)?)?;
        (zero + one > 0.0).then(|| one / (zero + one))
    }

    /// Draws the next cell from the proposal restricted to `feasible`.
    /// Returns the value and its exact conditional probability.
    pub fn propose_cell<R: Rng + ?Sized>(
        &self,
        state: &PartialTable,
        feasible: Feasible,
        rng: &mut R,
    ) -> (u8, f64) {
        match (feasible.zero, feasible.one) {
            (true, false) => (0, 1.0),
            (false, true) => (1, 1.0),
            (true, true) => {
                let p1 = self.prob_one(state);
                if rng.gen::<f64>() < p1 {
                    (1, p1)
                } else {
                    (0, 1.0 - p1)
                }
            }
            (false, false) => panic!("propose_cell needs a feasible value"),
        }
    }

    fn step_probability(&self, state: &PartialTable, feasible: Feasible, value: u8) -> f64 {
        if feasible.zero && feasible.one {
            let p1 = self.prob_one(state);
            if value == 1 {
                p1
            } else {
                1.0 - p1
            }
        } else if feasible.allows(value) {
            1.0
        } else {
            0.0
        }
    }

    /// One SIS trial.
    pub fn sample_table<R: Rng + ?Sized>(&self, rng: &mut R) -> Draw {
        let mut state = PartialTable::new(self.shape);
        let mut log_q = 0.0;
        while !state.is_complete() {
            let feasible = self.feasible_values(&state);
            if feasible.is_empty() {
                return Draw::Rejected {
                    stage: state.next_index(),
                };
            }
            let (v, p) = self.propose_cell(&state, feasible, rng);
            log_q += p.ln();
            state.push(v);
        }
        let table = state.to_table().expect("complete");
        if table.suff_stats() != self.stats {
            return Draw::Rejected {
                stage: self.shape.cells(),
            };
        }
        Draw::Accepted { table, log_q }
    }

    /// Log proposal probability of `table`, recomputed along the raster walk
    /// with the same step logic as [`Sampler::sample_table`]. Returns
    /// `-inf` if the proposal cannot produce the table.
    pub fn replay_log_q(&self, table: &BinaryTable) -> Result<f64> {
        if table.shape() != self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                found: table.shape(),
            });
        }
        let found = table.suff_stats();
        if found != self.stats {
            return Err(Error::OffFiber {
                expected: self.stats,
                found,
            });
        }
        let mut state = PartialTable::new(self.shape);
        let mut log_q = 0.0;
        for &v in table.cells() {
            let feasible = self.feasible_values(&state);
            let p = self.step_probability(&state, feasible, v);
            if p == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            log_q += p.ln();
            state.push(v);
        }
        Ok(log_q)
    }

    /// Trial `trial` of a run seeded with `seed`.
    pub fn trial(&self, seed: u64, trial: u64) -> Draw {
        self.sample_table(&mut trial_rng(seed, trial))
    }
}

/// Independent random stream for one trial: ChaCha8 keyed by `seed`, with the
/// trial index selecting the stream, so a trial never depends on scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Convenience wrapper building a one-off [`Sampler`].
pub fn sample_table<R: Rng + ?Sized>(
    stats: SuffStats,
    shape: Shape,
    config: SamplerConfig,
    rng: &mut R,
) -> Draw {
    Sampler::new(shape, stats, config).sample_table(rng)
}
