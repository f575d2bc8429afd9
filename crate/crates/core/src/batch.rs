//! Running many SIS trials in parallel with reproducible results.

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::Statistic;
use crate::inference::TestReport;
use crate::sampler::{Draw, Sampler};

/// Runs trials `0..n` of `seed` on the current rayon pool. Trial `i` always
/// uses stream `i`, so the output does not depend on the number of threads.
pub fn run_trials(sampler: &Sampler, seed: u64, n: usize) -> Vec<Draw> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| sampler.trial(seed, i))
        .collect()
}

/// Statistic of every draw (0 for rejections).
pub fn draw_statistics(draws: &[Draw], statistic: Statistic) -> Vec<usize> {
    draws
        .iter()
        .map(|d| d.table().map_or(0, |t| statistic.evaluate(t)))
        .collect()
}

/// Runs `n` trials and reduces them to a [`TestReport`] for `statistic`.
pub fn run_test(
    sampler: &Sampler,
    seed: u64,
    n: usize,
    statistic: Statistic,
    observed: usize,
) -> Result<TestReport> {
    let draws = run_trials(sampler, seed, n);
    let stats = draw_statistics(&draws, statistic);
    TestReport::from_draws(&draws, &stats, observed, statistic.name())
}
