//! The four subcommands as library functions returning their payloads.

use std::collections::BTreeMap;
use std::path::Path;

use isingsis_core::models::{gibbs_autologistic, gibbs_ising, AutologisticParams, IsingParams};
use isingsis_core::sampler::trial_rng;
use isingsis_core::{
    batch, oracle, parse_table, u_prime_stat, u_stat, BinaryTable, Proposal, Sampler, Shape,
    Statistic, SuffStats,
};
use serde::{Deserialize, Serialize};

use crate::args::{EnumerateArgs, Simulate, SimulateCommon, TestArgs};
use crate::CliError;

/// Version of every JSON payload.
pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsOutput {
    pub schema: u32,
    pub rows: usize,
    pub cols: usize,
    pub t1: usize,
    pub t2: usize,
    pub u: usize,
    pub uprime: usize,
}

/// Test report plus the configuration that produced it. The thread count is
/// left out: it cannot change the result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutput {
    pub schema: u32,
    pub rows: usize,
    pub cols: usize,
    pub t1: usize,
    pub t2: usize,
    pub stat: Statistic,
    pub observed_stat: usize,
    pub n_trials: usize,
    pub n_accepted: usize,
    pub delta: f64,
    pub p1: f64,
    pub p2: f64,
    pub cv2: f64,
    pub ess: f64,
    /// `null` when the estimate overflows `f64`.
    pub fiber_size_estimate: Option<f64>,
    pub fiber_size_se: Option<f64>,
    pub seed: u64,
    pub proposal: Proposal,
    pub lp_enabled: bool,
    pub lp_cell_threshold: usize,
    pub lp_ratio_threshold: f64,
    pub rho_clamp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerateOutput {
    pub schema: u32,
    pub rows: usize,
    pub cols: usize,
    pub t1: usize,
    pub t2: usize,
    pub stat: Statistic,
    pub size: u64,
    /// Statistic value to number of fiber members.
    pub histogram: BTreeMap<usize, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
}

/// Reads a table file; `-` is standard input.
pub fn read_table(path: &Path) -> Result<BinaryTable, CliError> {
    let text = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::io(path, e))?
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?
    };
    Ok(parse_table(&text)?)
}

pub fn cmd_simulate(command: &Simulate) -> Result<BinaryTable, CliError> {
    let shape = |c: &SimulateCommon| -> Result<Shape, CliError> {
        if c.rows == 0 || c.cols == 0 {
            return Err(CliError::Usage("--rows and --cols must be positive".into()));
        }
        if c.sweeps == 0 {
            return Err(CliError::Usage("--sweeps must be positive".into()));
        }
        Ok(Shape::new(c.rows, c.cols))
    };
    Ok(match command {
        Simulate::Ising(a) => {
            let params = IsingParams {
                alpha: a.alpha,
                beta: a.beta,
            };
            let mut rng = trial_rng(a.common.seed, 0);
            gibbs_ising(params, shape(&a.common)?, a.common.sweeps, &mut rng)
        }
        Simulate::Autologistic(a) => {
            let params = AutologisticParams {
                beta0: a.b0,
                beta1: a.b1,
                beta2: a.b2,
                beta3: a.b3,
                beta4: a.b4,
            };
            let mut rng = trial_rng(a.common.seed, 0);
            gibbs_autologistic(params, shape(&a.common)?, a.common.sweeps, &mut rng)
        }
    })
}

pub fn cmd_stats(table: &BinaryTable) -> StatsOutput {
    let stats = table.suff_stats();
    StatsOutput {
        schema: SCHEMA,
        rows: table.rows(),
        cols: table.cols(),
        t1: stats.t1,
        t2: stats.t2,
        u: u_stat(table),
        uprime: u_prime_stat(table),
    }
}

/// Runs the exact test of `table` on a pool of `args.threads` workers.
pub fn cmd_test(table: &BinaryTable, args: &TestArgs) -> Result<TestOutput, CliError> {
    let config = args.sampler.config();
    config.validate().map_err(CliError::Usage)?;
    let observed = table.suff_stats();
    let stats = SuffStats::new(
        args.t1.unwrap_or(observed.t1),
        args.t2.unwrap_or(observed.t2),
    );
    let observed_stat = args.stat.evaluate(table);
    let n =
        usize::try_from(args.samples).map_err(|_| CliError::Usage("--samples too large".into()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads as usize)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", args.threads)))?;
    let sampler = Sampler::new(table.shape(), stats, config);
    let report =
        pool.install(|| batch::run_test(&sampler, args.seed, n, args.stat, observed_stat))?;
    Ok(TestOutput {
        schema: SCHEMA,
        rows: table.rows(),
        cols: table.cols(),
        t1: stats.t1,
        t2: stats.t2,
        stat: args.stat,
        observed_stat,
        n_trials: report.n_trials,
        n_accepted: report.n_accepted,
        delta: report.delta,
        p1: report.p1,
        p2: report.p2,
        cv2: report.cv2,
        ess: report.ess,
        fiber_size_estimate: report
            .fiber_size_estimate
            .is_finite()
            .then_some(report.fiber_size_estimate),
        fiber_size_se: report
            .fiber_size_se
            .is_finite()
            .then_some(report.fiber_size_se),
        seed: args.seed,
        proposal: config.proposal,
        lp_enabled: config.lp_enabled,
        lp_cell_threshold: config.lp_cell_threshold,
        lp_ratio_threshold: config.lp_ratio_threshold,
        rho_clamp: config.rho_clamp,
    })
}

pub fn cmd_enumerate(args: &EnumerateArgs) -> Result<EnumerateOutput, CliError> {
    let shape = Shape::new(args.rows, args.cols);
    let stats = SuffStats::new(args.t1, args.t2);
    let summary = oracle::enumerate_fiber(shape, stats, args.stat, args.cap)?;
    let (p1, p2) = match args.observed {
        Some(obs) => {
            let (p1, p2) = oracle::exact_pvalues(&summary, obs)?;
            (Some(p1), Some(p2))
        }
        None => (None, None),
    };
    Ok(EnumerateOutput {
        schema: SCHEMA,
        rows: args.rows,
        cols: args.cols,
        t1: args.t1,
        t2: args.t2,
        stat: args.stat,
        size: summary.size,
        histogram: summary.histogram,
        observed: args.observed,
        p1,
        p2,
    })
}
