//! Command-line syntax.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isingsis_core::models::DEFAULT_SWEEPS;
use isingsis_core::{Proposal, SamplerConfig, Statistic};

#[derive(Debug, Parser)]
#[command(
    name = "isingsis",
    version,
    about = "Exact goodness-of-fit tests for the 2-D Ising model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw an observed table from a model with a Gibbs sampler.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Print the statistics of a table.
    Stats(StatsArgs),
    /// Run the SIS exact test on a table.
    Test(TestArgs),
    /// Enumerate a small fiber exactly.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Subcommand)]
pub enum Simulate {
    /// `P(x) ∝ exp(alpha T1 + beta T2)`.
    Ising(IsingArgs),
    /// Second-order autologistic model.
    Autologistic(AutologisticArgs),
}

#[derive(Debug, Args)]
pub struct SimulateCommon {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// The table is the state after this many full sweeps.
    #[arg(long, default_value_t = DEFAULT_SWEEPS, value_parser = clap::value_parser!(usize))]
    pub sweeps: usize,
    /// Write the table here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IsingArgs {
    #[command(flatten)]
    pub common: SimulateCommon,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct AutologisticArgs {
    #[command(flatten)]
    pub common: SimulateCommon,
    #[arg(long, allow_hyphen_values = true)]
    pub b0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b2: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b3: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b4: f64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Table file; `-` reads standard input.
    pub input: PathBuf,
    /// Write the JSON here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProposalArg {
    Budget,
    Weighted,
    Naive,
}

impl From<ProposalArg> for Proposal {
    fn from(p: ProposalArg) -> Self {
        match p {
            ProposalArg::Budget => Proposal::Budget,
            ProposalArg::Weighted => Proposal::Weighted,
            ProposalArg::Naive => Proposal::Naive,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct TestArgs {
    /// Table file; `-` reads standard input.
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    #[arg(long, default_value = "u")]
    pub stat: Statistic,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Replace the number of ones of the input table.
    #[arg(long)]
    pub t1: Option<usize>,
    /// Replace the number of discordant pairs of the input table.
    #[arg(long)]
    pub t2: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct SamplerArgs {
    /// Run LP checks only when at most this many cells are unknown.
    #[arg(long, default_value_t = SamplerConfig::default().lp_cell_threshold)]
    pub lp_cells: usize,
    /// ... and the remaining discord is at most this many times the
    /// remaining ones.
    #[arg(long, default_value_t = SamplerConfig::default().lp_ratio_threshold)]
    pub lp_ratio: f64,
    #[arg(long, default_value_t = SamplerConfig::default().rho_clamp)]
    pub rho_clamp: f64,
    #[arg(long)]
    pub no_lp: bool,
    #[arg(long, value_enum, default_value_t = ProposalArg::Budget)]
    pub proposal: ProposalArg,
    /// Shorthand for `--proposal naive`.
    #[arg(long, conflicts_with = "proposal")]
    pub naive_proposal: bool,
}

impl SamplerArgs {
    pub fn config(&self) -> SamplerConfig {
        SamplerConfig {
            lp_cell_threshold: self.lp_cells,
            lp_ratio_threshold: self.lp_ratio,
            rho_clamp: self.rho_clamp,
            lp_enabled: !self.no_lp,
            proposal: if self.naive_proposal {
                Proposal::Naive
            } else {
                self.proposal.into()
            },
        }
    }
}

impl Default for SamplerArgs {
    fn default() -> Self {
        let c = SamplerConfig::default();
        Self {
            lp_cells: c.lp_cell_threshold,
            lp_ratio: c.lp_ratio_threshold,
            rho_clamp: c.rho_clamp,
            no_lp: !c.lp_enabled,
            proposal: ProposalArg::Budget,
            naive_proposal: false,
        }
    }
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long)]
    pub t1: usize,
    #[arg(long)]
    pub t2: usize,
    #[arg(long, default_value = "u")]
    pub stat: Statistic,
    /// Also report exact p-values for this observed statistic.
    #[arg(long)]
    pub observed: Option<usize>,
    #[arg(long, default_value_t = isingsis_core::oracle::DEFAULT_CELL_CAP)]
    pub cap: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
