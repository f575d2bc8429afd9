//! Exact conditional goodness-of-fit tests for the two-dimensional Ising
//! model.
//!
//! Given an observed 0-1 table, the test conditions on its sufficient
//! statistics `(T1, T2)` (number of ones, number of discordant neighbour
//! pairs). Under the model every table in that fiber is equally likely, so
//! p-values are expectations under the uniform distribution on the fiber.
//! They are estimated by sequential importance sampling ([`sampler`]) with
//! importance weights ([`inference`]); dead ends are pruned with a
//! cut-polytope LP relaxation ([`cutlp`]). [`oracle`] enumerates small fibers
//! exactly and [`models`] generates observed tables by Gibbs sampling.

pub mod batch;
pub mod bounds;
pub mod cutlp;
pub mod error;
pub mod grid;
pub mod inference;
pub mod models;
pub mod oracle;
pub mod sampler;
pub mod tail;

pub use error::{Error, ParseError, Result};
pub use grid::{
    parse_table, t1, t2, u_prime_stat, u_stat, BinaryTable, PartialTable, Shape, Statistic,
    SuffStats,
};
pub use inference::TestReport;
pub use sampler::{Draw, Proposal, Sampler, SamplerConfig};
