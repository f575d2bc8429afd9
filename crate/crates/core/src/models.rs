//! Gibbs samplers producing observed tables from the Ising model and the
//! second-order autologistic model.
//!
//! Both chains start from the all-zero table and update cells in raster
//! order, each from its full conditional given the freshest neighbour
//! values. Out-of-grid neighbours are absent (open boundary).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{BinaryTable, Shape};

/// Sweeps used to produce one observed table (the 1001st state of the chain).
pub const DEFAULT_SWEEPS: usize = 1001;

/// `P(x) ∝ exp(alpha * T1(x) + beta * T2(x))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Conditional logit `c_ij = b0 + b1*(left+right) + b2*(up+down)
/// + b3*(up-left + down-right) + b4*(up-right + down-left)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutologisticParams {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

#[inline]
fn logistic(c: f64) -> f64 {
    1.0 / (1.0 + (-c).exp())
}

fn cell(table: &BinaryTable, r: isize, c: isize) -> f64 {
    if r < 0 || c < 0 || r as usize >= table.rows() || c as usize >= table.cols() {
        0.0
    } else {
        table.get(r as usize, c as usize) as f64
    }
}

/// Log-odds of `x_ij = 1` given all other cells under the Ising model:
/// `alpha + beta * deg - 2 * beta * (sum of neighbours)`.
pub fn ising_logit(table: &BinaryTable, index: usize, params: IsingParams) -> f64 {
    let shape = table.shape();
    let (deg, sum) = shape.neighbors(index).fold((0.0, 0.0), |(d, s), j| {
        (d + 1.0, s + table.cells()[j] as f64)
    });
    params.alpha + params.beta * deg - 2.0 * params.beta * sum
}

/// Log-odds of `x_ij = 1` given all other cells under the autologistic model.
pub fn autologistic_logit(table: &BinaryTable, index: usize, params: AutologisticParams) -> f64 {
    let (r, c) = table.shape().position(index);
    let (r, c) = (r as isize, c as isize);
    let horizontal = cell(table, r, c - 1) + cell(table, r, c + 1);
    let vertical = cell(table, r - 1, c) + cell(table, r + 1, c);
    let diagonal = cell(table, r - 1, c - 1) + cell(table, r + 1, c + 1);
    let anti_diagonal = cell(table, r - 1, c + 1) + cell(table, r + 1, c - 1);
    params.beta0
        + params.beta1 * horizontal
        + params.beta2 * vertical
        + params.beta3 * diagonal
        + params.beta4 * anti_diagonal
}

fn gibbs<R: Rng + ?Sized>(
    shape: Shape,
    sweeps: usize,
    rng: &mut R,
    logit: impl Fn(&BinaryTable, usize) -> f64,
) -> BinaryTable {
    assert!(sweeps >= 1, "need at least one sweep");
    let mut table = BinaryTable::zeros(shape);
    for _ in 0..sweeps {
        for i in 0..shape.cells() {
            let p = logistic(logit(&table, i));
            let (r, c) = shape.position(i);
            table.set(r, c, u8::from(rng.gen::<f64>() < p));
        }
    }
    table
}

pub fn gibbs_ising<R: Rng + ?Sized>(
    params: IsingParams,
    shape: Shape,
    sweeps: usize,
    rng: &mut R,
) -> BinaryTable {
    gibbs(shape, sweeps, rng, |t, i| ising_logit(t, i, params))
}

pub fn gibbs_autologistic<R: Rng + ?Sized>(
    params: AutologisticParams,
    shape: Shape,
    sweeps: usize,
    rng: &mut R,
) -> BinaryTable {
    gibbs(shape, sweeps, rng, |t, i| autologistic_logit(t, i, params))
}
