//! Importance-weighted estimates from a batch of SIS draws.
//!
//! The raw weight of a draw is `1/q(X)` when accepted and 0 when rejected.
//! All weight arithmetic happens in log space, shifted by the largest
//! `-log q`, so tables with astronomically small proposal probabilities do
//! not overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::Draw;

/// Pairwise summation; reproducible for a fixed input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Raw weights divided by `exp(shift)`, together with the shift. Rejections
/// get 0. `None` when nothing was accepted.
fn scaled_weights(draws: &[Draw]) -> Option<(Vec<f64>, f64)> {
    let shift = draws
        .iter()
        .filter_map(Draw::log_q)
        .map(|lq| -lq)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return None;
    }
    let w = draws
        .iter()
        .map(|d| d.log_q().map_or(0.0, |lq| (-lq - shift).exp()))
        .collect();
    Some((w, shift))
}

/// Weights `(1/q_i) / sum_j (1/q_j)` over the accepted draws; rejections get 0.
pub fn standardized_weights(draws: &[Draw]) -> Result<Vec<f64>> {
    let (mut w, _) = scaled_weights(draws).ok_or(Error::EmptySample)?;
    let total = pairwise_sum(&w);
    for v in &mut w {
        *v /= total;
    }
    Ok(w)
}

/// `(p1, p2)`: weighted mass of draws whose statistic is strictly greater
/// than, respectively at least, the observed value.
///
/// `stats[i]` is the statistic of draw `i`; entries of rejected draws are
/// ignored. `p2` is computed as one minus the mass below, so it is exactly 1
/// when no accepted draw falls below the observed value.
pub fn estimate_pvalues(draws: &[Draw], stats: &[usize], observed: usize) -> Result<(f64, f64)> {
    assert_eq!(draws.len(), stats.len(), "one statistic per draw");
    let (w, _) = scaled_weights(draws).ok_or(Error::EmptySample)?;
    let total = pairwise_sum(&w);
    let mass = |keep: &dyn Fn(usize) -> bool| {
        let part: Vec<f64> = w
            .iter()
            .zip(stats)
            .map(|(&w, &s)| if keep(s) { w } else { 0.0 })
            .collect();
        pairwise_sum(&part) / total
    };
    let p1 = mass(&|s| s > observed).clamp(0.0, 1.0);
    let p2 = (1.0 - mass(&|s| s < observed)).clamp(0.0, 1.0);
    Ok((p1, p2.max(p1)))
}

fn mean_and_sample_var(w: &[f64]) -> (f64, f64) {
    let n = w.len() as f64;
    let mean = pairwise_sum(w) / n;
    let sq: Vec<f64> = w.iter().map(|&v| (v - mean) * (v - mean)).collect();
    (mean, pairwise_sum(&sq) / (n - 1.0))
}

/// Squared coefficient of variation of the raw weights, using the `n - 1`
/// sample variance.
pub fn cv2(draws: &[Draw]) -> Result<f64> {
    if draws.len() < 2 {
        return Err(Error::TooFewTrials {
            needed: 2,
            got: draws.len(),
        });
    }
    let (w, _) = scaled_weights(draws).ok_or(Error::AllWeightsZero)?;
    Ok(cv2_of_weights(&w))
}

/// [`cv2`] on explicit raw weights (any common scale).
pub fn cv2_of_weights(w: &[f64]) -> f64 {
    let (mean, var) = mean_and_sample_var(w);
    var / (mean * mean)
}

/// Effective sample size `n / (1 + cv2)`.
pub fn ess(n: usize, cv2: f64) -> f64 {
    n as f64 / (1.0 + cv2)
}

/// Mean raw weight over all trials (an unbiased estimate of the fiber size)
/// and its standard error.
pub fn estimate_fiber_size(draws: &[Draw]) -> Result<(f64, f64)> {
    if draws.len() < 2 {
        return Err(Error::TooFewTrials {
            needed: 2,
            got: draws.len(),
        });
    }
    let Some((w, shift)) = scaled_weights(draws) else {
        return Ok((0.0, 0.0));
    };
    let (mean, var) = mean_and_sample_var(&w);
    let scale = shift.exp();
    Ok((mean * scale, (var / draws.len() as f64).sqrt() * scale))
}

/// Summary of an exact test run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub n_trials: usize,
    pub n_accepted: usize,
    pub delta: f64,
    pub p1: f64,
    pub p2: f64,
    pub cv2: f64,
    pub ess: f64,
    pub fiber_size_estimate: f64,
    pub fiber_size_se: f64,
    pub observed_stat: usize,
    pub stat_name: String,
}

impl TestReport {
    /// Builds the report. `stats[i]` is the test statistic of draw `i`
    /// (ignored for rejections).
    pub fn from_draws(
        draws: &[Draw],
        stats: &[usize],
        observed: usize,
        stat_name: &str,
    ) -> Result<Self> {
        let n_trials = draws.len();
        let n_accepted = draws.iter().filter(|d| d.is_accepted()).count();
        let (p1, p2) = estimate_pvalues(draws, stats, observed)?;
        let (cv2, (size, se)) = if n_trials >= 2 {
            (cv2(draws)?, estimate_fiber_size(draws)?)
        } else {
            let w = (-draws[0].log_q().expect("accepted")).exp();
            (0.0, (w, 0.0))
        };
        Ok(Self {
            n_trials,
            n_accepted,
            delta: n_accepted as f64 / n_trials as f64,
            p1,
            p2,
            cv2,
            ess: ess(n_trials, cv2),
            fiber_size_estimate: size,
            fiber_size_se: se,
            observed_stat: observed,
            stat_name: stat_name.to_owned(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BinaryTable;

    fn acc(q: f64) -> Draw {
        Draw::Accepted {
            table: BinaryTable::zeros(crate::grid::Shape::new(1, 1)),
            log_q: q.ln(),
        }
    }

    fn rej() -> Draw {
        Draw::Rejected { stage: 0 }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn weight_examples() {
        assert_eq!(
            standardized_weights(&[acc(0.5), acc(0.5)]).unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            standardized_weights(&[acc(1.0), rej(), acc(1.0)]).unwrap(),
            vec![0.5, 0.0, 0.5]
        );
        let w = standardized_weights(&[acc(0.25), acc(0.5)]).unwrap();
        assert!(close(w[0], 2.0 / 3.0) && close(w[1], 1.0 / 3.0));
        assert_eq!(standardized_weights(&[rej()]), Err(Error::EmptySample));
    }

    #[test]
    fn pvalue_examples() {
        let draws = [acc(0.1), acc(0.1), acc(0.1)];
        let (p1, p2) = estimate_pvalues(&draws, &[0, 1, 2], 1).unwrap();
        assert!(close(p1, 1.0 / 3.0) && close(p2, 2.0 / 3.0));
        let (p1, p2) = estimate_pvalues(&draws, &[4, 4, 4], 4).unwrap();
        assert_eq!((p1, p2), (0.0, 1.0));
        // Rejected draws carry no mass whatever statistic is attached.
        let (p1, p2) = estimate_pvalues(&[acc(0.5), rej()], &[0, 9], 1).unwrap();
        assert_eq!((p1, p2), (0.0, 0.0));
    }

    #[test]
    fn cv2_examples() {
        assert_eq!(cv2(&[acc(0.5), acc(0.5), acc(0.5)]).unwrap(), 0.0);
        assert!(close(cv2(&[acc(1.0), acc(1.0 / 3.0)]).unwrap(), 0.5));
        assert!(close(cv2_of_weights(&[1.0, 3.0]), 0.5));
        assert_eq!(cv2(&[rej(), rej()]), Err(Error::AllWeightsZero));
        assert!(matches!(cv2(&[acc(1.0)]), Err(Error::TooFewTrials { .. })));
    }

    #[test]
    fn ess_examples() {
        assert_eq!(ess(5000, 0.0), 5000.0);
        assert_eq!(ess(1, 3.0), 0.25);
        // ESS 235.6 at N = 5000 corresponds to cv2 = 5000/235.6 - 1.
        let cv: f64 = 5000.0 / 235.6 - 1.0;
        assert!((cv - 20.22).abs() < 0.005);
        assert!((ess(5000, cv) - 235.6).abs() < 1e-9);
    }

    #[test]
    fn fiber_size_examples() {
        let (est, se) = estimate_fiber_size(&vec![acc(0.25); 10]).unwrap();
        assert!(close(est, 4.0) && se == 0.0);
        assert_eq!(estimate_fiber_size(&[rej(), rej()]).unwrap(), (0.0, 0.0));
        // Rejections count as zero-weight trials.
        let (est, _) = estimate_fiber_size(&[acc(0.25), rej()]).unwrap();
        assert!(close(est, 2.0));
    }

    #[test]
    fn log_space_survives_tiny_probabilities() {
        let tiny = |lq: f64| Draw::Accepted {
            table: BinaryTable::zeros(crate::grid::Shape::new(1, 1)),
            log_q: lq,
        };
        let draws = [tiny(-2000.0), tiny(-2000.0 - 2f64.ln())];
        let w = standardized_weights(&draws).unwrap();
        assert!(close(w[0], 1.0 / 3.0) && close(w[1], 2.0 / 3.0));
        assert!(close(cv2(&draws).unwrap(), cv2_of_weights(&[1.0, 2.0])));
    }

    #[test]
    fn report_fields_are_consistent() {
        let draws = [acc(0.25), rej(), acc(0.5), acc(0.25)];
        let r = TestReport::from_draws(&draws, &[1, 0, 2, 3], 2, "u").unwrap();
        assert_eq!(r.n_trials, 4);
        assert_eq!(r.n_accepted, 3);
        assert_eq!(r.delta, 0.75);
        assert!(r.p1 <= r.p2);
        assert!(close(r.ess, 4.0 / (1.0 + r.cv2)));
        assert!(close(r.p1, 0.4) && close(r.p2, 0.6));
    }

    #[test]
    fn pairwise_sum_matches_naive_for_integers() {
        let xs: Vec<f64> = (0..1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }
}
