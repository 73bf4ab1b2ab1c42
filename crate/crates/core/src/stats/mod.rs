//! Distribution arithmetic and the tests used to compare zero-count samples.

mod gamma;

use std::collections::BTreeSet;

use serde::Serialize;

pub use gamma::{chi_square_survival, ln_gamma, regularized_gamma_p, regularized_gamma_q};

use crate::distinguisher::CountDistribution;
use crate::error::{Error, Result};

/// Bins whose expected count falls below this are pooled into a neighbour.
pub const POOLING_THRESHOLD: f64 = 5.0;

/// Tally of observed zero-counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    rounds: usize,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalDistribution {
    /// Builds directly from per-count tallies (index = zero-count).
    pub fn from_tallies(rounds: usize, counts: Vec<u64>) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidRounds);
        }
        if counts.len() != rounds + 1 {
            return Err(Error::InvalidDistribution(format!(
                "{} tallies for {rounds} rounds",
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            rounds,
            counts,
            total,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Relative frequencies.
    pub fn frequencies(&self) -> CountDistribution {
        let n = self.total as f64;
        let mass = self.counts.iter().map(|&c| c as f64 / n).collect();
        CountDistribution::new(self.rounds, mass).expect("frequencies of a non-empty tally")
    }
}

/// Descriptive statistics over a group of zero-counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondLevelSummary {
    pub mode_set: BTreeSet<usize>,
    /// Fraction of samples equal to 1 or 4.
    pub mass_at_1_and_4: f64,
    pub mass_elsewhere: f64,
    pub mean: f64,
    /// Unbiased (n − 1) variance; 0 for a single sample.
    pub sample_variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisTestResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

pub fn empirical_distribution(
    zero_counts: &[usize],
    rounds: usize,
) -> Result<EmpiricalDistribution> {
    if rounds == 0 {
        return Err(Error::InvalidRounds);
    }
    if zero_counts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![0u64; rounds + 1];
    for &c in zero_counts {
        *counts
            .get_mut(c)
            .ok_or(Error::CountOutOfRange { count: c, rounds })? += 1;
    }
    EmpiricalDistribution::from_tallies(rounds, counts)
}

/// ½ Σ |d1[c] − d2[c]|
pub fn total_variation(d1: &CountDistribution, d2: &CountDistribution) -> Result<f64> {
    if d1.rounds() != d2.rounds() {
        return Err(Error::RoundsMismatch {
            left: d1.rounds(),
            right: d2.rounds(),
        });
    }
    let l1: f64 = d1
        .mass()
        .iter()
        .zip(d2.mass())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// Pearson goodness of fit of `emp` against `reference`.
///
/// Bins with expected count below [`POOLING_THRESHOLD`] are merged into the
/// nearest retained bin (ties go to the lower count). Degrees of freedom are
/// retained bins minus one.
pub fn chi_square_gof(
    emp: &EmpiricalDistribution,
    reference: &CountDistribution,
) -> Result<HypothesisTestResult> {
    if emp.rounds() != reference.rounds() {
        return Err(Error::RoundsMismatch {
            left: emp.rounds(),
            right: reference.rounds(),
        });
    }
    let n = emp.total() as f64;
    for (c, &obs) in emp.counts().iter().enumerate() {
        if obs > 0 && reference.get(c) <= 0.0 {
            return Err(Error::ZeroReferenceMass { count: c });
        }
    }
    let expected: Vec<f64> = reference.mass().iter().map(|m| m * n).collect();
    let retained: Vec<usize> = (0..expected.len())
        .filter(|&c| expected[c] >= POOLING_THRESHOLD)
        .collect();
    if retained.is_empty() {
        return Err(Error::AllBinsPooled {
            threshold: POOLING_THRESHOLD,
        });
    }
    let mut pooled_obs = vec![0.0; retained.len()];
    let mut pooled_exp = vec![0.0; retained.len()];
    for (c, (&obs, &exp)) in emp.counts().iter().zip(&expected).enumerate() {
        let slot = retained
            .iter()
            .enumerate()
            .min_by_key(|(_, &r)| r.abs_diff(c))
            .map(|(i, _)| i)
            .expect("non-empty");
        pooled_obs[slot] += obs as f64;
        pooled_exp[slot] += exp;
    }
    let statistic: f64 = pooled_obs
        .iter()
        .zip(&pooled_exp)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let degrees_of_freedom = retained.len() - 1;
    Ok(HypothesisTestResult {
        statistic,
        degrees_of_freedom,
        p_value: chi_square_survival(statistic, degrees_of_freedom),
    })
}

/// Σ log d_comp[c] − log d_diag[c] over the observed counts.
pub fn log_likelihood_ratio(
    zero_counts: &[usize],
    d_comp: &CountDistribution,
    d_diag: &CountDistribution,
) -> Result<f64> {
    if d_comp.rounds() != d_diag.rounds() {
        return Err(Error::RoundsMismatch {
            left: d_comp.rounds(),
            right: d_diag.rounds(),
        });
    }
    let mut llr = 0.0;
    for &c in zero_counts {
        if c > d_comp.rounds() {
            return Err(Error::CountOutOfRange {
                count: c,
                rounds: d_comp.rounds(),
            });
        }
        let (pc, pd) = (d_comp.get(c), d_diag.get(c));
        if pc <= 0.0 || pd <= 0.0 {
            return Err(Error::ZeroReferenceMass { count: c });
        }
        llr += pc.ln() - pd.ln();
    }
    Ok(llr)
}

pub fn second_level_summary(emp: &EmpiricalDistribution) -> SecondLevelSummary {
    let n = emp.total() as f64;
    let counts = emp.counts();
    let peak = counts.iter().copied().max().unwrap_or(0);
    let mode_set = (0..counts.len()).filter(|&c| counts[c] == peak).collect();
    let at_1_and_4: u64 = [1, 4].iter().filter_map(|&c| counts.get(c)).sum();
    let mass_at_1_and_4 = at_1_and_4 as f64 / n;
    let mean = counts
        .iter()
        .enumerate()
        .map(|(c, &k)| c as f64 * k as f64)
        .sum::<f64>()
        / n;
    let sample_variance = if emp.total() > 1 {
        counts
            .iter()
            .enumerate()
            .map(|(c, &k)| k as f64 * (c as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    SecondLevelSummary {
        mode_set,
        mass_at_1_and_4,
        mass_elsewhere: (emp.total() - at_1_and_4) as f64 / n,
        mean,
        sample_variance,
    }
}
