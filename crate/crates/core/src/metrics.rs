//! Market-level metrics: profit equality, attention entropy, reward
//! normalisation and per-episode reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::EpisodeLog;
use crate::money::Money;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("equality needs at least two agents and a positive total profit")]
    DegenerateInput,
    #[error("malformed attention weights: {0}")]
    MalformedWeights(String),
    #[error("episode has not terminated")]
    IncompleteEpisode,
}

/// `1 - sum_ij |P_i - P_j| / (2 N sum_i P_i)`. Exact O(N^2) pair sum.
pub fn equality(profits: &[f64]) -> Result<f64, MetricsError> {
    let total: f64 = profits.iter().sum();
    if profits.len() < 2 || total <= 0.0 || !total.is_finite() {
        return Err(MetricsError::DegenerateInput);
    }
    let mut pairs = 0.0;
    for a in profits {
        for b in profits {
            pairs += (a - b).abs();
        }
    }
    Ok(1.0 - pairs / (2.0 * profits.len() as f64 * total))
}

pub const ENTROPY_EPS: f64 = 1e-8;

/// Mean attention entropy over heads and query positions. `weights[k][t]` is
/// one head's distribution over the `N` keys at query `t`; each row must sum
/// to 1 within 1e-6.
pub fn attention_entropy(weights: &[Vec<Vec<f64>>]) -> Result<f64, MetricsError> {
    let malformed = |m: String| Err(MetricsError::MalformedWeights(m));
    if weights.is_empty() || weights[0].is_empty() || weights[0][0].is_empty() {
        return malformed("empty tensor".into());
    }
    let (t_len, n_len) = (weights[0].len(), weights[0][0].len());
    let mut total = 0.0;
    for (k, head) in weights.iter().enumerate() {
        if head.len() != t_len {
            return malformed(format!("head {k} has {} rows, expected {t_len}", head.len()));
        }
        for (t, row) in head.iter().enumerate() {
            if row.len() != n_len {
                return malformed(format!("row [{k}][{t}] has {} entries, expected {n_len}", row.len()));
            }
            if row.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return malformed(format!("row [{k}][{t}] has a negative or non-finite weight"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return malformed(format!("row [{k}][{t}] sums to {sum}"));
            }
            total -= row.iter().map(|w| w * (w + ENTROPY_EPS).ln()).sum::<f64>();
        }
    }
    Ok(total / (weights.len() * t_len) as f64)
}

/// Entropy per agent for weights indexed `[agent][head][query][key]`.
pub fn attention_entropy_per_agent(weights: &[Vec<Vec<Vec<f64>>>]) -> Result<Vec<f64>, MetricsError> {
    weights.iter().map(|w| attention_entropy(w)).collect()
}

/// Running reward standardisation with Welford updates. The current reward is
/// folded into the statistics before it is normalised.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardNormalizer {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RewardNormalizer {
    pub const EPS: f64 = 1e-8;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn normalize(&mut self, reward: f64) -> f64 {
        self.count += 1;
        let delta = reward - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (reward - self.mean);
        (reward - self.mean) / (self.variance() + Self::EPS).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance of the rewards seen so far.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub seed: u64,
    pub profit: BTreeMap<String, Money>,
    pub total_profit: Money,
    /// `None` when all agents earned nothing.
    pub equality: Option<f64>,
    pub passengers: u32,
    pub travelled: u32,
    pub percent_travelling: f64,
    pub percent_travelling_by_type: BTreeMap<String, f64>,
    /// Mean chosen-journey utility over travelling passengers.
    pub mean_traveller_utility: Option<f64>,
    /// Mean utility over all passengers, counting non-travel as 0.
    pub mean_passenger_utility: Option<f64>,
}

pub fn episode_report(log: &EpisodeLog) -> Result<EpisodeReport, MetricsError> {
    if !log.terminal {
        return Err(MetricsError::IncompleteEpisode);
    }
    let mut profit = vec![Money::ZERO; log.agents.len()];
    for day in &log.days {
        for (p, r) in profit.iter_mut().zip(&day.rewards) {
            *p += *r;
        }
    }
    let total_profit: Money = profit.iter().copied().sum();
    let equality = equality(&profit.iter().map(|p| p.to_f64()).collect::<Vec<_>>()).ok();

    let mut by_type = vec![(0u32, 0u32); log.passenger_types.len()];
    let (mut n, mut travelled, mut utility_sum) = (0u32, 0u32, 0.0);
    for rec in log.days.iter().flat_map(|d| &d.passengers) {
        n += 1;
        by_type[rec.passenger.passenger_type].0 += 1;
        if rec.travelled {
            travelled += 1;
            by_type[rec.passenger.passenger_type].1 += 1;
            utility_sum += rec.utility;
        }
    }
    let percent = |t: u32, n: u32| if n == 0 { 0.0 } else { 100.0 * f64::from(t) / f64::from(n) };
    Ok(EpisodeReport {
        seed: log.seed,
        profit: log.agents.iter().cloned().zip(profit).collect(),
        total_profit,
        equality,
        passengers: n,
        travelled,
        percent_travelling: percent(travelled, n),
        percent_travelling_by_type: log
            .passenger_types
            .iter()
            .cloned()
            .zip(by_type.iter().map(|&(n, t)| percent(t, n)))
            .collect(),
        mean_traveller_utility: (travelled > 0).then(|| utility_sum / f64::from(travelled)),
        mean_passenger_utility: (n > 0).then(|| utility_sum / f64::from(n)),
    })
}
