//! Daily passenger generation.
//!
//! For every market the number of arrivals on day `t` is drawn from the
//! market's volume distribution and each arrival gets a passenger type from
//! the market's mixture. Anticipation curves shape *when* types book:
//!
//! * single-terminal-date: everyone travels on day `T + 1`. Day `t` is
//!   `T + 1 - t` days before travel; a Poisson market's daily mean is scaled
//!   by `sum_k p_k * T * a_k(d)` and types are drawn proportionally to
//!   `p_k * a_k(d)`, which keeps each type's expected episode total at
//!   `mean * T * p_k`. With uniform curves this reduces to the plain model.
//! * per-passenger-date: the type is drawn from the mixture and the passenger
//!   travels `d ~ a_k` days after booking.

use std::ops::RangeInclusive;

use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::rng::SimRng;
use crate::scenario::{PassengerType, Scenario, TravelDateMode, VolumeDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passenger {
    /// `(day << 32) | arrival index within the day`.
    pub id: u64,
    pub passenger_type: usize,
    pub market: usize,
    pub purchase_day: u32,
    pub travel_date: u32,
    /// Minutes after midnight.
    pub preferred_departure: f64,
    pub preferred_arrival: f64,
}

/// `(days before travel, weight)` pairs a passenger type can book at.
pub fn anticipation_support(scenario: &Scenario, ptype: &PassengerType) -> Vec<(u32, f64)> {
    let horizon = scenario.episode.horizon_days;
    let weights = &ptype.anticipation_weights;
    match scenario.episode.travel_date_mode {
        TravelDateMode::SingleTerminalDate => (1..=horizon)
            .map(|d| {
                let w = if weights.is_empty() {
                    1.0
                } else {
                    weights.get(d as usize).copied().unwrap_or(0.0)
                };
                (d, w)
            })
            .collect(),
        TravelDateMode::PerPassengerDate => {
            if weights.is_empty() {
                (0..horizon).map(|d| (d, 1.0)).collect()
            } else {
                weights.iter().enumerate().map(|(d, w)| (d as u32, *w)).collect()
            }
        }
    }
}

/// Travel dates for which service instances must exist.
pub fn travel_dates(scenario: &Scenario) -> RangeInclusive<u32> {
    let horizon = scenario.episode.horizon_days;
    match scenario.episode.travel_date_mode {
        TravelDateMode::SingleTerminalDate => horizon + 1..=horizon + 1,
        TravelDateMode::PerPassengerDate => {
            let max_ahead = scenario
                .passenger_types
                .iter()
                .flat_map(|p| anticipation_support(scenario, p))
                .filter(|(_, w)| *w > 0.0)
                .map(|(d, _)| d)
                .max()
                .unwrap_or(0);
            1..=horizon + max_ahead
        }
    }
}

#[derive(Debug, Clone)]
struct TypeCurve {
    /// Normalised probability per days-before value.
    pmf: Vec<(u32, f64)>,
}

impl TypeCurve {
    fn prob(&self, days_before: u32) -> f64 {
        self.pmf
            .iter()
            .find(|(d, _)| *d == days_before)
            .map_or(0.0, |(_, p)| *p)
    }
}

#[derive(Debug, Clone)]
struct MarketModel {
    volume: VolumeDistribution,
    /// Probability per passenger type index.
    mixture: Vec<f64>,
}

/// Precomputed demand tables of a scenario.
#[derive(Debug, Clone)]
pub struct DemandModel {
    horizon: u32,
    mode: TravelDateMode,
    markets: Vec<MarketModel>,
    curves: Vec<TypeCurve>,
    windows: Vec<[(f64, f64); 2]>,
}

impl DemandModel {
    pub fn new(scenario: &Scenario) -> Self {
        let curves = scenario
            .passenger_types
            .iter()
            .map(|p| {
                let support = anticipation_support(scenario, p);
                let total: f64 = support.iter().map(|(_, w)| w).sum();
                TypeCurve {
                    pmf: support.into_iter().map(|(d, w)| (d, w / total)).collect(),
                }
            })
            .collect();
        let markets = scenario
            .markets
            .iter()
            .map(|m| MarketModel {
                volume: m.volume.clone(),
                mixture: scenario
                    .passenger_types
                    .iter()
                    .map(|p| m.mixture.get(&p.id).copied().unwrap_or(0.0))
                    .collect(),
            })
            .collect();
        let windows = scenario
            .passenger_types
            .iter()
            .map(|p| {
                [
                    (f64::from(p.preferred_departure.start.minutes()), f64::from(p.preferred_departure.end.minutes())),
                    (f64::from(p.preferred_arrival.start.minutes()), f64::from(p.preferred_arrival.end.minutes())),
                ]
            })
            .collect();
        DemandModel {
            horizon: scenario.episode.horizon_days,
            mode: scenario.episode.travel_date_mode,
            markets,
            curves,
            windows,
        }
    }

    /// Type weights and volume intensity for a market on `day`.
    fn day_profile(&self, market: &MarketModel, day: u32) -> (Vec<f64>, f64) {
        match self.mode {
            TravelDateMode::PerPassengerDate => (market.mixture.clone(), 1.0),
            TravelDateMode::SingleTerminalDate => {
                let days_before = self.horizon + 1 - day;
                let horizon = f64::from(self.horizon);
                let weights: Vec<f64> = market
                    .mixture
                    .iter()
                    .zip(&self.curves)
                    .map(|(p, curve)| p * curve.prob(days_before))
                    .collect();
                let intensity = weights.iter().sum::<f64>() * horizon;
                if intensity > 0.0 {
                    (weights, intensity)
                } else {
                    (market.mixture.clone(), 0.0)
                }
            }
        }
    }

    /// Passengers booking on `day` (1-based), in market order then arrival
    /// order.
    pub fn sample_day(&self, day: u32, rng: &mut SimRng) -> Vec<Passenger> {
        assert!(day >= 1 && day <= self.horizon, "day {day} outside 1..={}", self.horizon);
        let mut passengers = Vec::new();
        for (market_idx, market) in self.markets.iter().enumerate() {
            let (weights, intensity) = self.day_profile(market, day);
            let count = match market.volume {
                VolumeDistribution::Constant { count } => count as usize,
                VolumeDistribution::Poisson { mean } => {
                    let lambda = mean * intensity;
                    if lambda > 0.0 {
                        Poisson::new(lambda).expect("positive finite mean").sample(rng) as usize
                    } else {
                        0
                    }
                }
            };
            if count == 0 {
                continue;
            }
            let types = WeightedIndex::new(&weights).expect("mixture has positive mass");
            for _ in 0..count {
                let passenger_type = types.sample(rng);
                let travel_date = match self.mode {
                    TravelDateMode::SingleTerminalDate => self.horizon + 1,
                    TravelDateMode::PerPassengerDate => {
                        let pmf = &self.curves[passenger_type].pmf;
                        let idx = WeightedIndex::new(pmf.iter().map(|(_, p)| *p))
                            .expect("curve has positive mass")
                            .sample(rng);
                        day + pmf[idx].0
                    }
                };
                let [dep, arr] = self.windows[passenger_type];
                let preferred_departure = uniform(rng, dep);
                let preferred_arrival = uniform(rng, arr);
                passengers.push(Passenger {
                    id: (u64::from(day) << 32) | passengers.len() as u64,
                    passenger_type,
                    market: market_idx,
                    purchase_day: day,
                    travel_date,
                    preferred_departure,
                    preferred_arrival,
                });
            }
        }
        passengers
    }
}

fn uniform(rng: &mut SimRng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Convenience wrapper over [`DemandModel::sample_day`].
pub fn sample_daily_demand(scenario: &Scenario, day: u32, rng: &mut SimRng) -> Vec<Passenger> {
    DemandModel::new(scenario).sample_day(day, rng)
}
