//! Random-utility journey choice.
//!
//! For every candidate journey the passenger first screens the seat classes
//! of each leg (`seat utility + noise`, or `-inf` when sold out) and keeps the
//! best one. The journey utility is then
//!
//! ```text
//! U = mean_legs(tsp + seat) - f(|arr - pref_arr|) - r(|dep - pref_dep|)
//!     - g(sum of leg prices) - h(travel time) - tau(transfer time)
//!     - l(transfers) + noise
//! ```
//!
//! with one fresh noise draw per journey, and `-inf` if any leg has no seat.
//! The passenger takes the first journey with the highest utility if that
//! utility is strictly positive and otherwise does not travel.

use rand_distr::{Distribution, Gumbel, Normal};
use serde::{Deserialize, Serialize};

use crate::demand::Passenger;
use crate::journey::Journey;
use crate::rng::SimRng;
use crate::scenario::{NoiseSpec, PassengerType, Penalty, Scenario};
use crate::supply::{CellKey, SupplyState};

/// Passenger type with agent and seat references resolved to indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeParams {
    pub id: String,
    /// Per agent index.
    pub tsp_affinity: Vec<f64>,
    /// Per seat class index; classes without a value have utility 0.
    pub seat_utility: Vec<f64>,
    pub arrival_penalty: Penalty,
    pub departure_penalty: Penalty,
    pub price_sensitivity: Penalty,
    pub travel_time_penalty: Penalty,
    pub transfer_time_penalty: Penalty,
    pub transfer_count_penalty: Penalty,
    pub noise: NoiseSpec,
}

impl TypeParams {
    pub fn resolve(scenario: &Scenario, ptype: &PassengerType) -> Self {
        TypeParams {
            id: ptype.id.clone(),
            tsp_affinity: scenario
                .agents
                .iter()
                .map(|a| ptype.tsp_affinity.get(&a.id).copied().unwrap_or(0.0))
                .collect(),
            seat_utility: scenario
                .seat_classes
                .iter()
                .map(|c| ptype.seat_utility.get(c).copied().unwrap_or(0.0))
                .collect(),
            arrival_penalty: ptype.arrival_penalty.clone(),
            departure_penalty: ptype.departure_penalty.clone(),
            price_sensitivity: ptype.price_sensitivity.clone(),
            travel_time_penalty: ptype.travel_time_penalty.clone(),
            transfer_time_penalty: ptype.transfer_time_penalty.clone(),
            transfer_count_penalty: ptype.transfer_count_penalty.clone(),
            noise: ptype.noise.clone(),
        }
    }

    pub fn all(scenario: &Scenario) -> Vec<TypeParams> {
        scenario
            .passenger_types
            .iter()
            .map(|p| TypeParams::resolve(scenario, p))
            .collect()
    }

    /// One draw of the error term. A zero scale is deterministic.
    pub fn draw_noise(&self, rng: &mut SimRng) -> f64 {
        match self.noise {
            NoiseSpec::Gumbel { scale } if scale > 0.0 => {
                Gumbel::new(0.0, scale).expect("validated scale").sample(rng)
            }
            NoiseSpec::Normal { scale } if scale > 0.0 => {
                Normal::new(0.0, scale).expect("validated scale").sample(rng)
            }
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct UtilityBreakdown {
    pub tsp_term: f64,
    pub seat_term: f64,
    pub arrival: f64,
    pub departure: f64,
    pub price: f64,
    pub travel_time: f64,
    pub transfer_time: f64,
    pub transfer_count: f64,
    pub noise: f64,
    pub total: f64,
}

impl UtilityBreakdown {
    pub fn unavailable() -> Self {
        UtilityBreakdown {
            total: f64::NEG_INFINITY,
            ..Default::default()
        }
    }

    /// Total without the error term.
    pub fn systematic(&self) -> f64 {
        self.tsp_term + self.seat_term
            - self.arrival
            - self.departure
            - self.price
            - self.travel_time
            - self.transfer_time
            - self.transfer_count
    }
}

/// Screening utility of one seat cell: `seat utility + noise`, or `-inf` when
/// the cell is sold out.
pub fn seat_screening_utility(
    params: &TypeParams,
    supply: &SupplyState,
    instance: usize,
    cell: &CellKey,
    rng: &mut SimRng,
) -> f64 {
    let inst = &supply.instances[instance];
    match inst.cell(cell) {
        Some(idx) if inst.cells[idx].available() => params.seat_utility[cell.seat] + params.draw_noise(rng),
        _ => f64::NEG_INFINITY,
    }
}

/// Best seat class per leg, or `None` if some leg is sold out in every class.
pub fn best_seats(params: &TypeParams, supply: &SupplyState, journey: &Journey, rng: &mut SimRng) -> Option<Vec<CellKey>> {
    journey
        .legs
        .iter()
        .map(|leg| {
            let inst = &supply.instances[leg.instance];
            let mut best: Option<(f64, CellKey)> = None;
            for cell in inst
                .cells
                .iter()
                .filter(|c| c.key.origin == leg.board && c.key.destination == leg.alight)
            {
                let u = seat_screening_utility(params, supply, leg.instance, &cell.key, rng);
                if u > best.map_or(f64::NEG_INFINITY, |(b, _)| b) {
                    best = Some((u, cell.key));
                }
            }
            best.map(|(_, key)| key)
        })
        .collect()
}

/// Utility of a journey with one chosen seat per leg.
pub fn journey_utility(
    passenger: &Passenger,
    params: &TypeParams,
    journey: &Journey,
    seats: &[CellKey],
    supply: &SupplyState,
    rng: &mut SimRng,
) -> UtilityBreakdown {
    assert_eq!(seats.len(), journey.legs.len(), "one seat per leg");
    let mut total_price = 0.0;
    for (leg, seat) in journey.legs.iter().zip(seats) {
        let inst = &supply.instances[leg.instance];
        match inst.cell(seat) {
            Some(idx) if inst.cells[idx].available() => total_price += inst.cells[idx].price.to_f64(),
            _ => return UtilityBreakdown::unavailable(),
        }
    }
    let legs = journey.legs.len() as f64;
    let tsp_term = journey.legs.iter().map(|l| params.tsp_affinity[l.operator]).sum::<f64>() / legs;
    let seat_term = seats.iter().map(|s| params.seat_utility[s.seat]).sum::<f64>() / legs;
    let arrival = params
        .arrival_penalty
        .eval((f64::from(journey.arrival().minutes()) - passenger.preferred_arrival).abs());
    let departure = params
        .departure_penalty
        .eval((f64::from(journey.departure().minutes()) - passenger.preferred_departure).abs());
    let mut breakdown = UtilityBreakdown {
        tsp_term,
        seat_term,
        arrival,
        departure,
        price: params.price_sensitivity.eval(total_price),
        travel_time: params.travel_time_penalty.eval(f64::from(journey.total_travel_time())),
        transfer_time: params.transfer_time_penalty.eval(f64::from(journey.total_transfer_time())),
        transfer_count: params.transfer_count_penalty.eval(journey.n_transfers() as f64),
        noise: params.draw_noise(rng),
        total: 0.0,
    };
    breakdown.total = breakdown.systematic() + breakdown.noise;
    breakdown
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Choice {
    Travel {
        journey: usize,
        seats: Vec<CellKey>,
        utility: UtilityBreakdown,
    },
    NoTravel {
        /// Highest utility among candidates (`-inf` if none was available).
        best_utility: f64,
    },
}

impl Choice {
    pub fn travels(&self) -> bool {
        matches!(self, Choice::Travel { .. })
    }
}

/// Picks the utility-maximising journey, or no travel if its utility is not
/// strictly positive. Inventory is not touched.
pub fn choose_journey(
    passenger: &Passenger,
    params: &TypeParams,
    candidates: &[Journey],
    supply: &SupplyState,
    rng: &mut SimRng,
) -> Choice {
    let mut best: Option<(usize, Vec<CellKey>, UtilityBreakdown)> = None;
    for (idx, journey) in candidates.iter().enumerate() {
        let Some(seats) = best_seats(params, supply, journey, rng) else {
            continue;
        };
        let utility = journey_utility(passenger, params, journey, &seats, supply, rng);
        if utility.total > best.as_ref().map_or(f64::NEG_INFINITY, |(_, _, u)| u.total) {
            best = Some((idx, seats, utility));
        }
    }
    match best {
        Some((journey, seats, utility)) if utility.total > 0.0 => Choice::Travel { journey, seats, utility },
        Some((_, _, utility)) => Choice::NoTravel { best_utility: utility.total },
        None => Choice::NoTravel {
            best_utility: f64::NEG_INFINITY,
        },
    }
}
