//! Journey enumeration and validity.
//!
//! A leg rides one service instance from a boarding to an alighting stop for
//! which the service sells at least one cell. A journey chains legs from the
//! market origin to its destination; consecutive legs must connect at the same
//! station and leave at least `min_transfer` minutes between arrival and the
//! next departure. Journeys never revisit a station or reuse a service.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scenario::ClockTime;
use crate::supply::SupplyState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Leg {
    pub instance: usize,
    pub service: usize,
    pub operator: usize,
    pub board: usize,
    pub alight: usize,
    pub departure: ClockTime,
    pub arrival: ClockTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Journey {
    pub origin: usize,
    pub destination: usize,
    pub travel_date: u32,
    pub legs: Vec<Leg>,
}

/// Why a leg sequence is not a valid journey, reported for the first failing
/// check in this order: shape, origin, connectivity, destination, repeats,
/// transfer gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JourneyViolation {
    Empty,
    LegNotForward { leg: usize },
    WrongOrigin { expected: usize, found: usize },
    Disconnected { leg: usize },
    WrongDestination { expected: usize, found: usize },
    RepeatedStation { station: usize },
    RepeatedService { service: usize },
    TransferTooShort { leg: usize, gap_minutes: i64, min_minutes: i64 },
}

impl fmt::Display for JourneyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JourneyViolation::Empty => write!(f, "journey has no legs"),
            JourneyViolation::LegNotForward { leg } => write!(f, "leg {leg} does not run forward in time"),
            JourneyViolation::WrongOrigin { expected, found } => {
                write!(f, "starts at station #{found}, market origin is #{expected}")
            }
            JourneyViolation::Disconnected { leg } => write!(f, "leg {leg} does not start where leg {} ends", leg - 1),
            JourneyViolation::WrongDestination { expected, found } => {
                write!(f, "ends at station #{found}, market destination is #{expected}")
            }
            JourneyViolation::RepeatedStation { station } => write!(f, "station #{station} visited twice"),
            JourneyViolation::RepeatedService { service } => write!(f, "service #{service} used twice"),
            JourneyViolation::TransferTooShort { leg, gap_minutes, min_minutes } => write!(
                f,
                "transfer before leg {leg} is {gap_minutes} min, minimum is {min_minutes} min"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JourneyError {
    #[error("unknown market ({0}, {1})")]
    UnknownMarket(usize, usize),
}

/// Checks a leg sequence against the journey rules for a market.
pub fn check_legs(legs: &[Leg], origin: usize, destination: usize, min_transfer: i64) -> Result<(), JourneyViolation> {
    let (first, last) = match (legs.first(), legs.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(JourneyViolation::Empty),
    };
    if let Some(leg) = legs.iter().position(|l| l.arrival < l.departure || l.board == l.alight) {
        return Err(JourneyViolation::LegNotForward { leg });
    }
    if first.board != origin {
        return Err(JourneyViolation::WrongOrigin { expected: origin, found: first.board });
    }
    if let Some(i) = legs.windows(2).position(|w| w[0].alight != w[1].board) {
        return Err(JourneyViolation::Disconnected { leg: i + 1 });
    }
    if last.alight != destination {
        return Err(JourneyViolation::WrongDestination { expected: destination, found: last.alight });
    }
    let mut stations = BTreeSet::from([origin]);
    for leg in legs {
        if !stations.insert(leg.alight) {
            return Err(JourneyViolation::RepeatedStation { station: leg.alight });
        }
    }
    let mut services = BTreeSet::new();
    for leg in legs {
        if !services.insert(leg.service) {
            return Err(JourneyViolation::RepeatedService { service: leg.service });
        }
    }
    for (i, w) in legs.windows(2).enumerate() {
        let gap = i64::from(w[1].departure.minutes()) - i64::from(w[0].arrival.minutes());
        if gap < min_transfer.max(0) {
            return Err(JourneyViolation::TransferTooShort {
                leg: i + 1,
                gap_minutes: gap,
                min_minutes: min_transfer,
            });
        }
    }
    Ok(())
}

impl Journey {
    pub fn n_transfers(&self) -> usize {
        self.legs.len().saturating_sub(1)
    }

    /// Sum of waiting times between consecutive legs, in minutes.
    pub fn total_transfer_time(&self) -> u32 {
        self.legs
            .windows(2)
            .map(|w| w[1].departure.minutes() - w[0].arrival.minutes())
            .sum()
    }

    /// Last arrival minus first departure, in minutes.
    pub fn total_travel_time(&self) -> u32 {
        match (self.legs.first(), self.legs.last()) {
            (Some(f), Some(l)) => l.arrival.minutes() - f.departure.minutes(),
            _ => 0,
        }
    }

    pub fn departure(&self) -> ClockTime {
        self.legs[0].departure
    }

    pub fn arrival(&self) -> ClockTime {
        self.legs[self.legs.len() - 1].arrival
    }
}

/// Candidate legs on a travel date: one per distinct (instance, boarding,
/// alighting) triple the instance sells.
pub fn candidate_legs(supply: &SupplyState, travel_date: u32) -> Vec<Leg> {
    let mut legs = Vec::new();
    for (idx, inst) in supply.instances.iter().enumerate() {
        if inst.travel_date != travel_date {
            continue;
        }
        let info = &supply.services[inst.service];
        let mut seen = BTreeSet::new();
        for cell in &inst.cells {
            if !seen.insert((cell.key.origin, cell.key.destination)) {
                continue;
            }
            legs.push(Leg {
                instance: idx,
                service: inst.service,
                operator: inst.operator,
                board: cell.key.origin,
                alight: cell.key.destination,
                departure: info.time_at(cell.key.origin).expect("cell on line"),
                arrival: info.time_at(cell.key.destination).expect("cell on line"),
            });
        }
    }
    legs
}

/// Canonical journey order: first departure, leg count, service ids, then
/// stations.
pub fn sort_journeys(supply: &SupplyState, journeys: &mut [Journey]) {
    journeys.sort_by(|a, b| {
        let key = |j: &Journey| {
            (
                j.departure(),
                j.legs.len(),
                j.legs.iter().map(|l| supply.services[l.service].id.clone()).collect::<Vec<_>>(),
                j.legs.iter().map(|l| (l.board, l.alight)).collect::<Vec<_>>(),
            )
        };
        key(a).cmp(&key(b))
    });
}

/// All valid journeys with at most `max_transfers` transfers, in canonical
/// order.
pub fn enumerate_journeys(
    supply: &SupplyState,
    origin: usize,
    destination: usize,
    travel_date: u32,
    min_transfer: i64,
    max_transfers: u32,
) -> Result<Vec<Journey>, JourneyError> {
    let stations = supply.station_count;
    if origin == destination || origin >= stations || destination >= stations {
        return Err(JourneyError::UnknownMarket(origin, destination));
    }
    let legs = candidate_legs(supply, travel_date);
    let max_legs = max_transfers as usize + 1;
    let min_gap = min_transfer.max(0);
    let mut found = Vec::new();
    let mut path: Vec<Leg> = Vec::new();

    fn extend(
        legs: &[Leg],
        path: &mut Vec<Leg>,
        destination: usize,
        max_legs: usize,
        min_gap: i64,
        found: &mut Vec<Vec<Leg>>,
    ) {
        let last = *path.last().expect("non-empty path");
        if last.alight == destination {
            found.push(path.clone());
            return;
        }
        if path.len() == max_legs {
            return;
        }
        for leg in legs {
            if leg.board != last.alight {
                continue;
            }
            let gap = i64::from(leg.departure.minutes()) - i64::from(last.arrival.minutes());
            if gap < min_gap {
                continue;
            }
            if path.iter().any(|l| l.service == leg.service || l.board == leg.alight || l.alight == leg.alight) {
                continue;
            }
            path.push(*leg);
            extend(legs, path, destination, max_legs, min_gap, found);
            path.pop();
        }
    }

    let mut sequences = Vec::new();
    for leg in legs.iter().filter(|l| l.board == origin) {
        path.push(*leg);
        extend(&legs, &mut path, destination, max_legs, min_gap, &mut sequences);
        path.pop();
    }
    for seq in sequences {
        debug_assert!(check_legs(&seq, origin, destination, min_transfer).is_ok());
        found.push(Journey {
            origin,
            destination,
            travel_date,
            legs: seq,
        });
    }
    sort_journeys(supply, &mut found);
    found.dedup();
    Ok(found)
}
