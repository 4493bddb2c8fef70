//! Market state: service instances, seat inventory and current prices.
//!
//! A *cell* is the `(origin, destination, seat class)` unit a service sells.
//! Every cell has its own price, capacity and sold counter; overlapping cells
//! of the same train do not share seats.

use serde::{Deserialize, Serialize};

use crate::money::Money;
use crate::scenario::{ClockTime, Scenario};

/// Price multipliers of the eleven discrete action levels.
pub const ALPHA_LEVELS: [f64; 11] = [-1.0, -0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// Level that leaves prices unchanged.
pub const NO_CHANGE_LEVEL: u8 = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SupplyError {
    #[error("agent `{agent}` does not operate service `{service}`")]
    NotOwner { agent: String, service: String },
    #[error("no tickets left for {cell} on service `{service}`")]
    SoldOut { service: String, cell: String },
    #[error("unknown cell {0}")]
    UnknownCell(String),
    #[error("discrete action level {0} outside 0..=10")]
    OutOfRange(i64),
    #[error("price change {0} outside [-1, 1]")]
    InvalidAlpha(f64),
    #[error("price scale {0} must be positive")]
    InvalidScale(f64),
}

/// Maps a discrete level to its price multiplier.
pub fn discretize_action(level: i64) -> Result<f64, SupplyError> {
    usize::try_from(level)
        .ok()
        .and_then(|l| ALPHA_LEVELS.get(l).copied())
        .ok_or(SupplyError::OutOfRange(level))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub origin: usize,
    pub destination: usize,
    pub seat: usize,
}

/// Static, scenario-derived description of a service.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceInfo {
    pub id: String,
    pub operator: usize,
    pub corridor: usize,
    pub line: usize,
    pub rolling_stock: usize,
    pub time_slot: u32,
    /// Station index per stop.
    pub stops: Vec<usize>,
    pub times: Vec<ClockTime>,
    pub cells: Vec<CellKey>,
}

impl ServiceInfo {
    pub fn stop_position(&self, station: usize) -> Option<usize> {
        self.stops.iter().position(|&s| s == station)
    }

    pub fn time_at(&self, station: usize) -> Option<ClockTime> {
        self.stop_position(station).map(|i| self.times[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub key: CellKey,
    pub price: Money,
    pub capacity: u32,
    pub sold: u32,
}

impl Cell {
    pub fn available(&self) -> bool {
        self.sold < self.capacity
    }
}

/// One run of a service on a travel date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceInstance {
    pub service: usize,
    pub travel_date: u32,
    pub operator: usize,
    pub cells: Vec<Cell>,
    pub revenue: Money,
}

impl ServiceInstance {
    pub fn cell(&self, key: &CellKey) -> Option<usize> {
        self.cells.iter().position(|c| c.key == *key)
    }

    pub fn tickets_sold(&self) -> u32 {
        self.cells.iter().map(|c| c.sold).sum()
    }
}

/// One price change for a cell of a service (on every travel date).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceAdjustment {
    pub service: usize,
    pub cell: CellKey,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PriceAction {
    pub adjustments: Vec<PriceAdjustment>,
}

/// Builds the static service table of a scenario.
pub fn service_table(scenario: &Scenario) -> Vec<ServiceInfo> {
    scenario
        .services
        .iter()
        .map(|s| {
            let line_idx = scenario.lines.iter().position(|l| l.id == s.line).expect("validated line");
            let line = &scenario.lines[line_idx];
            ServiceInfo {
                id: s.id.clone(),
                operator: scenario.agent_index(&s.operator).expect("validated operator"),
                corridor: scenario
                    .corridors
                    .iter()
                    .position(|c| c.id == line.corridor)
                    .expect("validated corridor"),
                line: line_idx,
                rolling_stock: scenario
                    .rolling_stock
                    .iter()
                    .position(|r| r.id == s.rolling_stock)
                    .expect("validated rolling stock"),
                time_slot: s.stop_times[0].minutes() / scenario.time_slot_minutes,
                stops: line
                    .stops
                    .iter()
                    .map(|st| scenario.station_index(st).expect("validated station"))
                    .collect(),
                times: s.stop_times.clone(),
                cells: s
                    .prices
                    .iter()
                    .map(|p| CellKey {
                        origin: scenario.station_index(&p.origin).expect("validated"),
                        destination: scenario.station_index(&p.destination).expect("validated"),
                        seat: scenario.seat_index(&p.seat).expect("validated"),
                    })
                    .collect(),
            }
        })
        .collect()
}

/// All service instances of an environment, in (travel date, service) order.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyState {
    pub services: Vec<ServiceInfo>,
    pub instances: Vec<ServiceInstance>,
    pub station_count: usize,
    agent_ids: Vec<String>,
}

impl SupplyState {
    /// Instances at initial prices with nothing sold.
    pub fn new(scenario: &Scenario, travel_dates: impl IntoIterator<Item = u32>) -> Self {
        let services = service_table(scenario);
        let mut instances = Vec::new();
        for date in travel_dates {
            for (idx, (info, template)) in services.iter().zip(&scenario.services).enumerate() {
                let stock = &scenario.rolling_stock[info.rolling_stock];
                let cells = template
                    .prices
                    .iter()
                    .zip(&info.cells)
                    .map(|(p, key)| Cell {
                        key: *key,
                        price: p.price,
                        capacity: stock.seats[&p.seat],
                        sold: 0,
                    })
                    .collect();
                instances.push(ServiceInstance {
                    service: idx,
                    travel_date: date,
                    operator: info.operator,
                    cells,
                    revenue: Money::ZERO,
                });
            }
        }
        SupplyState {
            services,
            instances,
            station_count: scenario.stations.len(),
            agent_ids: scenario.agents.iter().map(|a| a.id.clone()).collect(),
        }
    }

    pub fn instance_index(&self, service: usize, travel_date: u32) -> Option<usize> {
        self.instances
            .iter()
            .position(|i| i.service == service && i.travel_date == travel_date)
    }

    /// Applies `p * (1 + alpha * beta / 100)` to each touched cell, on every
    /// travel date. Nothing is changed if any adjustment is rejected.
    pub fn apply_price_action(&mut self, agent: usize, action: &PriceAction, beta: f64) -> Result<(), SupplyError> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(SupplyError::InvalidScale(beta));
        }
        for adj in &action.adjustments {
            let info = self
                .services
                .get(adj.service)
                .ok_or_else(|| SupplyError::UnknownCell(format!("service #{}", adj.service)))?;
            if info.operator != agent {
                return Err(SupplyError::NotOwner {
                    agent: self.agent_ids.get(agent).cloned().unwrap_or_else(|| format!("#{agent}")),
                    service: info.id.clone(),
                });
            }
            if !info.cells.contains(&adj.cell) {
                return Err(SupplyError::UnknownCell(format!("{:?} on `{}`", adj.cell, info.id)));
            }
            if !(adj.alpha.is_finite() && adj.alpha.abs() <= 1.0) {
                return Err(SupplyError::InvalidAlpha(adj.alpha));
            }
        }
        for adj in &action.adjustments {
            for inst in self.instances.iter_mut().filter(|i| i.service == adj.service) {
                let idx = inst.cell(&adj.cell).expect("checked above");
                let cell = &mut inst.cells[idx];
                cell.price = cell.price.scaled_by_percent(adj.alpha, beta);
            }
        }
        Ok(())
    }

    pub fn tickets_available(&self, instance: usize, key: &CellKey) -> Result<bool, SupplyError> {
        let inst = self
            .instances
            .get(instance)
            .ok_or_else(|| SupplyError::UnknownCell(format!("instance #{instance}")))?;
        let idx = inst
            .cell(key)
            .ok_or_else(|| SupplyError::UnknownCell(format!("{key:?} on instance #{instance}")))?;
        Ok(inst.cells[idx].available())
    }

    /// Sells one seat at the current price and books the revenue.
    pub fn sell_ticket(&mut self, instance: usize, key: &CellKey) -> Result<Money, SupplyError> {
        let service_id = self
            .instances
            .get(instance)
            .map(|i| self.services[i.service].id.clone())
            .ok_or_else(|| SupplyError::UnknownCell(format!("instance #{instance}")))?;
        let inst = &mut self.instances[instance];
        let idx = inst
            .cell(key)
            .ok_or_else(|| SupplyError::UnknownCell(format!("{key:?} on `{service_id}`")))?;
        let cell = &mut inst.cells[idx];
        if !cell.available() {
            return Err(SupplyError::SoldOut {
                service: service_id,
                cell: format!("{key:?}"),
            });
        }
        cell.sold += 1;
        let price = cell.price;
        inst.revenue += price;
        Ok(price)
    }

    /// Cumulative revenue of every service an agent operates.
    pub fn agent_revenue(&self, agent: usize) -> Money {
        self.instances
            .iter()
            .filter(|i| i.operator == agent)
            .map(|i| i.revenue)
            .sum()
    }

    pub fn total_revenue(&self) -> Money {
        self.instances.iter().map(|i| i.revenue).sum()
    }

    /// Priced cells of an agent in action order: services in the order the
    /// agent lists them, cells in document order.
    pub fn agent_cells(&self, scenario: &Scenario, agent: usize) -> Vec<(usize, CellKey)> {
        scenario.agents[agent]
            .services
            .iter()
            .flat_map(|sid| {
                let idx = self.services.iter().position(|s| s.id == *sid).expect("validated");
                self.services[idx].cells.iter().map(move |c| (idx, *c))
            })
            .collect()
    }

    /// Current price of a service cell (identical across travel dates).
    pub fn price(&self, service: usize, key: &CellKey) -> Option<Money> {
        self.instances
            .iter()
            .find(|i| i.service == service)
            .and_then(|i| i.cell(key).map(|c| i.cells[c].price))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::preset;
    use proptest::prelude::*;

    fn state() -> (Scenario, SupplyState) {
        let s = preset("business").unwrap();
        let supply = SupplyState::new(&s, [6]);
        (s, supply)
    }

    fn single(service: usize, cell: CellKey, alpha: f64) -> PriceAction {
        PriceAction {
            adjustments: vec![PriceAdjustment { service, cell, alpha }],
        }
    }

    #[test]
    fn discrete_levels() {
        assert_eq!(discretize_action(5).unwrap(), 0.0);
        assert_eq!(discretize_action(0).unwrap(), -1.0);
        assert_eq!(discretize_action(10).unwrap(), 1.0);
        assert_eq!(discretize_action(3).unwrap(), -0.4);
        assert_eq!(discretize_action(11), Err(SupplyError::OutOfRange(11)));
        assert_eq!(discretize_action(-1), Err(SupplyError::OutOfRange(-1)));
    }

    #[test]
    fn price_update_examples() {
        let (_, mut supply) = state();
        let key = supply.services[0].cells[0];
        supply.instances[0].cells[0].price = Money::from_cents(10_000);
        supply.apply_price_action(0, &single(0, key, 1.0), 25.0).unwrap();
        assert_eq!(supply.price(0, &key), Some(Money::from_cents(12_500)));
        supply.apply_price_action(0, &single(0, key, 0.0), 25.0).unwrap();
        assert_eq!(supply.price(0, &key), Some(Money::from_cents(12_500)));

        supply.instances[0].cells[0].price = Money::ZERO;
        supply.apply_price_action(0, &single(0, key, -1.0), 25.0).unwrap();
        assert_eq!(supply.price(0, &key), Some(Money::ZERO));
    }

    #[test]
    fn foreign_service_is_rejected_untouched() {
        let (_, mut supply) = state();
        let before = supply.clone();
        let own = supply.services[0].cells[0];
        let foreign = supply.services[1].cells[0];
        let action = PriceAction {
            adjustments: vec![
                PriceAdjustment { service: 0, cell: own, alpha: 1.0 },
                PriceAdjustment { service: 1, cell: foreign, alpha: 1.0 },
            ],
        };
        assert!(matches!(
            supply.apply_price_action(0, &action, 25.0),
            Err(SupplyError::NotOwner { .. })
        ));
        assert_eq!(supply, before);
        assert!(matches!(
            supply.apply_price_action(0, &single(0, own, 1.5), 25.0),
            Err(SupplyError::InvalidAlpha(_))
        ));
        assert!(matches!(
            supply.apply_price_action(0, &single(0, own, 0.5), 0.0),
            Err(SupplyError::InvalidScale(_))
        ));
    }

    #[test]
    fn selling_until_sold_out() {
        let (_, mut supply) = state();
        let key = supply.services[0].cells[0];
        supply.instances[0].cells[0].capacity = 1;
        supply.instances[0].cells[0].price = Money::from_cents(5_000);
        assert!(supply.tickets_available(0, &key).unwrap());
        assert_eq!(supply.sell_ticket(0, &key).unwrap(), Money::from_cents(5_000));
        assert_eq!(supply.instances[0].cells[0].sold, 1);
        assert!(!supply.tickets_available(0, &key).unwrap());
        assert!(matches!(supply.sell_ticket(0, &key), Err(SupplyError::SoldOut { .. })));
    }

    #[test]
    fn zero_capacity_is_unavailable() {
        let (_, mut supply) = state();
        let key = supply.services[0].cells[0];
        supply.instances[0].cells[0].capacity = 0;
        assert!(!supply.tickets_available(0, &key).unwrap());
        supply.instances[0].cells[0].capacity = 10;
        supply.instances[0].cells[0].sold = 3;
        assert!(supply.tickets_available(0, &key).unwrap());
        let bogus = CellKey { origin: 3, destination: 0, seat: 0 };
        assert!(matches!(supply.tickets_available(0, &bogus), Err(SupplyError::UnknownCell(_))));
    }

    #[test]
    fn sale_then_reprice_then_sale() {
        let (_, mut supply) = state();
        let key = supply.services[0].cells[0];
        supply.instances[0].cells[0].price = Money::from_cents(5_000);
        supply.sell_ticket(0, &key).unwrap();
        supply.apply_price_action(0, &single(0, key, 1.0), 25.0).unwrap();
        assert_eq!(supply.sell_ticket(0, &key).unwrap(), Money::from_cents(6_250));
        assert_eq!(supply.instances[0].revenue, Money::from_cents(11_250));
    }

    #[test]
    fn agent_cells_follow_agent_order() {
        let (s, supply) = state();
        assert_eq!(supply.agent_cells(&s, 0).len(), 1);
        let cells = supply.agent_cells(&s, 1);
        assert_eq!(cells.len(), 2);
        assert_eq!(supply.services[cells[0].0].id, "s_ab_2");
        assert_eq!(supply.services[cells[1].0].id, "s_cd_2");
    }

    proptest! {
        #[test]
        fn prices_stay_nonnegative_and_ledger_is_exact(
            steps in proptest::collection::vec((-1.0f64..=1.0, any::<bool>()), 1..60)
        ) {
            let (_, mut supply) = state();
            let key = supply.services[0].cells[0];
            let mut paid = Money::ZERO;
            for (alpha, sell) in steps {
                supply.apply_price_action(0, &single(0, key, alpha), 25.0).unwrap();
                prop_assert!(!supply.price(0, &key).unwrap().is_negative());
                if sell && supply.tickets_available(0, &key).unwrap() {
                    paid += supply.sell_ticket(0, &key).unwrap();
                }
            }
            prop_assert_eq!(supply.total_revenue(), paid);
            prop_assert_eq!(supply.agent_revenue(0), paid);
            prop_assert_eq!(supply.agent_revenue(1), Money::ZERO);
        }
    }
}
