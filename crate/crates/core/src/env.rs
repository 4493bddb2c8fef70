//! The pricing game: one step per booking day.
//!
//! `step` applies every agent's price action, advances the day, samples that
//! day's passengers and lets them choose and buy in arrival order (inventory
//! changes are visible to later passengers). Each agent is rewarded with the
//! revenue its services earned during the day. Observations expose every
//! service's static attributes and prices to all agents, but seat sales only
//! to the operating agent.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::choice::{choose_journey, Choice, TypeParams};
use crate::demand::{travel_dates, DemandModel, Passenger};
use crate::journey::{enumerate_journeys, Journey};
use crate::money::Money;
use crate::rng::EnvStreams;
use crate::scenario::Scenario;
use crate::supply::{discretize_action, CellKey, PriceAction, PriceAdjustment, SupplyError, SupplyState, ALPHA_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    #[default]
    Continuous,
    Discrete,
}

/// One agent's action: a price multiplier per priced cell (continuous) or a
/// level in `0..=10` per priced cell (discrete).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentAction {
    Continuous(Vec<f64>),
    Discrete(Vec<u8>),
}

impl AgentAction {
    /// Interprets raw numbers according to the action mode.
    pub fn from_values(mode: ActionMode, values: &[f64]) -> Result<Self, String> {
        match mode {
            ActionMode::Continuous => Ok(AgentAction::Continuous(values.to_vec())),
            ActionMode::Discrete => values
                .iter()
                .map(|v| {
                    if v.fract() == 0.0 && (0.0..=10.0).contains(v) {
                        Ok(*v as u8)
                    } else {
                        Err(format!("discrete level {v} is not an integer in 0..=10"))
                    }
                })
                .collect::<Result<Vec<_>, _>>()
                .map(AgentAction::Discrete),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AgentAction::Continuous(v) => v.len(),
            AgentAction::Discrete(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Price multipliers of the action.
    pub fn alphas(&self) -> Result<Vec<f64>, SupplyError> {
        match self {
            AgentAction::Continuous(v) => Ok(v.clone()),
            AgentAction::Discrete(levels) => levels.iter().map(|&l| discretize_action(i64::from(l))).collect(),
        }
    }
}

pub type JointAction = BTreeMap<String, AgentAction>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("environment has not been reset")]
    NotReset,
    #[error("episode already terminated at day {0}")]
    AlreadyTerminal(u32),
    #[error("malformed action for agent `{agent}`: {reason}")]
    MalformedAction { agent: String, reason: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceObservation {
    pub origin: usize,
    pub destination: usize,
    pub seat: usize,
    pub price: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceObservation {
    pub service: usize,
    pub travel_date: u32,
    pub operator: usize,
    pub corridor: usize,
    pub line: usize,
    pub time_slot: u32,
    pub rolling_stock: usize,
    pub prices: Vec<PriceObservation>,
    /// Seats sold per price cell; present only for the observer's services.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tickets_sold: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentObservation {
    pub agent: String,
    pub day: u32,
    pub services: Vec<ServiceObservation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct StepInfo {
    pub day: u32,
    pub passengers_generated: u32,
    pub passengers_travelled: u32,
    pub passengers_opted_out: u32,
    /// Tickets sold during the step, per agent.
    pub tickets_sold: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observations: BTreeMap<String, AgentObservation>,
    pub rewards: BTreeMap<String, Money>,
    pub terminal: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaleRecord {
    pub passenger: u64,
    pub agent: usize,
    pub service: usize,
    pub travel_date: u32,
    pub cell: CellKey,
    pub price: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassengerRecord {
    pub passenger: Passenger,
    pub travelled: bool,
    /// Utility of the chosen journey, or the best rejected utility.
    pub utility: f64,
    pub journey_legs: usize,
    pub spend: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: u32,
    /// Price multipliers applied before the day's demand, per agent index.
    pub alphas: Vec<Vec<f64>>,
    pub passengers: Vec<PassengerRecord>,
    pub sales: Vec<SaleRecord>,
    pub rewards: Vec<Money>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub seed: u64,
    pub agents: Vec<String>,
    pub passenger_types: Vec<String>,
    pub horizon: u32,
    pub days: Vec<DayRecord>,
    pub terminal: bool,
}

impl EpisodeLog {
    pub fn total_spend(&self) -> Money {
        self.days.iter().flat_map(|d| &d.sales).map(|s| s.price).sum()
    }
}

/// Bounds of one observation field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub name: String,
    pub low: f64,
    /// `None` means unbounded.
    pub high: Option<f64>,
    pub own_services_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionSpace {
    Box { low: f64, high: f64, shape: usize },
    MultiDiscrete { n: u32, shape: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLabel {
    pub service: String,
    pub origin: String,
    pub destination: String,
    pub seat: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpaceDescriptor {
    pub space: ActionSpace,
    pub cells: Vec<CellLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpaceDescriptor {
    pub services: usize,
    pub fields: Vec<FieldDescriptor>,
}

#[derive(Debug, Clone)]
struct EpisodeState {
    day: u32,
    supply: SupplyState,
    streams: EnvStreams,
    revenue: Vec<Money>,
    log: EpisodeLog,
}

/// One environment instance. Calls must be serialised; separate instances
/// share nothing mutable.
#[derive(Debug, Clone)]
pub struct Env {
    scenario: Arc<Scenario>,
    mode: ActionMode,
    demand: DemandModel,
    types: Vec<TypeParams>,
    initial_supply: SupplyState,
    agent_cells: Vec<Vec<(usize, CellKey)>>,
    journeys: HashMap<(usize, u32), Vec<Journey>>,
    state: Option<EpisodeState>,
}

impl Env {
    pub fn new(scenario: impl Into<Arc<Scenario>>, mode: ActionMode) -> Self {
        let scenario: Arc<Scenario> = scenario.into();
        let dates: Vec<u32> = travel_dates(&scenario).collect();
        let initial_supply = SupplyState::new(&scenario, dates.iter().copied());
        let agent_cells = (0..scenario.agents.len())
            .map(|a| initial_supply.agent_cells(&scenario, a))
            .collect();
        let mut journeys = HashMap::new();
        for (m, market) in scenario.markets.iter().enumerate() {
            let o = scenario.station_index(&market.origin).expect("validated");
            let d = scenario.station_index(&market.destination).expect("validated");
            for &date in &dates {
                let found = enumerate_journeys(
                    &initial_supply,
                    o,
                    d,
                    date,
                    scenario.min_transfer_minutes,
                    scenario.max_transfers,
                )
                .expect("validated market");
                journeys.insert((m, date), found);
            }
        }
        Env {
            demand: DemandModel::new(&scenario),
            types: TypeParams::all(&scenario),
            initial_supply,
            agent_cells,
            journeys,
            state: None,
            mode,
            scenario,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn mode(&self) -> ActionMode {
        self.mode
    }

    pub fn agent_ids(&self) -> Vec<String> {
        self.scenario.agents.iter().map(|a| a.id.clone()).collect()
    }

    pub fn day(&self) -> Option<u32> {
        self.state.as_ref().map(|s| s.day)
    }

    pub fn is_terminal(&self) -> bool {
        self.state
            .as_ref()
            .is_some_and(|s| s.day >= self.scenario.episode.horizon_days)
    }

    pub fn supply(&self) -> Option<&SupplyState> {
        self.state.as_ref().map(|s| &s.supply)
    }

    pub fn episode_log(&self) -> Option<&EpisodeLog> {
        self.state.as_ref().map(|s| &s.log)
    }

    /// Cumulative revenue per agent since reset.
    pub fn cumulative_profit(&self) -> Option<Vec<Money>> {
        self.state.as_ref().map(|s| s.revenue.clone())
    }

    /// Journeys a passenger of `market` can take on `travel_date`.
    pub fn journeys(&self, market: usize, travel_date: u32) -> &[Journey] {
        self.journeys.get(&(market, travel_date)).map_or(&[], Vec::as_slice)
    }

    /// Opening prices of an agent's cells, in action order.
    pub fn initial_prices(&self, agent: usize) -> Vec<Money> {
        self.agent_cells[agent]
            .iter()
            .map(|(service, key)| self.initial_supply.price(*service, key).expect("agent cell"))
            .collect()
    }

    /// Priced cells of an agent, in action order.
    pub fn agent_cells(&self, agent: usize) -> &[(usize, CellKey)] {
        &self.agent_cells[agent]
    }

    fn agent_index(&self, agent: &str) -> Result<usize, EnvError> {
        self.scenario
            .agent_index(agent)
            .ok_or_else(|| EnvError::UnknownAgent(agent.to_string()))
    }

    pub fn action_space(&self, agent: &str) -> Result<ActionSpaceDescriptor, EnvError> {
        let idx = self.agent_index(agent)?;
        let shape = self.agent_cells[idx].len();
        let space = match self.mode {
            ActionMode::Continuous => ActionSpace::Box { low: -1.0, high: 1.0, shape },
            ActionMode::Discrete => ActionSpace::MultiDiscrete {
                n: ALPHA_LEVELS.len() as u32,
                shape,
            },
        };
        let s = &self.scenario;
        let cells = self.agent_cells[idx]
            .iter()
            .map(|(service, key)| CellLabel {
                service: s.services[*service].id.clone(),
                origin: s.stations[key.origin].clone(),
                destination: s.stations[key.destination].clone(),
                seat: s.seat_classes[key.seat].clone(),
            })
            .collect();
        Ok(ActionSpaceDescriptor { space, cells })
    }

    pub fn observation_space(&self, agent: &str) -> Result<ObservationSpaceDescriptor, EnvError> {
        self.agent_index(agent)?;
        let s = &self.scenario;
        let count = |n: usize| Some(n.saturating_sub(1) as f64);
        let max_capacity = s
            .rolling_stock
            .iter()
            .flat_map(|r| r.seats.values())
            .max()
            .copied()
            .unwrap_or(0);
        let slots = (48u32 * 60).div_ceil(s.time_slot_minutes) as usize;
        let field = |name: &str, high: Option<f64>, own: bool| FieldDescriptor {
            name: name.into(),
            low: 0.0,
            high,
            own_services_only: own,
        };
        let last_date = *travel_dates(s).end();
        Ok(ObservationSpaceDescriptor {
            services: self.initial_supply.instances.len(),
            fields: vec![
                field("day", Some(f64::from(s.episode.horizon_days)), false),
                field("service", count(s.services.len()), false),
                field("travel_date", Some(f64::from(last_date)), false),
                field("operator", count(s.agents.len()), false),
                field("corridor", count(s.corridors.len()), false),
                field("line", count(s.lines.len()), false),
                field("time_slot", count(slots), false),
                field("rolling_stock", count(s.rolling_stock.len()), false),
                field("prices.origin", count(s.stations.len()), false),
                field("prices.destination", count(s.stations.len()), false),
                field("prices.seat", count(s.seat_classes.len()), false),
                field("prices.price", None, false),
                field("tickets_sold", Some(f64::from(max_capacity)), true),
            ],
        })
    }

    /// Starts a new episode at initial prices.
    pub fn reset(&mut self, seed: u64) -> BTreeMap<String, AgentObservation> {
        let agents = self.agent_ids();
        let state = EpisodeState {
            day: 0,
            supply: self.initial_supply.clone(),
            streams: EnvStreams::from_seed(seed),
            revenue: vec![Money::ZERO; agents.len()],
            log: EpisodeLog {
                seed,
                agents,
                passenger_types: self.scenario.passenger_types.iter().map(|p| p.id.clone()).collect(),
                horizon: self.scenario.episode.horizon_days,
                days: Vec::new(),
                terminal: false,
            },
        };
        self.state = Some(state);
        self.observations()
    }

    fn observations(&self) -> BTreeMap<String, AgentObservation> {
        let state = self.state.as_ref().expect("reset");
        self.scenario
            .agents
            .iter()
            .enumerate()
            .map(|(idx, agent)| (agent.id.clone(), observe(&state.supply, idx, &agent.id, state.day)))
            .collect()
    }

    /// Observation of one agent at the current state.
    pub fn observation(&self, agent: &str) -> Result<AgentObservation, EnvError> {
        let idx = self.agent_index(agent)?;
        let state = self.state.as_ref().ok_or(EnvError::NotReset)?;
        Ok(observe(&state.supply, idx, agent, state.day))
    }

    fn price_actions(&self, joint: &JointAction) -> Result<Vec<PriceAction>, EnvError> {
        if let Some(unknown) = joint.keys().find(|k| self.scenario.agent_index(k).is_none()) {
            return Err(EnvError::MalformedAction {
                agent: unknown.clone(),
                reason: "not an agent of this scenario".into(),
            });
        }
        let mut actions = Vec::with_capacity(self.scenario.agents.len());
        for (idx, agent) in self.scenario.agents.iter().enumerate() {
            let malformed = |reason: String| EnvError::MalformedAction {
                agent: agent.id.clone(),
                reason,
            };
            let action = joint
                .get(&agent.id)
                .ok_or_else(|| malformed("missing action".into()))?;
            match (self.mode, action) {
                (ActionMode::Continuous, AgentAction::Continuous(_)) | (ActionMode::Discrete, AgentAction::Discrete(_)) => {}
                _ => return Err(malformed(format!("expected a {:?} action", self.mode).to_lowercase())),
            }
            let cells = &self.agent_cells[idx];
            if action.len() != cells.len() {
                return Err(malformed(format!("expected {} values, got {}", cells.len(), action.len())));
            }
            let alphas = action.alphas().map_err(|e| malformed(e.to_string()))?;
            if let Some(bad) = alphas.iter().find(|a| !(a.is_finite() && a.abs() <= 1.0)) {
                return Err(malformed(format!("price change {bad} outside [-1, 1]")));
            }
            actions.push(PriceAction {
                adjustments: cells
                    .iter()
                    .zip(alphas)
                    .map(|(&(service, cell), alpha)| PriceAdjustment { service, cell, alpha })
                    .collect(),
            });
        }
        Ok(actions)
    }

    /// Advances one booking day.
    pub fn step(&mut self, joint: &JointAction) -> Result<StepResult, EnvError> {
        let horizon = self.scenario.episode.horizon_days;
        let day = self.state.as_ref().ok_or(EnvError::NotReset)?.day;
        if day >= horizon {
            return Err(EnvError::AlreadyTerminal(day));
        }
        let actions = self.price_actions(joint)?;
        let beta = self.scenario.price_scale_percent;
        let state = self.state.as_mut().expect("checked");

        for (agent, action) in actions.iter().enumerate() {
            state
                .supply
                .apply_price_action(agent, action, beta)
                .expect("actions validated against agent cells");
        }

        state.day += 1;
        let day = state.day;
        let passengers = self.demand.sample_day(day, &mut state.streams.demand);
        let agents = self.scenario.agents.len();
        let mut tickets = vec![0u32; agents];
        let mut records = Vec::with_capacity(passengers.len());
        let mut sales = Vec::new();

        for passenger in passengers {
            let candidates = self
                .journeys
                .get(&(passenger.market, passenger.travel_date))
                .map_or(&[][..], Vec::as_slice);
            let params = &self.types[passenger.passenger_type];
            let choice = choose_journey(&passenger, params, candidates, &state.supply, &mut state.streams.choice);
            let record = match choice {
                Choice::Travel { journey, seats, utility } => {
                    let legs = &candidates[journey].legs;
                    let mut spend = Money::ZERO;
                    for (leg, seat) in legs.iter().zip(&seats) {
                        let price = state
                            .supply
                            .sell_ticket(leg.instance, seat)
                            .expect("chosen seats are available");
                        spend += price;
                        tickets[leg.operator] += 1;
                        sales.push(SaleRecord {
                            passenger: passenger.id,
                            agent: leg.operator,
                            service: leg.service,
                            travel_date: passenger.travel_date,
                            cell: *seat,
                            price,
                        });
                    }
                    PassengerRecord {
                        passenger,
                        travelled: true,
                        utility: utility.total,
                        journey_legs: legs.len(),
                        spend,
                    }
                }
                Choice::NoTravel { best_utility } => PassengerRecord {
                    passenger,
                    travelled: false,
                    utility: best_utility,
                    journey_legs: 0,
                    spend: Money::ZERO,
                },
            };
            records.push(record);
        }

        let mut rewards = Vec::with_capacity(agents);
        for agent in 0..agents {
            let now = state.supply.agent_revenue(agent);
            rewards.push(now - state.revenue[agent]);
            state.revenue[agent] = now;
        }

        let travelled = records.iter().filter(|r| r.travelled).count() as u32;
        let info = StepInfo {
            day,
            passengers_generated: records.len() as u32,
            passengers_travelled: travelled,
            passengers_opted_out: records.len() as u32 - travelled,
            tickets_sold: self
                .scenario
                .agents
                .iter()
                .zip(&tickets)
                .map(|(a, t)| (a.id.clone(), *t))
                .collect(),
        };
        let terminal = day >= horizon;
        state.log.days.push(DayRecord {
            day,
            alphas: actions
                .iter()
                .map(|a| a.adjustments.iter().map(|adj| adj.alpha).collect())
                .collect(),
            passengers: records,
            sales,
            rewards: rewards.clone(),
        });
        state.log.terminal = terminal;

        Ok(StepResult {
            observations: self.observations(),
            rewards: self
                .scenario
                .agents
                .iter()
                .zip(rewards)
                .map(|(a, r)| (a.id.clone(), r))
                .collect(),
            terminal,
            info,
        })
    }
}

fn observe(supply: &SupplyState, agent: usize, agent_id: &str, day: u32) -> AgentObservation {
    let services = supply
        .instances
        .iter()
        .map(|inst| {
            let info = &supply.services[inst.service];
            ServiceObservation {
                service: inst.service,
                travel_date: inst.travel_date,
                operator: info.operator,
                corridor: info.corridor,
                line: info.line,
                time_slot: info.time_slot,
                rolling_stock: info.rolling_stock,
                prices: inst
                    .cells
                    .iter()
                    .map(|c| PriceObservation {
                        origin: c.key.origin,
                        destination: c.key.destination,
                        seat: c.key.seat,
                        price: c.price,
                    })
                    .collect(),
                tickets_sold: (inst.operator == agent).then(|| inst.cells.iter().map(|c| c.sold).collect()),
            }
        })
        .collect();
    AgentObservation {
        agent: agent_id.to_string(),
        day,
        services,
    }
}

/// `sum_l gamma^l * r_l` over a reward sequence.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    assert!((0.0..=1.0).contains(&gamma), "gamma must lie in [0, 1]");
    let mut weight = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += weight * r;
        weight *= gamma;
    }
    total
}
