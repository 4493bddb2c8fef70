//! Scenario documents: network, services, passenger types, demand and episode
//! parameters.
//!
//! A scenario is a single TOML document. Unknown keys are rejected and every
//! cross-reference is checked by [`Scenario::validate`], which reports the
//! dotted path of the offending key.

mod presets;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::money::Money;

pub use presets::{preset, PRESET_NAMES};

pub const SCHEMA_VERSION: u32 = 1;

pub type StationId = String;
pub type AgentId = String;
pub type ServiceId = String;
pub type SeatClass = String;
pub type PassengerTypeId = String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid scenario at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("unknown preset `{0}` (available: business, business_student)")]
    UnknownPreset(String),
    #[error("cannot read scenario file {path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

/// Minutes after midnight of the travel date, written `HH:MM` in documents.
/// Hours past 23 are allowed for services running after midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ClockTime(pub u32);

impl ClockTime {
    pub fn hm(hours: u32, minutes: u32) -> Self {
        ClockTime(hours * 60 + minutes)
    }

    pub fn minutes(self) -> u32 {
        self.0
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for ClockTime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (h, m) = s
            .split_once(':')
            .ok_or_else(|| format!("expected HH:MM, got `{s}`"))?;
        let h: u32 = h.parse().map_err(|_| format!("bad hour in `{s}`"))?;
        let m: u32 = m.parse().map_err(|_| format!("bad minute in `{s}`"))?;
        if m >= 60 || h >= 48 {
            return Err(format!("time `{s}` out of range"));
        }
        Ok(ClockTime::hm(h, m))
    }
}

impl Serialize for ClockTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClockTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TravelDateMode {
    /// Every passenger travels on the day after the last booking day.
    #[default]
    #[serde(rename = "single-terminal-date")]
    SingleTerminalDate,
    /// Each passenger draws a travel date from its type's anticipation curve.
    #[serde(rename = "per-passenger-date")]
    PerPassengerDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSpec {
    pub horizon_days: u32,
    #[serde(default)]
    pub travel_date_mode: TravelDateMode,
    pub passengers_expected_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corridor {
    pub id: String,
    pub stations: Vec<StationId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: String,
    pub corridor: String,
    pub stops: Vec<StationId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RollingStock {
    pub id: String,
    pub seats: BTreeMap<SeatClass, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: AgentId,
    pub services: Vec<ServiceId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSpec {
    pub origin: StationId,
    pub destination: StationId,
    pub seat: SeatClass,
    pub price: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceTemplate {
    pub id: ServiceId,
    pub operator: AgentId,
    pub line: String,
    pub rolling_stock: String,
    /// Departure (and arrival) time at each stop of the line, in stop order.
    pub stop_times: Vec<ClockTime>,
    pub prices: Vec<PriceSpec>,
}

/// A nonnegative penalty curve over a nonnegative argument. Omitted
/// penalties are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Penalty {
    Linear { coef: f64 },
    /// Linear interpolation between `(x, y)` points, flat outside the range.
    Piecewise { points: Vec<[f64; 2]> },
}

impl Default for Penalty {
    fn default() -> Self {
        Penalty::ZERO
    }
}

impl Penalty {
    pub const ZERO: Penalty = Penalty::Linear { coef: 0.0 };

    pub fn linear(coef: f64) -> Self {
        Penalty::Linear { coef }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Penalty::Linear { coef } => coef * x,
            Penalty::Piecewise { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if x <= first[0] {
                    return first[1];
                }
                if x >= last[0] {
                    return last[1];
                }
                let i = points.partition_point(|p| p[0] <= x);
                let [x0, y0] = points[i - 1];
                let [x1, y1] = points[i];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    fn validate(&self, path: &str) -> Result<(), ScenarioError> {
        match self {
            Penalty::Linear { coef } => {
                if !coef.is_finite() || *coef < 0.0 {
                    return Err(invalid(format!("{path}.coef"), "must be finite and >= 0"));
                }
            }
            Penalty::Piecewise { points } => {
                if points.is_empty() {
                    return Err(invalid(format!("{path}.points"), "needs at least one point"));
                }
                for (i, [x, y]) in points.iter().enumerate() {
                    if !x.is_finite() || !y.is_finite() || *y < 0.0 {
                        return Err(invalid(
                            format!("{path}.points[{i}]"),
                            "values must be finite with y >= 0",
                        ));
                    }
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(invalid(format!("{path}.points"), "x must be strictly increasing"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    Gumbel { scale: f64 },
    Normal { scale: f64 },
}

impl NoiseSpec {
    pub fn scale(&self) -> f64 {
        match self {
            NoiseSpec::Gumbel { scale } | NoiseSpec::Normal { scale } => *scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub start: ClockTime,
    pub end: ClockTime,
}

impl Default for TimeWindow {
    fn default() -> Self {
        TimeWindow {
            start: ClockTime::hm(6, 0),
            end: ClockTime::hm(22, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassengerType {
    pub id: PassengerTypeId,
    /// Utility constant per operator; operators not listed contribute 0.
    #[serde(default)]
    pub tsp_affinity: BTreeMap<AgentId, f64>,
    pub seat_utility: BTreeMap<SeatClass, f64>,
    /// Applied to |arrival - preferred arrival| in minutes.
    #[serde(default)]
    pub arrival_penalty: Penalty,
    /// Applied to |departure - preferred departure| in minutes.
    #[serde(default)]
    pub departure_penalty: Penalty,
    /// Applied to the summed ticket price of the journey.
    #[serde(default)]
    pub price_sensitivity: Penalty,
    /// Applied to total travel time in minutes.
    #[serde(default)]
    pub travel_time_penalty: Penalty,
    /// Applied to total transfer time in minutes.
    #[serde(default)]
    pub transfer_time_penalty: Penalty,
    /// Applied to the number of transfers.
    #[serde(default)]
    pub transfer_count_penalty: Penalty,
    pub noise: NoiseSpec,
    /// Relative purchase weight by days before travel (index 0 = travel day).
    /// Empty means uniform over the booking horizon.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anticipation_weights: Vec<f64>,
    #[serde(default)]
    pub preferred_departure: TimeWindow,
    #[serde(default)]
    pub preferred_arrival: TimeWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolumeDistribution {
    Poisson { mean: f64 },
    Constant { count: u32 },
}

impl VolumeDistribution {
    pub fn mean(&self) -> f64 {
        match self {
            VolumeDistribution::Poisson { mean } => *mean,
            VolumeDistribution::Constant { count } => f64::from(*count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketDemandSpec {
    pub origin: StationId,
    pub destination: StationId,
    /// Daily passenger volume of the market.
    pub volume: VolumeDistribution,
    pub mixture: BTreeMap<PassengerTypeId, f64>,
}

fn default_max_transfers() -> u32 {
    2
}

fn default_time_slot_minutes() -> u32 {
    60
}

fn default_price_scale() -> f64 {
    25.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    /// `default` when utility coefficients and demand splits are chosen
    /// values rather than calibrated ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<String>,
    pub min_transfer_minutes: i64,
    #[serde(default = "default_max_transfers")]
    pub max_transfers: u32,
    #[serde(default = "default_time_slot_minutes")]
    pub time_slot_minutes: u32,
    /// Price change (in percent) of a full-magnitude action.
    #[serde(default = "default_price_scale")]
    pub price_scale_percent: f64,
    pub stations: Vec<StationId>,
    pub seat_classes: Vec<SeatClass>,
    pub episode: EpisodeSpec,
    pub corridors: Vec<Corridor>,
    pub lines: Vec<Line>,
    pub rolling_stock: Vec<RollingStock>,
    pub agents: Vec<AgentSpec>,
    pub services: Vec<ServiceTemplate>,
    pub passenger_types: Vec<PassengerType>,
    pub markets: Vec<MarketDemandSpec>,
}

/// Parses and validates a scenario document.
pub fn load_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario =
        toml::from_str(document).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

/// Resolves a `--scenario` argument: a preset name or a path to a document.
pub fn resolve(arg: &str) -> Result<Scenario, ScenarioError> {
    if PRESET_NAMES.contains(&arg) {
        return preset(arg);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(ScenarioError::UnknownPreset(arg.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: arg.to_string(),
        message: e.to_string(),
    })?;
    load_scenario(&text)
}

impl Scenario {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serialises to TOML")
    }

    /// SHA-256 of the canonical serialisation.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    pub fn station_index(&self, id: &str) -> Option<usize> {
        self.stations.iter().position(|s| s == id)
    }

    pub fn seat_index(&self, id: &str) -> Option<usize> {
        self.seat_classes.iter().position(|s| s == id)
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    pub fn passenger_type_index(&self, id: &str) -> Option<usize> {
        self.passenger_types.iter().position(|p| p.id == id)
    }

    pub fn expected_passengers_per_episode(&self) -> f64 {
        self.markets.iter().map(|m| m.volume.mean()).sum::<f64>() * f64::from(self.episode.horizon_days)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.min_transfer_minutes < 0 {
            return Err(invalid("min_transfer_minutes", "must be >= 0"));
        }
        if self.time_slot_minutes == 0 {
            return Err(invalid("time_slot_minutes", "must be >= 1"));
        }
        if !(self.price_scale_percent.is_finite() && self.price_scale_percent > 0.0) {
            return Err(invalid("price_scale_percent", "must be finite and > 0"));
        }
        if self.episode.horizon_days < 1 {
            return Err(invalid("episode.horizon_days", "must be >= 1"));
        }
        let stations = unique_ids(self.stations.iter().map(String::as_str), "stations")?;
        if stations.is_empty() {
            return Err(invalid("stations", "at least one station is required"));
        }
        let seats = unique_ids(self.seat_classes.iter().map(String::as_str), "seat_classes")?;
        if seats.is_empty() {
            return Err(invalid("seat_classes", "at least one seat class is required"));
        }

        let corridors = unique_ids(self.corridors.iter().map(|c| c.id.as_str()), "corridors")?;
        for (i, corridor) in self.corridors.iter().enumerate() {
            for (j, s) in corridor.stations.iter().enumerate() {
                if !stations.contains(s.as_str()) {
                    return Err(invalid(format!("corridors[{i}].stations[{j}]"), format!("unknown station `{s}`")));
                }
            }
        }

        unique_ids(self.lines.iter().map(|l| l.id.as_str()), "lines")?;
        for (i, line) in self.lines.iter().enumerate() {
            let path = format!("lines[{i}]");
            if !corridors.contains(line.corridor.as_str()) {
                return Err(invalid(format!("{path}.corridor"), format!("unknown corridor `{}`", line.corridor)));
            }
            let corridor = self.corridors.iter().find(|c| c.id == line.corridor).expect("checked");
            if line.stops.len() < 2 {
                return Err(invalid(format!("{path}.stops"), "a line needs at least two stops"));
            }
            let mut seen = BTreeSet::new();
            for (j, s) in line.stops.iter().enumerate() {
                if !stations.contains(s.as_str()) {
                    return Err(invalid(format!("{path}.stops[{j}]"), format!("unknown station `{s}`")));
                }
                if !corridor.stations.contains(s) {
                    return Err(invalid(
                        format!("{path}.stops[{j}]"),
                        format!("station `{s}` is not in corridor `{}`", corridor.id),
                    ));
                }
                if !seen.insert(s.as_str()) {
                    return Err(invalid(format!("{path}.stops[{j}]"), format!("station `{s}` repeated")));
                }
            }
        }

        unique_ids(self.rolling_stock.iter().map(|r| r.id.as_str()), "rolling_stock")?;
        for (i, stock) in self.rolling_stock.iter().enumerate() {
            for seat in stock.seats.keys() {
                if !seats.contains(seat.as_str()) {
                    return Err(invalid(format!("rolling_stock[{i}].seats.{seat}"), "unknown seat class"));
                }
            }
        }

        let agents = unique_ids(self.agents.iter().map(|a| a.id.as_str()), "agents")?;
        if agents.is_empty() {
            return Err(invalid("agents", "at least one agent is required"));
        }
        let services = unique_ids(self.services.iter().map(|s| s.id.as_str()), "services")?;
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for (i, agent) in self.agents.iter().enumerate() {
            if agent.services.is_empty() {
                return Err(invalid(format!("agents[{i}].services"), "must not be empty"));
            }
            for (j, s) in agent.services.iter().enumerate() {
                let path = format!("agents[{i}].services[{j}]");
                if !services.contains(s.as_str()) {
                    return Err(invalid(path, format!("unknown service `{s}`")));
                }
                if let Some(other) = owner.insert(s.as_str(), agent.id.as_str()) {
                    return Err(invalid(path, format!("service `{s}` already operated by `{other}`")));
                }
            }
        }

        for (i, service) in self.services.iter().enumerate() {
            self.validate_service(i, service, &agents, &seats, &owner)?;
        }

        let types = unique_ids(self.passenger_types.iter().map(|p| p.id.as_str()), "passenger_types")?;
        for (i, ptype) in self.passenger_types.iter().enumerate() {
            self.validate_passenger_type(i, ptype, &agents, &seats)?;
        }

        let mut markets = BTreeSet::new();
        for (i, market) in self.markets.iter().enumerate() {
            let path = format!("markets[{i}]");
            for (key, s) in [("origin", &market.origin), ("destination", &market.destination)] {
                if !stations.contains(s.as_str()) {
                    return Err(invalid(format!("{path}.{key}"), format!("unknown station `{s}`")));
                }
            }
            if market.origin == market.destination {
                return Err(invalid(path, "origin and destination must differ"));
            }
            if !markets.insert((market.origin.as_str(), market.destination.as_str())) {
                return Err(invalid(path, "duplicate market"));
            }
            if let VolumeDistribution::Poisson { mean } = market.volume {
                if !mean.is_finite() || mean < 0.0 {
                    return Err(invalid(format!("{path}.volume.mean"), "must be finite and >= 0"));
                }
            }
            let mut total = 0.0;
            for (k, p) in &market.mixture {
                if !types.contains(k.as_str()) {
                    return Err(invalid(format!("{path}.mixture.{k}"), "unknown passenger type"));
                }
                if !p.is_finite() || *p < 0.0 {
                    return Err(invalid(format!("{path}.mixture.{k}"), "must be finite and >= 0"));
                }
                total += p;
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("{path}.mixture"), format!("probabilities sum to {total}, expected 1")));
            }
        }
        if !self.markets.iter().any(|m| m.volume.mean() > 0.0) {
            return Err(invalid("markets", "at least one market needs positive expected demand"));
        }

        let expected = self.episode.passengers_expected_total;
        if !(expected.is_finite() && expected > 0.0) {
            return Err(invalid("episode.passengers_expected_total", "must be finite and > 0"));
        }
        let implied = self.expected_passengers_per_episode();
        if (implied - expected).abs() > 1e-6 * expected.max(1.0) {
            return Err(invalid(
                "episode.passengers_expected_total",
                format!("market volumes imply {implied} passengers per episode, not {expected}"),
            ));
        }
        Ok(())
    }

    fn validate_service(
        &self,
        i: usize,
        service: &ServiceTemplate,
        agents: &BTreeSet<&str>,
        seats: &BTreeSet<&str>,
        owner: &BTreeMap<&str, &str>,
    ) -> Result<(), ScenarioError> {
        let path = format!("services[{i}]");
        if !agents.contains(service.operator.as_str()) {
            return Err(invalid(format!("{path}.operator"), format!("unknown agent `{}`", service.operator)));
        }
        match owner.get(service.id.as_str()) {
            Some(a) if *a == service.operator => {}
            _ => {
                return Err(invalid(
                    format!("{path}.operator"),
                    format!("service `{}` is not listed under agent `{}`", service.id, service.operator),
                ))
            }
        }
        let line = self
            .line(&service.line)
            .ok_or_else(|| invalid(format!("{path}.line"), format!("unknown line `{}`", service.line)))?;
        let stock = self
            .rolling_stock
            .iter()
            .find(|r| r.id == service.rolling_stock)
            .ok_or_else(|| {
                invalid(
                    format!("{path}.rolling_stock"),
                    format!("unknown rolling stock `{}`", service.rolling_stock),
                )
            })?;
        if service.stop_times.len() != line.stops.len() {
            return Err(invalid(
                format!("{path}.stop_times"),
                format!("expected {} times, one per stop of line `{}`", line.stops.len(), line.id),
            ));
        }
        if service.stop_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(format!("{path}.stop_times"), "times must be strictly increasing"));
        }
        if service.prices.is_empty() {
            return Err(invalid(format!("{path}.prices"), "a service must sell at least one cell"));
        }
        let mut cells = BTreeSet::new();
        for (j, cell) in service.prices.iter().enumerate() {
            let cpath = format!("{path}.prices[{j}]");
            let o = line.stops.iter().position(|s| *s == cell.origin);
            let d = line.stops.iter().position(|s| *s == cell.destination);
            match (o, d) {
                (Some(o), Some(d)) if o < d => {}
                _ => {
                    return Err(invalid(
                        cpath,
                        format!(
                            "`{}`-`{}` is not a forward segment of line `{}`",
                            cell.origin, cell.destination, line.id
                        ),
                    ))
                }
            }
            if !seats.contains(cell.seat.as_str()) || !stock.seats.contains_key(&cell.seat) {
                return Err(invalid(format!("{cpath}.seat"), format!("seat class `{}` not offered", cell.seat)));
            }
            if cell.price.is_negative() {
                return Err(invalid(format!("{cpath}.price"), "must be >= 0"));
            }
            if !cells.insert((&cell.origin, &cell.destination, &cell.seat)) {
                return Err(invalid(cpath, "duplicate price cell"));
            }
        }
        Ok(())
    }

    fn validate_passenger_type(
        &self,
        i: usize,
        ptype: &PassengerType,
        agents: &BTreeSet<&str>,
        seats: &BTreeSet<&str>,
    ) -> Result<(), ScenarioError> {
        let path = format!("passenger_types[{i}]");
        for (agent, v) in &ptype.tsp_affinity {
            if !agents.contains(agent.as_str()) {
                return Err(invalid(format!("{path}.tsp_affinity.{agent}"), "unknown agent"));
            }
            if !v.is_finite() {
                return Err(invalid(format!("{path}.tsp_affinity.{agent}"), "must be finite"));
            }
        }
        for (seat, v) in &ptype.seat_utility {
            if !seats.contains(seat.as_str()) {
                return Err(invalid(format!("{path}.seat_utility.{seat}"), "unknown seat class"));
            }
            if !v.is_finite() {
                return Err(invalid(format!("{path}.seat_utility.{seat}"), "must be finite"));
            }
        }
        for (name, penalty) in [
            ("arrival_penalty", &ptype.arrival_penalty),
            ("departure_penalty", &ptype.departure_penalty),
            ("price_sensitivity", &ptype.price_sensitivity),
            ("travel_time_penalty", &ptype.travel_time_penalty),
            ("transfer_time_penalty", &ptype.transfer_time_penalty),
            ("transfer_count_penalty", &ptype.transfer_count_penalty),
        ] {
            penalty.validate(&format!("{path}.{name}"))?;
        }
        let scale = ptype.noise.scale();
        if !scale.is_finite() || scale < 0.0 {
            return Err(invalid(format!("{path}.noise.scale"), "must be finite and >= 0"));
        }
        if ptype.anticipation_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid(format!("{path}.anticipation_weights"), "weights must be finite and >= 0"));
        }
        if !ptype.anticipation_weights.is_empty()
            && crate::demand::anticipation_support(self, ptype).iter().all(|(_, w)| *w == 0.0)
        {
            return Err(invalid(
                format!("{path}.anticipation_weights"),
                "no positive weight inside the booking horizon",
            ));
        }
        for (name, window) in [
            ("preferred_departure", &ptype.preferred_departure),
            ("preferred_arrival", &ptype.preferred_arrival),
        ] {
            if window.end < window.start {
                return Err(invalid(format!("{path}.{name}"), "end is before start"));
            }
        }
        Ok(())
    }
}

fn unique_ids<'a>(ids: impl Iterator<Item = &'a str>, path: &str) -> Result<BTreeSet<&'a str>, ScenarioError> {
    let mut set = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        if !set.insert(id) {
            return Err(invalid(format!("{path}[{i}]"), format!("duplicate id `{id}`")));
        }
    }
    Ok(set)
}
