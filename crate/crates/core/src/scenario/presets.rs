//! Built-in scenarios on the four-station network.
//!
//! ```text
//!        agent_2          agent_3         agent_2 / agent_3
//!   A ------------- B -------------- C ===================== D
//!   \_______________ agent_1 _______/
//! ```
//!
//! Topology, horizon, passenger totals and the type mixture are fixed facts of
//! the two scenarios. Utility coefficients, per-market demand splits,
//! timetables, capacities and initial prices are chosen defaults and the
//! documents carry `calibration = "default"`.

use std::collections::BTreeMap;

use super::*;

pub const PRESET_NAMES: [&str; 2] = ["business", "business_student"];

/// Returns a built-in scenario by name.
pub fn preset(name: &str) -> Result<Scenario, ScenarioError> {
    let scenario = match name {
        "business" => business(),
        "business_student" => business_student(),
        other => return Err(ScenarioError::UnknownPreset(other.to_string())),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Share of the episode demand per market, in elevenths: A-B, B-C, A-C, C-D, A-D.
const MARKET_SHARES: [(&str, &str, f64); 5] = [
    ("A", "B", 2.0),
    ("B", "C", 2.0),
    ("A", "C", 3.0),
    ("C", "D", 2.0),
    ("A", "D", 2.0),
];

fn price(origin: &str, destination: &str, amount: i64) -> PriceSpec {
    PriceSpec {
        origin: origin.into(),
        destination: destination.into(),
        seat: "standard".into(),
        price: Money::from_cents(amount * 100),
    }
}

fn service(id: &str, operator: &str, line: &str, times: &[(u32, u32)], prices: Vec<PriceSpec>) -> ServiceTemplate {
    ServiceTemplate {
        id: id.into(),
        operator: operator.into(),
        line: line.into(),
        rolling_stock: "standard_unit".into(),
        stop_times: times.iter().map(|&(h, m)| ClockTime::hm(h, m)).collect(),
        prices,
    }
}

fn line(id: &str, stops: &[&str]) -> Line {
    Line {
        id: id.into(),
        corridor: "ABCD".into(),
        stops: stops.iter().map(|s| s.to_string()).collect(),
    }
}

fn network(name: &str, horizon_days: u32, total: f64, passenger_types: Vec<PassengerType>, mixture: &[(&str, f64)]) -> Scenario {
    let mixture: BTreeMap<String, f64> = mixture.iter().map(|(k, p)| (k.to_string(), *p)).collect();
    let markets = MARKET_SHARES
        .iter()
        .map(|&(o, d, share)| MarketDemandSpec {
            origin: o.into(),
            destination: d.into(),
            volume: VolumeDistribution::Poisson {
                mean: total * share / (11.0 * f64::from(horizon_days)),
            },
            mixture: mixture.clone(),
        })
        .collect();

    Scenario {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        calibration: Some("default".into()),
        min_transfer_minutes: 5,
        max_transfers: 2,
        time_slot_minutes: 60,
        price_scale_percent: 25.0,
        stations: ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect(),
        seat_classes: vec!["standard".into()],
        episode: EpisodeSpec {
            horizon_days,
            travel_date_mode: TravelDateMode::SingleTerminalDate,
            passengers_expected_total: total,
        },
        corridors: vec![Corridor {
            id: "ABCD".into(),
            stations: ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect(),
        }],
        lines: vec![
            line("A-C", &["A", "C"]),
            line("A-B", &["A", "B"]),
            line("B-C", &["B", "C"]),
            line("C-D", &["C", "D"]),
        ],
        rolling_stock: vec![RollingStock {
            id: "standard_unit".into(),
            seats: BTreeMap::from([("standard".to_string(), 60)]),
        }],
        agents: vec![
            AgentSpec { id: "agent_1".into(), services: vec!["s_ac_1".into()] },
            AgentSpec { id: "agent_2".into(), services: vec!["s_ab_2".into(), "s_cd_2".into()] },
            AgentSpec { id: "agent_3".into(), services: vec!["s_bc_3".into(), "s_cd_3".into()] },
        ],
        services: vec![
            service("s_ac_1", "agent_1", "A-C", &[(8, 0), (9, 0)], vec![price("A", "C", 60)]),
            service("s_ab_2", "agent_2", "A-B", &[(7, 30), (8, 15)], vec![price("A", "B", 30)]),
            service("s_cd_2", "agent_2", "C-D", &[(9, 30), (10, 15)], vec![price("C", "D", 35)]),
            service("s_bc_3", "agent_3", "B-C", &[(8, 30), (9, 10)], vec![price("B", "C", 30)]),
            service("s_cd_3", "agent_3", "C-D", &[(9, 45), (10, 30)], vec![price("C", "D", 35)]),
        ],
        passenger_types,
        markets,
    }
}

fn business_type(anticipation_weights: Vec<f64>) -> PassengerType {
    PassengerType {
        id: "business".into(),
        tsp_affinity: BTreeMap::new(),
        seat_utility: BTreeMap::from([("standard".to_string(), 12.0)]),
        arrival_penalty: Penalty::linear(0.004),
        departure_penalty: Penalty::linear(0.004),
        price_sensitivity: Penalty::linear(0.02),
        travel_time_penalty: Penalty::linear(0.01),
        transfer_time_penalty: Penalty::linear(0.02),
        transfer_count_penalty: Penalty::linear(0.5),
        noise: NoiseSpec::Gumbel { scale: 1.0 },
        anticipation_weights,
        preferred_departure: TimeWindow::default(),
        preferred_arrival: TimeWindow::default(),
    }
}

fn student_type() -> PassengerType {
    PassengerType {
        id: "student".into(),
        tsp_affinity: BTreeMap::new(),
        seat_utility: BTreeMap::from([("standard".to_string(), 9.0)]),
        arrival_penalty: Penalty::linear(0.002),
        departure_penalty: Penalty::linear(0.002),
        price_sensitivity: Penalty::linear(0.12),
        travel_time_penalty: Penalty::linear(0.005),
        transfer_time_penalty: Penalty::linear(0.01),
        transfer_count_penalty: Penalty::linear(0.25),
        noise: NoiseSpec::Gumbel { scale: 1.0 },
        // weight grows as the travel date approaches
        anticipation_weights: vec![0.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0],
        preferred_departure: TimeWindow::default(),
        preferred_arrival: TimeWindow::default(),
    }
}

fn business() -> Scenario {
    network("business", 5, 110.0, vec![business_type(Vec::new())], &[("business", 1.0)])
}

fn business_student() -> Scenario {
    network(
        "business_student",
        7,
        220.0,
        vec![
            business_type(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
            student_type(),
        ],
        &[("business", 0.6), ("student", 0.4)],
    )
}
