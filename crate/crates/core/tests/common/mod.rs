//! Shared fixtures: a small TOML scenario builder, a random network
//! generator and a brute-force journey enumerator that shares no code with
//! the library's search.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::Rng;
use railpricing::demand::travel_dates;
use railpricing::journey::Journey;
use railpricing::rng::SimRng;
use railpricing::scenario::{load_scenario, Scenario};
use railpricing::supply::SupplyState;

#[derive(Debug, Clone)]
pub struct ServiceSpec {
    pub id: String,
    pub operator: String,
    pub stops: Vec<String>,
    /// Minutes after midnight, one per stop.
    pub times: Vec<u32>,
    /// (origin, destination, price)
    pub cells: Vec<(String, String, f64)>,
}

impl ServiceSpec {
    pub fn direct(id: &str, operator: &str, from: &str, to: &str, dep: &str, arr: &str, price: f64) -> Self {
        ServiceSpec {
            id: id.into(),
            operator: operator.into(),
            stops: vec![from.into(), to.into()],
            times: vec![minutes(dep), minutes(arr)],
            cells: vec![(from.into(), to.into(), price)],
        }
    }
}

pub fn minutes(hhmm: &str) -> u32 {
    let (h, m) = hhmm.split_once(':').expect("HH:MM");
    h.parse::<u32>().unwrap() * 60 + m.parse::<u32>().unwrap()
}

fn hhmm(t: u32) -> String {
    format!("{:02}:{:02}", t / 60, t % 60)
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub stations: Vec<String>,
    pub services: Vec<ServiceSpec>,
    pub min_transfer: i64,
    pub max_transfers: u32,
    pub horizon: u32,
    /// `[[passenger_types]]` bodies without the header; the first id is used
    /// for the market mixture.
    pub passenger_type: String,
    pub market: (String, String, f64),
    pub seats: u32,
}

impl Fixture {
    pub fn new(stations: &[&str], services: Vec<ServiceSpec>) -> Self {
        Fixture {
            stations: stations.iter().map(|s| s.to_string()).collect(),
            market: (stations[0].to_string(), stations[1].to_string(), 1.0),
            services,
            min_transfer: 5,
            max_transfers: 2,
            horizon: 1,
            passenger_type: concat!(
                "id = \"p\"\n",
                "seat_utility = { std = 10.0 }\n",
                "price_sensitivity = { kind = \"linear\", coef = 1.0 }\n",
                "noise = { kind = \"gumbel\", scale = 1.0 }\n"
            )
            .into(),
            seats: 100,
        }
    }

    pub fn toml(&self) -> String {
        let q = |v: &[String]| v.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", ");
        let mut operators: Vec<&str> = Vec::new();
        for s in &self.services {
            if !operators.contains(&s.operator.as_str()) {
                operators.push(&s.operator);
            }
        }
        let mut doc = String::new();
        let (mo, md, mean) = &self.market;
        writeln!(
            doc,
            "schema_version = 1\nname = \"fixture\"\nmin_transfer_minutes = {}\nmax_transfers = {}\n\
             stations = [{}]\nseat_classes = [\"std\"]\n\n[episode]\nhorizon_days = {}\n\
             passengers_expected_total = {:?}\n",
            self.min_transfer,
            self.max_transfers,
            q(&self.stations),
            self.horizon,
            mean * f64::from(self.horizon)
        )
        .unwrap();
        writeln!(doc, "[[corridors]]\nid = \"all\"\nstations = [{}]\n", q(&self.stations)).unwrap();
        writeln!(doc, "[[rolling_stock]]\nid = \"unit\"\nseats = {{ std = {} }}\n", self.seats).unwrap();
        for op in &operators {
            let ids: Vec<String> = self.services.iter().filter(|s| s.operator == *op).map(|s| s.id.clone()).collect();
            writeln!(doc, "[[agents]]\nid = \"{op}\"\nservices = [{}]\n", q(&ids)).unwrap();
        }
        for s in &self.services {
            writeln!(doc, "[[lines]]\nid = \"line_{}\"\ncorridor = \"all\"\nstops = [{}]\n", s.id, q(&s.stops)).unwrap();
            let times: Vec<String> = s.times.iter().map(|t| hhmm(*t)).collect();
            let cells: Vec<String> = s
                .cells
                .iter()
                .map(|(o, d, p)| format!("{{ origin = \"{o}\", destination = \"{d}\", seat = \"std\", price = {p:?} }}"))
                .collect();
            writeln!(
                doc,
                "[[services]]\nid = \"{}\"\noperator = \"{}\"\nline = \"line_{}\"\nrolling_stock = \"unit\"\n\
                 stop_times = [{}]\nprices = [{}]\n",
                s.id,
                s.operator,
                s.id,
                q(&times),
                cells.join(", ")
            )
            .unwrap();
        }
        let ptype_id = self
            .passenger_type
            .lines()
            .find_map(|l| l.strip_prefix("id = "))
            .expect("passenger type id")
            .trim_matches('"')
            .to_string();
        writeln!(doc, "[[passenger_types]]\n{}", self.passenger_type).unwrap();
        writeln!(
            doc,
            "[[markets]]\norigin = \"{mo}\"\ndestination = \"{md}\"\nvolume = {{ kind = \"poisson\", mean = {mean:?} }}\n\
             mixture = {{ {ptype_id} = 1.0 }}"
        )
        .unwrap();
        doc
    }

    pub fn scenario(&self) -> Scenario {
        let doc = self.toml();
        load_scenario(&doc).unwrap_or_else(|e| panic!("{e}\n{doc}"))
    }
}

/// Supply on the scenario's (single) travel date.
pub fn supply_for(scenario: &Scenario) -> (SupplyState, u32) {
    let dates = travel_dates(scenario);
    let date = *dates.start();
    (SupplyState::new(scenario, dates), date)
}

/// Four stations, eight services, market A→C, δ = 5: one direct journey,
/// several one-transfer journeys, a dead end at D and a zero-minute transfer.
pub fn transfer_network() -> Fixture {
    let s = |id, from, to, dep, arr| ServiceSpec::direct(id, "op", from, to, dep, arr, 10.0);
    let mut f = Fixture::new(
        &["A", "B", "C", "D"],
        vec![
            s("s1", "A", "C", "08:00", "09:00"),
            s("s2", "A", "B", "08:00", "08:45"),
            s("s3", "B", "C", "09:00", "09:30"),
            s("s4", "A", "B", "08:00", "08:50"),
            s("s5", "B", "D", "09:00", "09:25"),
            s("s6", "A", "B", "08:00", "08:30"),
            s("s7", "B", "D", "08:50", "09:15"),
            s("s8", "D", "C", "09:15", "09:45"),
        ],
    );
    f.market = ("A".into(), "C".into(), 1.0);
    f
}

/// A random network of at most 6 stations and 12 services on one date.
pub fn random_network(rng: &mut SimRng) -> Fixture {
    let n_stations = rng.random_range(3..=6);
    let stations: Vec<String> = (0..n_stations).map(|i| format!("S{i}")).collect();
    let n_services = rng.random_range(1..=12);
    let mut services = Vec::new();
    for k in 0..n_services {
        let n_stops = rng.random_range(2..=n_stations.min(4));
        let mut pool: Vec<usize> = (0..n_stations).collect();
        let mut stops = Vec::new();
        for _ in 0..n_stops {
            stops.push(pool.swap_remove(rng.random_range(0..pool.len())));
        }
        let mut t = rng.random_range(6 * 60..12 * 60);
        let mut times = Vec::new();
        for _ in 0..n_stops {
            times.push(t);
            t += rng.random_range(5..=60);
        }
        let mut pairs = BTreeSet::new();
        for _ in 0..rng.random_range(1..=3) {
            let o = rng.random_range(0..n_stops - 1);
            let d = rng.random_range(o + 1..n_stops);
            pairs.insert((o, d));
        }
        services.push(ServiceSpec {
            id: format!("svc{k}"),
            operator: format!("op{}", k % 2),
            stops: stops.iter().map(|&s| stations[s].clone()).collect(),
            times,
            cells: pairs
                .into_iter()
                .map(|(o, d)| (stations[stops[o]].clone(), stations[stops[d]].clone(), 10.0))
                .collect(),
        });
    }
    let refs: Vec<&str> = stations.iter().map(String::as_str).collect();
    let mut f = Fixture::new(&refs, services);
    f.min_transfer = [0, 5, 10, 15][rng.random_range(0..4)];
    f.max_transfers = rng.random_range(0..=2);
    f
}

/// A leg as (service id, board, alight, departure, arrival), names and
/// minutes taken straight from the fixture.
pub type RawLeg = (String, String, String, u32, u32);

fn raw_legs(f: &Fixture) -> Vec<RawLeg> {
    let mut out = Vec::new();
    for s in &f.services {
        for (o, d, _) in &s.cells {
            let at = |st: &String| s.times[s.stops.iter().position(|x| x == st).unwrap()];
            let leg = (s.id.clone(), o.clone(), d.clone(), at(o), at(d));
            if !out.contains(&leg) {
                out.push(leg);
            }
        }
    }
    out
}

fn valid(seq: &[&RawLeg], origin: &str, destination: &str, min_transfer: i64) -> bool {
    if seq[0].1 != origin || seq[seq.len() - 1].2 != destination {
        return false;
    }
    let mut seen_stations = vec![origin.to_string()];
    let mut seen_services = Vec::new();
    for (i, leg) in seq.iter().enumerate() {
        if i > 0 {
            let prev = seq[i - 1];
            if prev.2 != leg.1 {
                return false;
            }
            let gap = i64::from(leg.3) - i64::from(prev.4);
            if gap < 0 || gap < min_transfer {
                return false;
            }
        }
        if seen_stations.contains(&leg.2) || seen_services.contains(&leg.0) {
            return false;
        }
        seen_stations.push(leg.2.clone());
        seen_services.push(leg.0.clone());
    }
    true
}

/// Every valid journey of every market, by exhaustive search over all leg
/// sequences of length up to `max_transfers + 1`.
pub fn brute_force(f: &Fixture) -> BTreeMap<(String, String), BTreeSet<Vec<RawLeg>>> {
    let legs = raw_legs(f);
    let mut found: BTreeMap<(String, String), BTreeSet<Vec<RawLeg>>> = BTreeMap::new();
    let max_len = f.max_transfers as usize + 1;
    let mut stack: Vec<Vec<usize>> = (0..legs.len()).map(|i| vec![i]).collect();
    while let Some(seq) = stack.pop() {
        let refs: Vec<&RawLeg> = seq.iter().map(|&i| &legs[i]).collect();
        let (origin, destination) = (&refs[0].1, &refs[refs.len() - 1].2);
        if valid(&refs, origin, destination, f.min_transfer) {
            found
                .entry((origin.clone(), destination.clone()))
                .or_default()
                .insert(refs.iter().map(|&l| l.clone()).collect());
        }
        if seq.len() < max_len {
            for i in 0..legs.len() {
                let mut next = seq.clone();
                next.push(i);
                stack.push(next);
            }
        }
    }
    found
}

/// Library journeys in the same raw form.
pub fn as_raw(scenario: &Scenario, supply: &SupplyState, journeys: &[Journey]) -> Vec<Vec<RawLeg>> {
    journeys
        .iter()
        .map(|j| {
            j.legs
                .iter()
                .map(|l| {
                    (
                        supply.services[l.service].id.clone(),
                        scenario.stations[l.board].clone(),
                        scenario.stations[l.alight].clone(),
                        l.departure.minutes(),
                        l.arrival.minutes(),
                    )
                })
                .collect()
        })
        .collect()
}
