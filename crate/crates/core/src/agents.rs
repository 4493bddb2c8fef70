//! Baseline policies: uniform random, scripted price levels, and independent
//! tabular Q-learners over the discrete action space.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{ActionMode, ActionSpace, AgentAction, AgentObservation, Env, EpisodeLog};
use crate::money::Money;
use crate::rng::SimRng;
use crate::supply::{CellKey, ALPHA_LEVELS, NO_CHANGE_LEVEL};

const LEVELS: usize = ALPHA_LEVELS.len();

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error("tabular learners need the discrete action mode")]
    IncompatibleSpace,
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("bad script: {0}")]
    Script(String),
    #[error("no discrete actions in the traces")]
    EmptyTrace,
    #[error("trace holds price change {0}, which is not a discrete level")]
    NotDiscrete(f64),
}

/// One environment transition seen from one agent.
pub struct Transition<'a> {
    pub observation: &'a AgentObservation,
    pub action: &'a AgentAction,
    pub reward: f64,
    pub next_observation: &'a AgentObservation,
    pub terminal: bool,
}

/// A per-agent decision rule. Policies see only their own agent's
/// observation.
pub trait Policy: Send {
    fn act(&mut self, observation: &AgentObservation, rng: &mut SimRng) -> AgentAction;

    fn learn(&mut self, _transition: &Transition<'_>) {}

    /// Switches exploration off (evaluation) or on (training).
    fn set_greedy(&mut self, _greedy: bool) {}
}

fn level_action(mode: ActionMode, levels: Vec<u8>) -> AgentAction {
    match mode {
        ActionMode::Discrete => AgentAction::Discrete(levels),
        ActionMode::Continuous => AgentAction::Continuous(levels.iter().map(|&l| ALPHA_LEVELS[l as usize]).collect()),
    }
}

/// Uniform over `[-1, 1]^d` or over `11^d` levels.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    space: ActionSpace,
}

impl RandomPolicy {
    pub fn new(space: ActionSpace) -> Self {
        RandomPolicy { space }
    }

    pub fn sample(&self, rng: &mut SimRng) -> AgentAction {
        match self.space {
            ActionSpace::Box { low, high, shape } => {
                AgentAction::Continuous((0..shape).map(|_| rng.random_range(low..=high)).collect())
            }
            ActionSpace::MultiDiscrete { n, shape } => {
                AgentAction::Discrete((0..shape).map(|_| rng.random_range(0..n) as u8).collect())
            }
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _observation: &AgentObservation, rng: &mut SimRng) -> AgentAction {
        self.sample(rng)
    }
}

/// Level schedule for scripted agents, read from TOML:
///
/// ```toml
/// default_level = 5          # agents not listed hold prices
/// [agents]
/// agent_1 = [[10], [10], [0]] # one row per day; the last row repeats
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    #[serde(default)]
    pub default_level: Option<u8>,
    #[serde(default)]
    pub agents: BTreeMap<String, Vec<Vec<u8>>>,
}

impl Script {
    pub fn constant(level: u8) -> Self {
        Script {
            default_level: Some(level),
            agents: BTreeMap::new(),
        }
    }

    pub fn parse(document: &str) -> Result<Self, AgentError> {
        toml::from_str(document).map_err(|e| AgentError::Script(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, AgentError> {
        let text = std::fs::read_to_string(path).map_err(|e| AgentError::Script(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn policy(&self, env: &Env, agent: &str) -> Result<ScriptedPolicy, AgentError> {
        let idx = env
            .scenario()
            .agent_index(agent)
            .ok_or_else(|| AgentError::UnknownAgent(agent.into()))?;
        let dim = env.agent_cells(idx).len();
        let rows = match (self.agents.get(agent), self.default_level) {
            (Some(rows), _) => rows.clone(),
            (None, Some(level)) => vec![vec![level; dim]],
            (None, None) => return Err(AgentError::Script(format!("no levels for `{agent}` and no default_level"))),
        };
        if rows.is_empty() {
            return Err(AgentError::Script(format!("`{agent}` has an empty schedule")));
        }
        for row in &rows {
            if row.len() != dim {
                return Err(AgentError::Script(format!("`{agent}` rows need {dim} levels, found {}", row.len())));
            }
            if let Some(bad) = row.iter().find(|l| **l as usize >= LEVELS) {
                return Err(AgentError::Script(format!("level {bad} outside 0..=10")));
            }
        }
        Ok(ScriptedPolicy { rows, mode: env.mode() })
    }
}

/// Replays a fixed level schedule indexed by day.
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    rows: Vec<Vec<u8>>,
    mode: ActionMode,
}

impl Policy for ScriptedPolicy {
    fn act(&mut self, observation: &AgentObservation, _rng: &mut SimRng) -> AgentAction {
        let row = (observation.day as usize).min(self.rows.len() - 1);
        level_action(self.mode, self.rows[row].clone())
    }
}

/// Action values per state for a finite action set, created lazily at a
/// constant initial value.
#[derive(Debug, Clone)]
pub struct QTable<S> {
    n_actions: usize,
    initial: f64,
    values: HashMap<S, Vec<f64>>,
}

impl<S: Eq + Hash + Clone> QTable<S> {
    pub fn new(n_actions: usize, initial: f64) -> Self {
        assert!(n_actions > 0);
        QTable {
            n_actions,
            initial,
            values: HashMap::new(),
        }
    }

    pub fn value(&self, state: &S, action: usize) -> f64 {
        self.values.get(state).map_or(self.initial, |v| v[action])
    }

    /// Highest-valued action; the lowest index wins ties.
    pub fn greedy(&self, state: &S) -> usize {
        match self.values.get(state) {
            None => 0,
            Some(v) => {
                let mut best = 0;
                for (a, q) in v.iter().enumerate() {
                    if *q > v[best] {
                        best = a;
                    }
                }
                best
            }
        }
    }

    pub fn max_value(&self, state: &S) -> f64 {
        self.value(state, self.greedy(state))
    }

    pub fn select(&self, state: &S, epsilon: f64, rng: &mut SimRng) -> usize {
        if epsilon > 0.0 && rng.random::<f64>() < epsilon {
            rng.random_range(0..self.n_actions)
        } else {
            self.greedy(state)
        }
    }

    /// One-step Q-learning backup; `next` is `None` at episode end.
    pub fn update(&mut self, state: &S, action: usize, reward: f64, next: Option<&S>, step_size: f64, gamma: f64) {
        let bootstrap = next.map_or(0.0, |s| self.max_value(s));
        let target = reward + gamma * bootstrap;
        let (n, init) = (self.n_actions, self.initial);
        let q = &mut self.values.entry(state.clone()).or_insert_with(|| vec![init; n])[action];
        *q += step_size * (target - *q);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QConfig {
    pub epsilon: f64,
    pub step_size: f64,
    pub gamma: f64,
    pub initial_value: f64,
}

impl Default for QConfig {
    fn default() -> Self {
        QConfig {
            epsilon: 0.1,
            step_size: 0.1,
            gamma: 0.99,
            initial_value: 0.0,
        }
    }
}

/// Day index plus the price of each own cell, binned in steps of 10% of its
/// opening price and capped at +-100%.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateDigest {
    pub day: u32,
    pub bins: Vec<i8>,
}

pub fn price_bin(price: Money, initial: Money) -> i8 {
    if initial.cents() == 0 {
        return 0;
    }
    let change = (price.cents() - initial.cents()) as f64 / initial.cents() as f64;
    (change * 10.0).round().clamp(-10.0, 10.0) as i8
}

/// Independent Q-learner for one agent: one table per priced cell, all keyed
/// by the agent's own state digest and trained on the agent's reward.
#[derive(Debug, Clone)]
pub struct TabularQPolicy {
    agent: usize,
    cells: Vec<(usize, CellKey)>,
    initial_prices: Vec<Money>,
    heads: Vec<QTable<StateDigest>>,
    config: QConfig,
    greedy: bool,
}

impl TabularQPolicy {
    pub fn new(env: &Env, agent: &str, config: QConfig) -> Result<Self, AgentError> {
        if env.mode() != ActionMode::Discrete {
            return Err(AgentError::IncompatibleSpace);
        }
        let idx = env
            .scenario()
            .agent_index(agent)
            .ok_or_else(|| AgentError::UnknownAgent(agent.into()))?;
        let cells = env.agent_cells(idx).to_vec();
        Ok(TabularQPolicy {
            agent: idx,
            heads: vec![QTable::new(LEVELS, config.initial_value); cells.len()],
            initial_prices: env.initial_prices(idx),
            cells,
            config,
            greedy: false,
        })
    }

    pub fn digest(&self, observation: &AgentObservation) -> StateDigest {
        let bins = self
            .cells
            .iter()
            .zip(&self.initial_prices)
            .map(|((service, key), initial)| {
                let price = observation
                    .services
                    .iter()
                    .filter(|s| s.service == *service && s.operator == self.agent)
                    .flat_map(|s| &s.prices)
                    .find(|p| p.origin == key.origin && p.destination == key.destination && p.seat == key.seat)
                    .map_or(*initial, |p| p.price);
                price_bin(price, *initial)
            })
            .collect();
        StateDigest {
            day: observation.day,
            bins,
        }
    }

    pub fn heads(&self) -> &[QTable<StateDigest>] {
        &self.heads
    }

    fn levels(action: &AgentAction) -> Vec<usize> {
        match action {
            AgentAction::Discrete(levels) => levels.iter().map(|&l| l as usize).collect(),
            AgentAction::Continuous(_) => unreachable!("tabular learner only acts discretely"),
        }
    }
}

impl Policy for TabularQPolicy {
    fn act(&mut self, observation: &AgentObservation, rng: &mut SimRng) -> AgentAction {
        let state = self.digest(observation);
        let epsilon = if self.greedy { 0.0 } else { self.config.epsilon };
        AgentAction::Discrete(
            self.heads
                .iter()
                .map(|h| h.select(&state, epsilon, rng) as u8)
                .collect(),
        )
    }

    fn learn(&mut self, t: &Transition<'_>) {
        let state = self.digest(t.observation);
        let next = (!t.terminal).then(|| self.digest(t.next_observation));
        let QConfig { step_size, gamma, .. } = self.config;
        for (head, level) in self.heads.iter_mut().zip(Self::levels(t.action)) {
            head.update(&state, level, t.reward, next.as_ref(), step_size, gamma);
        }
    }

    fn set_greedy(&mut self, greedy: bool) {
        self.greedy = greedy;
    }
}

/// Coarse grouping of the eleven price levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionBin {
    MaxReduction,
    ModerateReduction,
    NoChange,
    ModerateIncrease,
    MaxIncrease,
}

impl ActionBin {
    pub const ALL: [ActionBin; 5] = [
        ActionBin::MaxReduction,
        ActionBin::ModerateReduction,
        ActionBin::NoChange,
        ActionBin::ModerateIncrease,
        ActionBin::MaxIncrease,
    ];

    pub fn of_level(level: u8) -> ActionBin {
        match level {
            0 | 1 => ActionBin::MaxReduction,
            2..=4 => ActionBin::ModerateReduction,
            NO_CHANGE_LEVEL => ActionBin::NoChange,
            6..=8 => ActionBin::ModerateIncrease,
            _ => ActionBin::MaxIncrease,
        }
    }
}

/// Selection frequency per agent, per priced cell (`service:origin-destination:seat`),
/// per action bin.
pub type PolicyDistributionLog = BTreeMap<String, BTreeMap<String, BTreeMap<ActionBin, f64>>>;

fn level_of(alpha: f64) -> Result<u8, AgentError> {
    ALPHA_LEVELS
        .iter()
        .position(|a| *a == alpha)
        .map(|l| l as u8)
        .ok_or(AgentError::NotDiscrete(alpha))
}

/// Empirical action-bin frequencies over discrete-mode episode traces.
pub fn log_policy_distribution(env: &Env, traces: &[EpisodeLog]) -> Result<PolicyDistributionLog, AgentError> {
    let scenario = env.scenario();
    let mut counts: Vec<Vec<[u64; 5]>> = (0..scenario.agents.len())
        .map(|a| vec![[0; 5]; env.agent_cells(a).len()])
        .collect();
    let mut any = false;
    for day in traces.iter().flat_map(|t| &t.days) {
        for (agent, alphas) in day.alphas.iter().enumerate() {
            for (cell, alpha) in alphas.iter().enumerate() {
                let bin = ActionBin::of_level(level_of(*alpha)?);
                counts[agent][cell][bin as usize] += 1;
                any = true;
            }
        }
    }
    if !any {
        return Err(AgentError::EmptyTrace);
    }
    let mut log = PolicyDistributionLog::new();
    for (agent, cells) in counts.iter().enumerate() {
        let agent_id = &scenario.agents[agent].id;
        let labels = env.action_space(agent_id).expect("known agent").cells;
        let rows = log.entry(agent_id.clone()).or_default();
        for (label, c) in labels.iter().zip(cells) {
            let total: u64 = c.iter().sum();
            if total == 0 {
                continue;
            }
            rows.insert(
                format!("{}:{}-{}:{}", label.service, label.origin, label.destination, label.seat),
                ActionBin::ALL
                    .iter()
                    .map(|b| (*b, c[*b as usize] as f64 / total as f64))
                    .collect(),
            );
        }
    }
    Ok(log)
}
