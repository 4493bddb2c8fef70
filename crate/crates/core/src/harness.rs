//! Seeded batch runs over parallel environment instances.
//!
//! For every base seed the run creates `instances` environments. Instance `r`
//! is seeded with `seed + r * 1000` for training and `seed + r * 100000` for
//! evaluation; each instance draws its episode seeds from its own stream and
//! owns its own policies. Episodes are dealt to instances round-robin. Units
//! share nothing, so running them on a thread pool or one after another
//! produces the same records.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{log_policy_distribution, AgentError, Policy, PolicyDistributionLog, QConfig, RandomPolicy, Script, TabularQPolicy, Transition};
use crate::env::{ActionMode, Env, EnvError, EpisodeLog, JointAction};
use crate::metrics::{episode_report, EpisodeReport};
use crate::rng::{evaluation_instance_seed, stream, training_instance_seed, SimRng, EPISODE_SEED_STREAM, POLICY_STREAM};
use crate::scenario::Scenario;

pub const DEFAULT_EVAL_EPISODES: u32 = 10_000;
pub const DEFAULT_TRAINING_EPISODES: u32 = 2_000;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("seed {seed}, instance {instance}: {source}")]
    Instance { seed: u64, instance: u32, source: EnvError },
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicySpec {
    Random,
    Scripted { script: Script },
    TabularQ { config: QConfig },
}

impl PolicySpec {
    /// Parses `random`, `scripted:<file>` or `tabular-q`.
    pub fn parse(arg: &str) -> Result<Self, HarnessError> {
        match arg {
            "random" => Ok(PolicySpec::Random),
            "tabular-q" => Ok(PolicySpec::TabularQ { config: QConfig::default() }),
            _ => match arg.strip_prefix("scripted:") {
                Some(path) if !path.is_empty() => Ok(PolicySpec::Scripted {
                    script: Script::load(Path::new(path))?,
                }),
                _ => Err(HarnessError::Config(format!(
                    "unknown policy `{arg}` (expected random, scripted:<file> or tabular-q)"
                ))),
            },
        }
    }

    fn learns(&self) -> bool {
        matches!(self, PolicySpec::TabularQ { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Learning policies update during the reported episodes.
    Train,
    /// Learning policies train first, then are reported greedily.
    Eval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub policy: PolicySpec,
    pub seeds: Vec<u64>,
    /// Reported episodes per base seed.
    pub episodes: u32,
    /// Environment instances per base seed.
    pub instances: u32,
    pub mode: RunMode,
    pub action_mode: ActionMode,
    /// Training episodes per base seed before evaluation of a learner.
    pub training_episodes: u32,
    /// Run units on the calling thread instead of the thread pool.
    pub sequential: bool,
    /// Keep full episode logs.
    pub trace: bool,
}

impl RunConfig {
    pub fn new(policy: PolicySpec, seeds: Vec<u64>) -> Self {
        RunConfig {
            policy,
            seeds,
            episodes: DEFAULT_EVAL_EPISODES,
            instances: 1,
            mode: RunMode::Eval,
            action_mode: ActionMode::Continuous,
            training_episodes: DEFAULT_TRAINING_EPISODES,
            sequential: false,
            trace: false,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: &str| Err(HarnessError::Config(m.into()));
        if self.seeds.is_empty() {
            return fail("at least one seed is required");
        }
        if self.instances == 0 {
            return fail("at least one environment instance is required");
        }
        if self.episodes == 0 {
            return fail("at least one episode is required");
        }
        if self.policy.learns() && self.action_mode != ActionMode::Discrete {
            return Err(AgentError::IncompatibleSpace.into());
        }
        Ok(())
    }

    fn instance_seed(&self, seed: u64, instance: u32) -> u64 {
        match self.mode {
            RunMode::Train => training_instance_seed(seed, u64::from(instance)),
            RunMode::Eval => evaluation_instance_seed(seed, u64::from(instance)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub instance: u32,
    pub instance_seed: u64,
    /// Episode index within the base seed.
    pub episode: u32,
    pub episode_seed: u64,
    pub report: EpisodeReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sd: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, sd, n })
    }
}

/// Metric means over one base seed's episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMeans {
    pub seed: u64,
    pub episodes: usize,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub mode: RunMode,
    pub per_seed: Vec<SeedMeans>,
    /// Mean and standard deviation across base seeds.
    pub metrics: BTreeMap<String, Stat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_distribution: Option<PolicyDistributionLog>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<EpisodeRecord>,
    pub summary: RunSummary,
    pub traces: Vec<EpisodeLog>,
}

fn make_policies(env: &Env, spec: &PolicySpec) -> Result<Vec<Box<dyn Policy>>, HarnessError> {
    env.agent_ids()
        .iter()
        .map(|agent| -> Result<Box<dyn Policy>, HarnessError> {
            Ok(match spec {
                PolicySpec::Random => Box::new(RandomPolicy::new(env.action_space(agent).expect("known agent").space)),
                PolicySpec::Scripted { script } => Box::new(script.policy(env, agent)?),
                PolicySpec::TabularQ { config } => Box::new(TabularQPolicy::new(env, agent, *config)?),
            })
        })
        .collect()
}

/// Plays one episode to the horizon and returns its log.
pub fn play_episode(
    env: &mut Env,
    policies: &mut [Box<dyn Policy>],
    rng: &mut SimRng,
    seed: u64,
    learn: bool,
) -> Result<EpisodeLog, EnvError> {
    let agents = env.agent_ids();
    let mut observations = env.reset(seed);
    loop {
        let joint: JointAction = agents
            .iter()
            .zip(policies.iter_mut())
            .map(|(a, p)| (a.clone(), p.act(&observations[a], rng)))
            .collect();
        let result = env.step(&joint)?;
        if learn {
            for (a, p) in agents.iter().zip(policies.iter_mut()) {
                p.learn(&Transition {
                    observation: &observations[a],
                    action: &joint[a],
                    reward: result.rewards[a].to_f64(),
                    next_observation: &result.observations[a],
                    terminal: result.terminal,
                });
            }
        }
        observations = result.observations;
        if result.terminal {
            break;
        }
    }
    Ok(env.episode_log().expect("reset").clone())
}

struct UnitOutput {
    records: Vec<EpisodeRecord>,
    traces: Vec<EpisodeLog>,
}

fn run_unit(scenario: &Arc<Scenario>, config: &RunConfig, seed: u64, instance: u32) -> Result<UnitOutput, HarnessError> {
    let attribute = |source| HarnessError::Instance { seed, instance, source };
    let mut env = Env::new(Arc::clone(scenario), config.action_mode);
    let mut policies = make_policies(&env, &config.policy)?;
    let learner = config.policy.learns();
    let share = |total: u32| (0..total).filter(|e| e % config.instances == instance).count();

    if learner && config.mode == RunMode::Eval {
        let train_seed = training_instance_seed(seed, u64::from(instance));
        let mut episode_seeds = stream(train_seed, EPISODE_SEED_STREAM);
        let mut rng = stream(train_seed, POLICY_STREAM);
        for _ in 0..share(config.training_episodes) {
            play_episode(&mut env, &mut policies, &mut rng, episode_seeds.next_u64(), true).map_err(attribute)?;
        }
        for p in &mut policies {
            p.set_greedy(true);
        }
    }

    let instance_seed = config.instance_seed(seed, instance);
    let mut episode_seeds = stream(instance_seed, EPISODE_SEED_STREAM);
    let mut rng = stream(instance_seed, POLICY_STREAM);
    let learn = learner && config.mode == RunMode::Train;
    let mut out = UnitOutput {
        records: Vec::new(),
        traces: Vec::new(),
    };
    for episode in (instance..config.episodes).step_by(config.instances as usize) {
        let episode_seed = episode_seeds.next_u64();
        let mut log = play_episode(&mut env, &mut policies, &mut rng, episode_seed, learn).map_err(attribute)?;
        out.records.push(EpisodeRecord {
            seed,
            instance,
            instance_seed,
            episode,
            episode_seed,
            report: episode_report(&log).expect("episode played to the horizon"),
        });
        if !config.trace {
            // keep only the actions for the policy distribution
            for day in &mut log.days {
                day.passengers.clear();
                day.sales.clear();
            }
        }
        out.traces.push(log);
    }
    Ok(out)
}

fn episode_metrics(report: &EpisodeReport) -> Vec<(String, Option<f64>)> {
    let mut m = vec![
        ("total_profit".to_string(), Some(report.total_profit.to_f64())),
        ("equality".to_string(), report.equality),
        ("percent_travelling".to_string(), Some(report.percent_travelling)),
        ("mean_traveller_utility".to_string(), report.mean_traveller_utility),
        ("mean_passenger_utility".to_string(), report.mean_passenger_utility),
        ("passengers".to_string(), Some(f64::from(report.passengers))),
    ];
    for (agent, p) in &report.profit {
        m.push((format!("profit.{agent}"), Some(p.to_f64())));
    }
    for (ptype, pct) in &report.percent_travelling_by_type {
        m.push((format!("percent_travelling.{ptype}"), Some(*pct)));
    }
    m
}

fn summarise(scenario: &Scenario, config: &RunConfig, records: &[EpisodeRecord]) -> RunSummary {
    let mut per_seed = Vec::new();
    let mut across: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for &seed in &config.seeds {
        let mine: Vec<_> = records.iter().filter(|r| r.seed == seed).collect();
        let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &mine {
            for (name, v) in episode_metrics(&r.report) {
                let entry = values.entry(name).or_default();
                entry.extend(v);
            }
        }
        let metrics: BTreeMap<String, f64> = values
            .into_iter()
            .filter_map(|(k, v)| Stat::of(&v).map(|s| (k, s.mean)))
            .collect();
        for (k, v) in &metrics {
            across.entry(k.clone()).or_default().push(*v);
        }
        per_seed.push(SeedMeans {
            seed,
            episodes: mine.len(),
            metrics,
        });
    }
    RunSummary {
        scenario: scenario.name.clone(),
        mode: config.mode,
        per_seed,
        metrics: across
            .into_iter()
            .filter_map(|(k, v)| Stat::of(&v).map(|s| (k, s)))
            .collect(),
        policy_distribution: None,
    }
}

/// Executes the configured episodes.
pub fn run(scenario: &Scenario, config: &RunConfig) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let scenario = Arc::new(scenario.clone());
    let units: Vec<(u64, u32)> = config
        .seeds
        .iter()
        .flat_map(|&s| (0..config.instances).map(move |r| (s, r)))
        .collect();
    let outputs: Vec<Result<UnitOutput, HarnessError>> = if config.sequential {
        units.iter().map(|&(s, r)| run_unit(&scenario, config, s, r)).collect()
    } else {
        units.par_iter().map(|&(s, r)| run_unit(&scenario, config, s, r)).collect()
    };

    let mut records = Vec::new();
    let mut traces = Vec::new();
    for out in outputs {
        let out = out?;
        records.extend(out.records);
        traces.extend(out.traces);
    }
    records.sort_by_key(|r| (config.seeds.iter().position(|s| *s == r.seed), r.episode));

    let mut summary = summarise(&scenario, config, &records);
    if config.action_mode == ActionMode::Discrete {
        let env = Env::new(Arc::clone(&scenario), config.action_mode);
        summary.policy_distribution = log_policy_distribution(&env, &traces).ok();
    }
    if !config.trace {
        traces.clear();
    }
    Ok(RunOutput { records, summary, traces })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub scenario_name: String,
    pub scenario_digest: String,
    pub policy: String,
    pub config: RunConfig,
    /// Instance seeds per base seed.
    pub instance_seeds: BTreeMap<u64, Vec<u64>>,
    pub files: Vec<String>,
}

pub fn summary_table(summary: &RunSummary) -> String {
    let mut out = format!(
        "scenario {}  mode {:?}  seeds {}\n",
        summary.scenario,
        summary.mode,
        summary.per_seed.len()
    );
    let width = summary.metrics.keys().map(String::len).max().unwrap_or(6).max(6);
    out.push_str(&format!("{:<width$}  {:>14}  {:>12}\n", "metric", "mean", "sd"));
    for (name, stat) in &summary.metrics {
        out.push_str(&format!("{:<width$}  {:>14.4}  {:>12.4}\n", name, stat.mean, stat.sd));
    }
    if let Some(dist) = &summary.policy_distribution {
        out.push_str("\npolicy distribution (max-red / mod-red / none / mod-inc / max-inc)\n");
        for (agent, cells) in dist {
            for (cell, bins) in cells {
                let row: Vec<String> = bins.values().map(|f| format!("{f:.3}")).collect();
                out.push_str(&format!("{agent:<10} {cell:<24} {}\n", row.join("  ")));
            }
        }
    }
    out
}

fn write_file(dir: &Path, name: &str, content: &[u8]) -> Result<(), HarnessError> {
    let path = dir.join(name);
    fs::File::create(&path)
        .and_then(|mut f| f.write_all(content))
        .map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })
}

/// Writes results.jsonl, summary.json, summary.txt, scenario.toml,
/// manifest.json and, when traced, trace.jsonl.
pub fn write_outputs(
    dir: &Path,
    scenario: &Scenario,
    config: &RunConfig,
    policy_arg: &str,
    output: &RunOutput,
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let jsonl = |items: Vec<String>| items.into_iter().map(|l| l + "\n").collect::<String>();
    let mut files = vec!["results.jsonl", "summary.json", "summary.txt", "scenario.toml"];
    write_file(
        dir,
        "results.jsonl",
        jsonl(output.records.iter().map(|r| serde_json::to_string(r).expect("serialisable")).collect()).as_bytes(),
    )?;
    write_file(
        dir,
        "summary.json",
        serde_json::to_string_pretty(&output.summary).expect("serialisable").as_bytes(),
    )?;
    write_file(dir, "summary.txt", summary_table(&output.summary).as_bytes())?;
    write_file(dir, "scenario.toml", scenario.to_toml_string().as_bytes())?;
    if !output.traces.is_empty() {
        files.push("trace.jsonl");
        write_file(
            dir,
            "trace.jsonl",
            jsonl(output.traces.iter().map(|t| serde_json::to_string(t).expect("serialisable")).collect()).as_bytes(),
        )?;
    }
    files.push("manifest.json");
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_name: scenario.name.clone(),
        scenario_digest: scenario.digest(),
        policy: policy_arg.to_string(),
        config: config.clone(),
        instance_seeds: config
            .seeds
            .iter()
            .map(|&s| (s, (0..config.instances).map(|r| config.instance_seed(s, r)).collect()))
            .collect(),
        files: files.iter().map(|f| f.to_string()).collect(),
    };
    write_file(
        dir,
        "manifest.json",
        serde_json::to_string_pretty(&manifest).expect("serialisable").as_bytes(),
    )
}
