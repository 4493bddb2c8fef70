//! Multi-agent dynamic pricing simulator for high-speed railway networks.
//!
//! Operators (agents) run scheduled services over a shared network and reprice
//! their seats once per simulated day. Passengers are drawn from a stochastic
//! demand model, enumerate valid journeys (possibly spanning several
//! operators), and choose the one with the highest random utility or opt out.
//! Each agent's reward is the day-over-day increase of its ticket revenue.
//!
//! The crate is organised bottom-up:
//!
//! * [`money`]: exact two-decimal currency.
//! * [`scenario`]: scenario files, validation and built-in presets.
//! * [`supply`]: service instances, seat inventory and prices.
//! * [`demand`]: daily passenger generation.
//! * [`journey`]: journey enumeration and validity.
//! * [`choice`]: random-utility evaluation and journey choice.
//! * [`env`]: the Markov game (reset/step, observations, rewards).
//! * [`agents`]: random, scripted and tabular Q-learning policies.
//! * [`metrics`]: equality, attention entropy, reward normalisation, reports.
//! * [`harness`]: seeded batch runner behind the CLI.
//! * [`protocol`]: line-delimited JSON server for external learners.

pub mod agents;
pub mod choice;
pub mod demand;
pub mod env;
pub mod harness;
pub mod journey;
pub mod metrics;
pub mod money;
pub mod protocol;
pub mod rng;
pub mod scenario;
pub mod supply;

pub use env::{ActionMode, AgentAction, AgentObservation, Env, EnvError, JointAction, StepResult};
pub use money::Money;
pub use scenario::{Scenario, ScenarioError};
