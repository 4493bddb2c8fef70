//! C ABI over the pricing environment.
//!
//! Environments are opaque `RpEnv` handles created by `rp_env_new_*` and
//! released with `rp_env_free`. Every fallible call returns an `RpStatus`;
//! on failure `rp_last_error_message` describes the error for the calling
//! thread. Strings returned by the library must be released with
//! `rp_string_free`. A handle must not be used from two threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use railpricing::env::{ActionMode, AgentAction, Env, EnvError, JointAction};
use railpricing::metrics::{self, MetricsError};
use railpricing::scenario::{self, Scenario};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ScenarioError = 3,
    NotReset = 4,
    EpisodeTerminal = 5,
    MalformedAction = 6,
    BufferTooSmall = 7,
    DegenerateInput = 8,
    Panic = 9,
}

/// Opaque environment handle.
pub struct RpEnv {
    env: Env,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).expect("nul bytes removed"));
}

fn fail(status: RpStatus, message: impl Into<String>) -> RpStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> RpStatus) -> RpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(RpStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, RpStatus> {
    if p.is_null() {
        return Err(fail(RpStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn mode(discrete: c_int) -> ActionMode {
    if discrete != 0 {
        ActionMode::Discrete
    } else {
        ActionMode::Continuous
    }
}

unsafe fn create(scenario: Result<Scenario, scenario::ScenarioError>, discrete: c_int, out: *mut *mut RpEnv) -> RpStatus {
    match scenario {
        Ok(s) => {
            *out = Box::into_raw(Box::new(RpEnv {
                env: Env::new(s, mode(discrete)),
            }));
            RpStatus::Ok
        }
        Err(e) => fail(RpStatus::ScenarioError, e.to_string()),
    }
}

/// Creates an environment from a preset name (`business`,
/// `business_student`). `discrete` selects the eleven-level action mode.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_env_new_preset(name: *const c_char, discrete: c_int, out: *mut *mut RpEnv) -> RpStatus {
    guard(|| {
        if out.is_null() {
            return fail(RpStatus::NullPointer, "out is null");
        }
        let name = match str_arg(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        create(scenario::preset(name), discrete, out)
    })
}

/// Creates an environment from a scenario TOML document.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_env_new_from_toml(toml: *const c_char, discrete: c_int, out: *mut *mut RpEnv) -> RpStatus {
    guard(|| {
        if out.is_null() {
            return fail(RpStatus::NullPointer, "out is null");
        }
        let doc = match str_arg(toml, "toml") {
            Ok(d) => d,
            Err(s) => return s,
        };
        create(scenario::load_scenario(doc), discrete, out)
    })
}

/// Releases an environment. Null is ignored.
///
/// # Safety
/// `env` must come from `rp_env_new_*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rp_env_free(env: *mut RpEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

unsafe fn env_ref<'a>(env: *const RpEnv) -> Result<&'a RpEnv, RpStatus> {
    env.as_ref().ok_or_else(|| fail(RpStatus::NullPointer, "env is null"))
}

unsafe fn env_mut<'a>(env: *mut RpEnv) -> Result<&'a mut RpEnv, RpStatus> {
    env.as_mut().ok_or_else(|| fail(RpStatus::NullPointer, "env is null"))
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Number of agents.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_env_agent_count(env: *const RpEnv, out: *mut usize) -> RpStatus {
    guard(|| {
        let env = try_status!(env_ref(env));
        if out.is_null() {
            return fail(RpStatus::NullPointer, "out is null");
        }
        *out = env.env.scenario().agents.len();
        RpStatus::Ok
    })
}

/// Action length of agent `agent` (scenario order).
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_env_action_dim(env: *const RpEnv, agent: usize, out: *mut usize) -> RpStatus {
    guard(|| {
        let env = try_status!(env_ref(env));
        if out.is_null() {
            return fail(RpStatus::NullPointer, "out is null");
        }
        if agent >= env.env.scenario().agents.len() {
            return fail(RpStatus::InvalidArgument, format!("no agent #{agent}"));
        }
        *out = env.env.agent_cells(agent).len();
        RpStatus::Ok
    })
}

/// Starts a new episode.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rp_env_reset(env: *mut RpEnv, seed: u64) -> RpStatus {
    guard(|| {
        let env = try_status!(env_mut(env));
        env.env.reset(seed);
        RpStatus::Ok
    })
}

/// Current day, 0 after reset.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_env_day(env: *const RpEnv, out: *mut u32) -> RpStatus {
    guard(|| {
        let env = try_status!(env_ref(env));
        if out.is_null() {
            return fail(RpStatus::NullPointer, "out is null");
        }
        match env.env.day() {
            Some(d) => {
                *out = d;
                RpStatus::Ok
            }
            None => fail(RpStatus::NotReset, "environment has not been reset"),
        }
    })
}

/// Advances one day. `actions` holds every agent's action concatenated in
/// agent order (`rp_env_action_dim` values each; level numbers in discrete
/// mode). Rewards are written per agent to `rewards`, which must hold
/// `rewards_len >= agent count` values.
///
/// # Safety
/// Pointers must be valid for the given lengths; `terminal` may be null.
#[no_mangle]
pub unsafe extern "C" fn rp_env_step(
    env: *mut RpEnv,
    actions: *const f64,
    actions_len: usize,
    rewards: *mut f64,
    rewards_len: usize,
    terminal: *mut c_int,
) -> RpStatus {
    guard(|| {
        let env = try_status!(env_mut(env));
        if (actions.is_null() && actions_len > 0) || rewards.is_null() {
            return fail(RpStatus::NullPointer, "actions or rewards is null");
        }
        let agents = env.env.agent_ids();
        if rewards_len < agents.len() {
            return fail(
                RpStatus::BufferTooSmall,
                format!("rewards needs {} slots", agents.len()),
            );
        }
        let values = if actions_len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(actions, actions_len)
        };
        let dims: Vec<usize> = (0..agents.len()).map(|a| env.env.agent_cells(a).len()).collect();
        let needed: usize = dims.iter().sum();
        if values.len() != needed {
            return fail(
                RpStatus::MalformedAction,
                format!("expected {needed} action values, got {}", values.len()),
            );
        }
        let mut joint = JointAction::new();
        let mut offset = 0;
        for (agent, dim) in agents.iter().zip(&dims) {
            let slice = &values[offset..offset + dim];
            offset += dim;
            match AgentAction::from_values(env.env.mode(), slice) {
                Ok(a) => joint.insert(agent.clone(), a),
                Err(m) => return fail(RpStatus::MalformedAction, format!("{agent}: {m}")),
            };
        }
        match env.env.step(&joint) {
            Ok(result) => {
                let out = std::slice::from_raw_parts_mut(rewards, agents.len());
                for (slot, agent) in out.iter_mut().zip(&agents) {
                    *slot = result.rewards[agent].to_f64();
                }
                if !terminal.is_null() {
                    *terminal = c_int::from(result.terminal);
                }
                RpStatus::Ok
            }
            Err(e @ EnvError::NotReset) => fail(RpStatus::NotReset, e.to_string()),
            Err(e @ EnvError::AlreadyTerminal(_)) => fail(RpStatus::EpisodeTerminal, e.to_string()),
            Err(e) => fail(RpStatus::MalformedAction, e.to_string()),
        }
    })
}

/// Agent `agent`'s current observation as a JSON string. Release it with
/// `rp_string_free`.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_env_observation_json(env: *const RpEnv, agent: usize, out: *mut *mut c_char) -> RpStatus {
    guard(|| {
        let env = try_status!(env_ref(env));
        if out.is_null() {
            return fail(RpStatus::NullPointer, "out is null");
        }
        let Some(id) = env.env.scenario().agents.get(agent).map(|a| a.id.clone()) else {
            return fail(RpStatus::InvalidArgument, format!("no agent #{agent}"));
        };
        match env.env.observation(&id) {
            Ok(obs) => {
                let json = serde_json::to_string(&obs).expect("serialisable");
                *out = CString::new(json).expect("JSON has no NUL").into_raw();
                RpStatus::Ok
            }
            Err(e) => fail(RpStatus::NotReset, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn rp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Profit equality of `n` nonnegative profits.
///
/// # Safety
/// `profits` must point to `n` values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_metrics_equality(profits: *const f64, n: usize, out: *mut f64) -> RpStatus {
    guard(|| {
        if out.is_null() || (profits.is_null() && n > 0) {
            return fail(RpStatus::NullPointer, "profits or out is null");
        }
        let values = if n == 0 { &[][..] } else { std::slice::from_raw_parts(profits, n) };
        match metrics::equality(values) {
            Ok(e) => {
                *out = e;
                RpStatus::Ok
            }
            Err(e @ MetricsError::DegenerateInput) => fail(RpStatus::DegenerateInput, e.to_string()),
            Err(e) => fail(RpStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
