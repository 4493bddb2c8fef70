//! Line-delimited JSON protocol for driving environments remotely.
//!
//! Every request and reply is one JSON object on one line (at most
//! [`MAX_LINE_BYTES`] bytes). Requests carry a `type`; all but `hello` name a
//! `session`. Numbers use the shortest decimal that round-trips to the same
//! binary64 value, so replies are bit-exact against in-process runs.
//!
//! | request | fields | reply fields |
//! |---------|--------|--------------|
//! | `hello` | `protocol_version?`, `mode?` | `session`, `scenario`, `agents`, `action_mode`, `spaces` |
//! | `spaces` | `session` | `agents`, `action_mode`, `spaces` |
//! | `reset` | `session`, `seed` | `observations` |
//! | `step` | `session`, `actions: {agent: [numbers]}` | `observations`, `rewards`, `terminal`, `info` |
//! | `close` | `session` | - |
//!
//! Replies carry `type` (the request type, or `error`) and
//! `protocol_version`; a request's optional `request_id` is echoed. Error
//! replies hold `code` (`malformed_request`, `version_mismatch`,
//! `unknown_session`, `wrong_phase`, `malformed_action`, `message_too_long`),
//! `message`, and `agent` when an action is at fault.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::env::{ActionMode, AgentAction, Env, EnvError, JointAction};
use crate::scenario::Scenario;

pub const PROTOCOL_VERSION: u32 = 1;
pub const MAX_LINE_BYTES: usize = 1 << 20;

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum Request {
    Hello {
        #[serde(default)]
        protocol_version: Option<u32>,
        #[serde(default)]
        mode: Option<ActionMode>,
    },
    Spaces {
        session: u64,
    },
    Reset {
        session: u64,
        seed: u64,
    },
    Step {
        session: u64,
        actions: BTreeMap<String, Vec<f64>>,
    },
    Close {
        session: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    MalformedRequest,
    VersionMismatch,
    UnknownSession,
    WrongPhase,
    MalformedAction,
    MessageTooLong,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::MalformedRequest => "malformed_request",
            ErrorCode::VersionMismatch => "version_mismatch",
            ErrorCode::UnknownSession => "unknown_session",
            ErrorCode::WrongPhase => "wrong_phase",
            ErrorCode::MalformedAction => "malformed_action",
            ErrorCode::MessageTooLong => "message_too_long",
        }
    }
}

fn error_reply(code: ErrorCode, message: impl Into<String>, agent: Option<&str>) -> Value {
    let mut v = json!({ "type": "error", "code": code.as_str(), "message": message.into() });
    if let Some(agent) = agent {
        v["agent"] = json!(agent);
    }
    v
}

fn finish(mut reply: Value, request_id: Option<Value>) -> Value {
    reply["protocol_version"] = json!(PROTOCOL_VERSION);
    if let Some(id) = request_id {
        reply["request_id"] = id;
    }
    reply
}

/// Shared server state: the scenario and the live sessions.
pub struct Server {
    scenario: Arc<Scenario>,
    default_mode: ActionMode,
    sessions: Mutex<HashMap<u64, Arc<Mutex<Env>>>>,
    next_session: AtomicU64,
}

/// Sessions opened on one connection; closed when the connection ends.
#[derive(Debug, Default)]
pub struct Connection {
    sessions: Vec<u64>,
}

impl Server {
    pub fn new(scenario: Scenario, default_mode: ActionMode) -> Self {
        Server {
            scenario: Arc::new(scenario),
            default_mode,
            sessions: Mutex::new(HashMap::new()),
            next_session: AtomicU64::new(1),
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map").len()
    }

    fn session(&self, id: u64) -> Result<Arc<Mutex<Env>>, Value> {
        self.sessions
            .lock()
            .expect("session map")
            .get(&id)
            .cloned()
            .ok_or_else(|| error_reply(ErrorCode::UnknownSession, format!("no session {id}"), None))
    }

    fn spaces(env: &Env) -> Value {
        let agents = env.agent_ids();
        let spaces: Map<String, Value> = agents
            .iter()
            .map(|a| {
                (
                    a.clone(),
                    json!({
                        "action": env.action_space(a).expect("known agent"),
                        "observation": env.observation_space(a).expect("known agent"),
                    }),
                )
            })
            .collect();
        json!({ "agents": agents, "action_mode": env.mode(), "spaces": spaces })
    }

    /// Handles one request line and returns the reply.
    pub fn handle_line(&self, line: &str, conn: &mut Connection) -> Value {
        let raw: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return finish(error_reply(ErrorCode::MalformedRequest, e.to_string(), None), None),
        };
        let request_id = raw.as_object().and_then(|o| o.get("request_id")).cloned();
        let mut raw = raw;
        if let Some(o) = raw.as_object_mut() {
            o.remove("request_id");
        }
        let request: Request = match serde_json::from_value(raw) {
            Ok(r) => r,
            Err(e) => return finish(error_reply(ErrorCode::MalformedRequest, e.to_string(), None), request_id),
        };
        let reply = self.dispatch(request, conn).unwrap_or_else(|e| e);
        finish(reply, request_id)
    }

    fn dispatch(&self, request: Request, conn: &mut Connection) -> Result<Value, Value> {
        match request {
            Request::Hello { protocol_version, mode, .. } => {
                if let Some(v) = protocol_version.filter(|v| *v != PROTOCOL_VERSION) {
                    return Err(error_reply(
                        ErrorCode::VersionMismatch,
                        format!("client speaks version {v}, server speaks {PROTOCOL_VERSION}"),
                        None,
                    ));
                }
                let env = Env::new(Arc::clone(&self.scenario), mode.unwrap_or(self.default_mode));
                let mut reply = Self::spaces(&env);
                let id = self.next_session.fetch_add(1, Ordering::Relaxed);
                self.sessions
                    .lock()
                    .expect("session map")
                    .insert(id, Arc::new(Mutex::new(env)));
                conn.sessions.push(id);
                reply["type"] = json!("hello");
                reply["session"] = json!(id);
                reply["scenario"] = json!(self.scenario.name);
                Ok(reply)
            }
            Request::Spaces { session, .. } => {
                let env = self.session(session)?;
                let mut reply = Self::spaces(&env.lock().expect("session"));
                reply["type"] = json!("spaces");
                Ok(reply)
            }
            Request::Reset { session, seed, .. } => {
                let env = self.session(session)?;
                let observations = env.lock().expect("session").reset(seed);
                Ok(json!({ "type": "reset", "observations": observations }))
            }
            Request::Step { session, actions, .. } => {
                let env = self.session(session)?;
                let mut env = env.lock().expect("session");
                let mode = env.mode();
                let mut joint = JointAction::new();
                for (agent, values) in actions {
                    let action = AgentAction::from_values(mode, &values)
                        .map_err(|m| error_reply(ErrorCode::MalformedAction, m, Some(&agent)))?;
                    joint.insert(agent, action);
                }
                match env.step(&joint) {
                    Ok(result) => {
                        let mut reply = serde_json::to_value(&result).expect("serialisable");
                        reply["type"] = json!("step");
                        Ok(reply)
                    }
                    Err(e @ (EnvError::NotReset | EnvError::AlreadyTerminal(_))) => {
                        Err(error_reply(ErrorCode::WrongPhase, e.to_string(), None))
                    }
                    Err(e @ EnvError::MalformedAction { .. }) => {
                        let EnvError::MalformedAction { agent, .. } = &e else { unreachable!() };
                        Err(error_reply(ErrorCode::MalformedAction, e.to_string(), Some(agent)))
                    }
                    Err(e @ EnvError::UnknownAgent(_)) => Err(error_reply(ErrorCode::MalformedAction, e.to_string(), None)),
                }
            }
            Request::Close { session, .. } => {
                self.session(session)?;
                self.sessions.lock().expect("session map").remove(&session);
                conn.sessions.retain(|s| *s != session);
                Ok(json!({ "type": "close", "session": session }))
            }
        }
    }

    /// Drops every session a finished connection still owns.
    pub fn disconnect(&self, conn: Connection) {
        let mut sessions = self.sessions.lock().expect("session map");
        for id in conn.sessions {
            sessions.remove(&id);
        }
    }

    /// Serves one request stream until end of input or a transport error.
    pub fn serve_stream<R: Read, W: Write>(&self, reader: R, mut writer: W) -> io::Result<()> {
        let mut reader = BufReader::new(reader);
        let mut conn = Connection::default();
        let result = (|| loop {
            let reply = match read_line_capped(&mut reader)? {
                Line::Eof => return Ok(()),
                Line::TooLong => finish(
                    error_reply(
                        ErrorCode::MessageTooLong,
                        format!("request exceeds {MAX_LINE_BYTES} bytes"),
                        None,
                    ),
                    None,
                ),
                Line::Text(text) if text.trim().is_empty() => continue,
                Line::Text(text) => self.handle_line(&text, &mut conn),
            };
            let mut bytes = serde_json::to_vec(&reply).expect("serialisable");
            bytes.push(b'\n');
            writer.write_all(&bytes)?;
            writer.flush()?;
        })();
        self.disconnect(conn);
        result
    }
}

enum Line {
    Eof,
    TooLong,
    Text(String),
}

fn read_line_capped<R: BufRead>(reader: &mut R) -> io::Result<Line> {
    let mut buf = Vec::new();
    let n = reader.by_ref().take(MAX_LINE_BYTES as u64 + 1).read_until(b'\n', &mut buf)?;
    if n == 0 {
        return Ok(Line::Eof);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
    } else if buf.len() > MAX_LINE_BYTES {
        // skip the rest of the oversized line
        let mut rest = Vec::new();
        reader.read_until(b'\n', &mut rest)?;
        return Ok(Line::TooLong);
    }
    match String::from_utf8(buf) {
        Ok(s) => Ok(Line::Text(s)),
        Err(_) => Ok(Line::Text("\u{0}".into())),
    }
}

/// Serves requests on standard input/output.
pub fn serve_stdio(server: &Server) -> io::Result<()> {
    server.serve_stream(io::stdin().lock(), io::stdout().lock())
}

/// Accepts TCP connections, one thread each, until the listener fails.
pub fn serve_tcp(server: Arc<Server>, listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let server = Arc::clone(&server);
        thread::spawn(move || {
            let _ = serve_connection(&server, stream);
        });
    }
    Ok(())
}

fn serve_connection(server: &Server, stream: TcpStream) -> io::Result<()> {
    let reader = stream.try_clone()?;
    server.serve_stream(reader, stream)
}
