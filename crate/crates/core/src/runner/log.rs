//! Replay logs: one JSON object per line.
//!
//! ```text
//! {"type":"header","version":1,"map":"...","seed":7,"steps":400,"params":{...}}
//! {"type":"step","step":1,"actions":[[0,"E"],[1,"Stay"]],"cows":[[0,8,8],...],"fences":[false],"scores":[0,0],"hash":"9ae1..."}
//! ...
//! {"type":"result","steps":400,"scores":[5,0],"captures":[...],"crashed":[]}
//! ```
//!
//! `step` is the world's step count after applying `actions`, and `hash` the
//! state hash at that point. A log without its result line is malformed.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Params;
use crate::world::{Action, AgentId, CowId, MapError, TeamId, WorldState};

pub const LOG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capture {
    pub step: u64,
    pub cow: CowId,
    pub team: TeamId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Header {
        version: u32,
        map: String,
        seed: u64,
        steps: u64,
        params: Params,
    },
    Step {
        step: u64,
        /// `(agent, action code)` for every agent, ascending id.
        actions: Vec<(AgentId, String)>,
        /// `(cow, x, y)` for every cow still on the board, ascending id.
        cows: Vec<(CowId, i32, i32)>,
        fences: Vec<bool>,
        scores: [u32; 2],
        hash: String,
    },
    Result {
        steps: u64,
        scores: [u32; 2],
        captures: Vec<Capture>,
        crashed: Vec<TeamId>,
    },
}

impl LogRecord {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("log records always serialize");
        s.push('\n');
        s
    }

    /// The step record describing `world` right after `actions` were applied.
    pub fn step_of(world: &WorldState, actions: &BTreeMap<AgentId, Action>) -> Self {
        LogRecord::Step {
            step: world.step_count(),
            actions: actions
                .iter()
                .map(|(&a, act)| (a, act.code().to_string()))
                .collect(),
            cows: world.cows().iter().map(|(&c, p)| (c, p.x, p.y)).collect(),
            fences: world.fences().values().map(|f| f.open).collect(),
            scores: [world.score(TeamId::ONE), world.score(TeamId::TWO)],
            hash: format_hash(world.state_hash()),
        }
    }
}

pub fn format_hash(h: u64) -> String {
    format!("{h:016x}")
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("cannot read log: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed log at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("map in log header does not load: {0}")]
    Map(#[from] MapError),
    #[error("step {requested} is past the end of the log (last step {last})")]
    StepOutOfRange { requested: u64, last: u64 },
}

fn malformed(line: usize, reason: impl Into<String>) -> LogError {
    LogError::Malformed {
        line,
        reason: reason.into(),
    }
}

/// A parsed, structurally complete log.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayLog {
    pub map: String,
    pub seed: u64,
    pub steps: u64,
    pub params: Params,
    pub records: Vec<StepRecord>,
    pub result: LogRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub actions: BTreeMap<AgentId, Action>,
    pub hash: String,
}

impl ReplayLog {
    pub fn read(path: &Path) -> Result<Self, LogError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, LogError> {
        if !text.is_empty() && !text.ends_with('\n') {
            return Err(malformed(
                text.lines().count(),
                "last line is not terminated",
            ));
        }
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let parse = |n: usize, l: &str| -> Result<LogRecord, LogError> {
            serde_json::from_str(l).map_err(|e| malformed(n, e.to_string()))
        };
        let Some((n, first)) = lines.next() else {
            return Err(malformed(1, "empty log"));
        };
        let LogRecord::Header {
            version,
            map,
            seed,
            steps,
            params,
        } = parse(n, first)?
        else {
            return Err(malformed(n, "first line is not a header"));
        };
        if version != LOG_VERSION {
            return Err(malformed(n, format!("unsupported version {version}")));
        }
        let mut records = Vec::new();
        let mut result = None;
        for (n, l) in lines {
            if result.is_some() {
                return Err(malformed(n, "records after the result line"));
            }
            match parse(n, l)? {
                LogRecord::Step {
                    step,
                    actions,
                    hash,
                    ..
                } => {
                    if step != records.len() as u64 + 1 {
                        return Err(malformed(
                            n,
                            format!("expected step {}, found {step}", records.len() + 1),
                        ));
                    }
                    let actions = actions
                        .into_iter()
                        .map(|(a, code)| {
                            Action::from_code(&code)
                                .map(|act| (a, act))
                                .ok_or_else(|| malformed(n, format!("unknown action `{code}`")))
                        })
                        .collect::<Result<_, _>>()?;
                    records.push(StepRecord {
                        step,
                        actions,
                        hash,
                    });
                }
                r @ LogRecord::Result { .. } => result = Some(r),
                LogRecord::Header { .. } => return Err(malformed(n, "second header")),
            }
        }
        let result =
            result.ok_or_else(|| malformed(text.lines().count(), "missing result line"))?;
        Ok(Self {
            map,
            seed,
            steps,
            params,
            records,
            result,
        })
    }

    pub fn initial_world(&self) -> Result<WorldState, LogError> {
        Ok(WorldState::new(&self.map, self.seed, &self.params)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// First step whose recorded hash disagrees with the re-simulation.
    Mismatch {
        step: u64,
    },
}

/// Re-simulates a log from its header and recorded actions, checking every hash.
pub fn replay_verify(path: &Path) -> Result<Verdict, LogError> {
    verify_log(&ReplayLog::read(path)?)
}

pub fn verify_log(log: &ReplayLog) -> Result<Verdict, LogError> {
    let mut world = log.initial_world()?;
    for r in &log.records {
        if world.step(&r.actions).is_err() {
            return Ok(Verdict::Mismatch { step: r.step });
        }
        if format_hash(world.state_hash()) != r.hash {
            return Ok(Verdict::Mismatch { step: r.step });
        }
    }
    Ok(Verdict::Ok)
}

/// The board after `step` recorded steps (0 is the initial position).
pub fn render_step(log: &ReplayLog, step: u64) -> Result<String, LogError> {
    let last = log.records.len() as u64;
    if step > last {
        return Err(LogError::StepOutOfRange {
            requested: step,
            last,
        });
    }
    let mut world = log.initial_world()?;
    for r in &log.records[..step as usize] {
        world
            .step(&r.actions)
            .map_err(|e| malformed(r.step as usize + 1, e.to_string()))?;
    }
    Ok(world.render())
}
