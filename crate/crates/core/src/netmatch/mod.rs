//! Line-delimited JSON over TCP so a team can be played from another process.
//!
//! The server sends `percept` each turn and waits up to `deadline_ms` for the
//! matching `act`. Late, missing or invalid actions become `Stay`; a dropped
//! connection means `Stay` for the rest of the match. See `docs/protocol.md`.

mod client;

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use client::{Client, ClientSummary};

use crate::config::Params;
use crate::runner::{Controller, ControllerError};
use crate::world::{Action, AgentId, Percept, TeamId, WorldState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProtocolMessage {
    Hello {
        team: TeamId,
        #[serde(default)]
        token: Option<String>,
    },
    Welcome {
        team: TeamId,
        agents: Vec<AgentId>,
        width: i32,
        height: i32,
        r_fov: i32,
    },
    Percept {
        step: u64,
        /// One per agent of the team, ascending id.
        percepts: Vec<Percept>,
        deadline_ms: u64,
    },
    Act {
        step: u64,
        actions: Vec<AgentAction>,
    },
    Result {
        /// Team 1, team 2.
        scores: [u32; 2],
    },
    Error {
        code: String,
        text: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentAction {
    pub agent: AgentId,
    /// `N`, `NE`, `E`, `SE`, `S`, `SW`, `W`, `NW` or `Stay`.
    pub action: String,
}

impl ProtocolMessage {
    pub fn error(code: &str, text: impl Into<String>) -> Self {
        ProtocolMessage::Error {
            code: code.to_string(),
            text: text.into(),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("protocol messages always serialize");
        s.push('\n');
        s
    }
}

/// Error codes carried by `error` messages.
pub mod codes {
    pub const MALFORMED: &str = "malformed";
    pub const STALE_STEP: &str = "stale-step";
    pub const DUPLICATE_HELLO: &str = "duplicate-hello";
    pub const BAD_TOKEN: &str = "bad-token";
    pub const WRONG_TEAM: &str = "wrong-team";
    pub const BAD_ACTION: &str = "bad-action";
    pub const UNEXPECTED: &str = "unexpected";
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("network i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("no client completed the handshake within {0:?}")]
    HandshakeTimeout(Duration),
    #[error("handshake rejected: {0}")]
    Rejected(String),
    #[error("connection closed")]
    Closed,
    #[error("protocol violation: {0}")]
    Protocol(String),
}

enum Incoming {
    Msg(ProtocolMessage),
    Malformed(String),
    Closed,
}

/// Reads lines on its own thread and forwards them to the turn loop.
fn spawn_reader(stream: TcpStream) -> Receiver<Incoming> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let reader = BufReader::new(stream);
        for line in reader.lines() {
            let Ok(line) = line else { break };
            if line.trim().is_empty() {
                continue;
            }
            let item = match serde_json::from_str(&line) {
                Ok(m) => Incoming::Msg(m),
                Err(e) => Incoming::Malformed(e.to_string()),
            };
            if tx.send(item).is_err() {
                return;
            }
        }
        let _ = tx.send(Incoming::Closed);
    });
    rx
}

/// Server side of one network team.
pub struct NetController {
    team: TeamId,
    stream: TcpStream,
    inbox: Receiver<Incoming>,
    deadline: Duration,
    connected: bool,
}

impl NetController {
    /// Waits for one client on `listener` to say hello for `team`, then welcomes it.
    pub fn accept(
        listener: TcpListener,
        team: TeamId,
        world: &WorldState,
        params: &Params,
        token: Option<String>,
        timeout: Duration,
    ) -> Result<Self, NetError> {
        let give_up = Instant::now() + timeout;
        listener.set_nonblocking(true)?;
        let stream = loop {
            match listener.accept() {
                Ok((s, _)) => break s,
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    if Instant::now() >= give_up {
                        return Err(NetError::HandshakeTimeout(timeout));
                    }
                    thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(e.into()),
            }
        };
        drop(listener);
        stream.set_nonblocking(false)?;
        stream.set_nodelay(true)?;
        let deadline = Duration::from_millis(params.d_act_ms);
        stream.set_write_timeout(Some(deadline.max(Duration::from_millis(50))))?;
        let inbox = spawn_reader(stream.try_clone()?);
        let mut ctl = Self {
            team,
            stream,
            inbox,
            deadline,
            connected: true,
        };

        loop {
            let left = give_up.saturating_duration_since(Instant::now());
            let item = match ctl.inbox.recv_timeout(left) {
                Ok(item) => item,
                Err(RecvTimeoutError::Timeout) => return Err(NetError::HandshakeTimeout(timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err(NetError::Closed),
            };
            match item {
                Incoming::Msg(ProtocolMessage::Hello {
                    team: t,
                    token: given,
                }) => {
                    if t != team {
                        ctl.send(&ProtocolMessage::error(
                            codes::WRONG_TEAM,
                            format!("this port serves team {team}"),
                        ));
                        return Err(NetError::Rejected(format!("client asked for team {t}")));
                    }
                    if token.is_some() && given != token {
                        ctl.send(&ProtocolMessage::error(codes::BAD_TOKEN, "token mismatch"));
                        return Err(NetError::Rejected("bad token".into()));
                    }
                    break;
                }
                Incoming::Msg(_) => {
                    ctl.send(&ProtocolMessage::error(codes::UNEXPECTED, "expected hello"))
                }
                Incoming::Malformed(e) => ctl.send(&ProtocolMessage::error(codes::MALFORMED, e)),
                Incoming::Closed => return Err(NetError::Closed),
            }
        }
        ctl.send(&ProtocolMessage::Welcome {
            team,
            agents: world.team_agents(team),
            width: world.width(),
            height: world.height(),
            r_fov: world.r_fov(),
        });
        if !ctl.connected {
            return Err(NetError::Closed);
        }
        Ok(ctl)
    }

    pub fn team(&self) -> TeamId {
        self.team
    }

    pub fn connected(&self) -> bool {
        self.connected
    }

    fn send(&mut self, msg: &ProtocolMessage) {
        if !self.connected {
            return;
        }
        let ok = self
            .stream
            .write_all(msg.to_line().as_bytes())
            .and_then(|_| self.stream.flush());
        if ok.is_err() {
            self.connected = false;
        }
    }

    /// Handles one non-`act` message that arrived while waiting.
    fn handle_other(&mut self, item: Incoming) {
        match item {
            Incoming::Msg(ProtocolMessage::Hello { .. }) => self.send(&ProtocolMessage::error(
                codes::DUPLICATE_HELLO,
                "already joined",
            )),
            Incoming::Msg(ProtocolMessage::Act { step, .. }) => self.send(&ProtocolMessage::error(
                codes::STALE_STEP,
                format!("act for step {step} is not the pending step"),
            )),
            Incoming::Msg(_) => self.send(&ProtocolMessage::error(
                codes::UNEXPECTED,
                "unexpected message",
            )),
            Incoming::Malformed(e) => self.send(&ProtocolMessage::error(codes::MALFORMED, e)),
            Incoming::Closed => self.connected = false,
        }
    }

    fn translate(
        &mut self,
        agents: &[AgentId],
        given: Vec<AgentAction>,
    ) -> BTreeMap<AgentId, Action> {
        let mut out: BTreeMap<AgentId, Action> =
            agents.iter().map(|&a| (a, Action::Stay)).collect();
        for AgentAction {
            agent: a,
            action: code,
        } in given
        {
            match (out.contains_key(&a), Action::from_code(&code)) {
                (true, Some(act)) => {
                    out.insert(a, act);
                }
                (false, _) => self.send(&ProtocolMessage::error(
                    codes::BAD_ACTION,
                    format!("agent {a} is not yours"),
                )),
                (true, None) => self.send(&ProtocolMessage::error(
                    codes::BAD_ACTION,
                    format!("unknown action `{code}`"),
                )),
            }
        }
        out
    }
}

impl Controller for NetController {
    fn decide(
        &mut self,
        world: &WorldState,
        percepts: &BTreeMap<AgentId, Percept>,
    ) -> Result<BTreeMap<AgentId, Action>, ControllerError> {
        let agents: Vec<AgentId> = percepts.keys().copied().collect();
        let stay = || agents.iter().map(|&a| (a, Action::Stay)).collect();
        // Whatever arrived since the last turn is late by definition.
        while let Ok(item) = self.inbox.try_recv() {
            self.handle_other(item);
        }
        if !self.connected {
            return Ok(stay());
        }
        let step = world.step_count();
        let started = Instant::now();
        self.send(&ProtocolMessage::Percept {
            step,
            percepts: percepts.values().cloned().collect(),
            deadline_ms: self.deadline.as_millis() as u64,
        });
        while self.connected {
            let left = self.deadline.saturating_sub(started.elapsed());
            match self.inbox.recv_timeout(left) {
                Ok(Incoming::Msg(ProtocolMessage::Act { step: s, actions })) if s == step => {
                    return Ok(self.translate(&agents, actions));
                }
                Ok(item) => self.handle_other(item),
                Err(RecvTimeoutError::Timeout) => break,
                Err(RecvTimeoutError::Disconnected) => self.connected = false,
            }
        }
        Ok(stay())
    }

    fn finish(&mut self, world: &WorldState) {
        self.send(&ProtocolMessage::Result {
            scores: [world.score(TeamId::ONE), world.score(TeamId::TWO)],
        });
        let _ = self.stream.shutdown(Shutdown::Write);
    }
}

impl Drop for NetController {
    fn drop(&mut self) {
        let _ = self.stream.shutdown(Shutdown::Both);
    }
}
