//! Headless matches: wiring the world to two team controllers, writing the
//! replay log, and checking logs after the fact.

mod controllers;
mod log;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

pub use controllers::{
    Controller, ControllerError, HerdersController, IdleController, RandomController,
};
pub use log::{
    format_hash, render_step, replay_verify, verify_log, Capture, LogError, LogRecord, ReplayLog,
    StepRecord, Verdict, LOG_VERSION,
};

use crate::config::{ParamError, Params};
use crate::netmatch::{NetController, NetError};
use crate::world::{Action, AgentId, Event, MapError, Percept, TeamId, WorldState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ControllerSpec {
    Herders,
    Random,
    Idle,
    /// A remote team connecting over TCP to this port.
    Net(u16),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bad controller spec `{0}` (expected builtin:herders, builtin:random, builtin:idle or net:PORT)")]
pub struct SpecError(pub String);

impl FromStr for ControllerSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        match s {
            "builtin:herders" => Ok(ControllerSpec::Herders),
            "builtin:random" => Ok(ControllerSpec::Random),
            "builtin:idle" => Ok(ControllerSpec::Idle),
            _ => s
                .strip_prefix("net:")
                .and_then(|p| p.parse().ok())
                .map(ControllerSpec::Net)
                .ok_or_else(|| SpecError(s.to_string())),
        }
    }
}

impl fmt::Display for ControllerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControllerSpec::Herders => f.write_str("builtin:herders"),
            ControllerSpec::Random => f.write_str("builtin:random"),
            ControllerSpec::Idle => f.write_str("builtin:idle"),
            ControllerSpec::Net(p) => write!(f, "net:{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchConfig {
    pub map_text: String,
    pub steps: u64,
    pub seed: u64,
    pub team1: ControllerSpec,
    pub team2: ControllerSpec,
    pub params: Params,
    pub log_path: Option<PathBuf>,
    /// Shared secret network clients must present; `None` accepts anyone.
    pub net_token: Option<String>,
    /// How long a network team has to connect and say hello.
    pub handshake_timeout: Duration,
}

impl MatchConfig {
    pub fn new(
        map_text: impl Into<String>,
        steps: u64,
        seed: u64,
        team1: ControllerSpec,
        team2: ControllerSpec,
    ) -> Self {
        Self {
            map_text: map_text.into(),
            steps,
            seed,
            team1,
            team2,
            params: Params::default(),
            log_path: None,
            net_token: None,
            handshake_timeout: Duration::from_secs(60),
        }
    }

    pub fn from_map_file(
        path: &Path,
        steps: u64,
        seed: u64,
        team1: ControllerSpec,
        team2: ControllerSpec,
    ) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::MapFile {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(Self::new(text, steps, seed, team1, team2))
    }

    pub fn spec(&self, team: TeamId) -> &ControllerSpec {
        if team == TeamId::ONE {
            &self.team1
        } else {
            &self.team2
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.steps == 0 {
            return Err(RunError::Config("steps must be at least 1".into()));
        }
        if let (ControllerSpec::Net(a), ControllerSpec::Net(b)) = (&self.team1, &self.team2) {
            if a == b {
                return Err(RunError::Config(format!("both teams bound to port {a}")));
            }
        }
        if !self.params.is_valid() {
            return Err(RunError::Config("a constant is out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read map {path}: {source}")]
    MapFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Param(ParamError),
    #[error("invalid match config: {0}")]
    Config(String),
    #[error("network team setup failed: {0}")]
    Net(#[from] NetError),
    #[error("cannot write log: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Problems detectable before the first step (exit code 1 on the command line).
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            RunError::MapFile { .. }
                | RunError::Map(_)
                | RunError::Spec(_)
                | RunError::Param(_)
                | RunError::Config(_)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub scores: BTreeMap<TeamId, u32>,
    pub steps: u64,
    pub captures: Vec<Capture>,
    /// Teams whose controller failed; they stood still from then on.
    pub crashed: Vec<TeamId>,
    /// The full replay log.
    pub log: String,
}

impl MatchResult {
    pub fn score(&self, team: TeamId) -> u32 {
        self.scores.get(&team).copied().unwrap_or(0)
    }
}

/// Builds the controllers named in `cfg` and plays the match.
pub fn run_match(cfg: &MatchConfig) -> Result<MatchResult, RunError> {
    cfg.validate()?;
    let world = WorldState::new(&cfg.map_text, cfg.seed, &cfg.params)?;
    let mut controllers: Vec<Box<dyn Controller>> = Vec::with_capacity(2);
    for team in [TeamId::ONE, TeamId::TWO] {
        controllers.push(match cfg.spec(team) {
            ControllerSpec::Herders => Box::new(HerdersController::new(&world, team, &cfg.params)),
            ControllerSpec::Random => Box::new(RandomController::new(cfg.seed, team)),
            ControllerSpec::Idle => Box::new(IdleController),
            ControllerSpec::Net(port) => {
                let listener =
                    std::net::TcpListener::bind(("0.0.0.0", *port)).map_err(NetError::Io)?;
                Box::new(NetController::accept(
                    listener,
                    team,
                    &world,
                    &cfg.params,
                    cfg.net_token.clone(),
                    cfg.handshake_timeout,
                )?)
            }
        });
    }
    let team2 = controllers.pop().expect("two controllers");
    let team1 = controllers.pop().expect("two controllers");
    run_with_controllers(cfg, team1, team2)
}

/// Plays a match with caller-supplied controllers; the specs in `cfg` are ignored.
pub fn run_with_controllers(
    cfg: &MatchConfig,
    mut team1: Box<dyn Controller>,
    mut team2: Box<dyn Controller>,
) -> Result<MatchResult, RunError> {
    cfg.validate()?;
    let mut world = WorldState::new(&cfg.map_text, cfg.seed, &cfg.params)?;
    let mut log = LogRecord::Header {
        version: LOG_VERSION,
        map: cfg.map_text.clone(),
        seed: cfg.seed,
        steps: cfg.steps,
        params: cfg.params.clone(),
    }
    .to_line();
    let had_cows = !world.cows().is_empty();
    let mut captures = Vec::new();
    let mut crashed: Vec<TeamId> = Vec::new();

    while world.step_count() < cfg.steps && !(had_cows && world.cows().is_empty()) {
        let mut actions: BTreeMap<AgentId, Action> = BTreeMap::new();
        for (team, ctl) in [(TeamId::ONE, &mut team1), (TeamId::TWO, &mut team2)] {
            let ids = world.team_agents(team);
            let stay = ids.iter().map(|&a| (a, Action::Stay));
            if crashed.contains(&team) {
                actions.extend(stay);
                continue;
            }
            let percepts: BTreeMap<AgentId, Percept> = ids
                .iter()
                .map(|&a| (a, world.percept(a).expect("team agent exists")))
                .collect();
            match ctl.decide(&world, &percepts) {
                Ok(chosen) => {
                    actions.extend(stay);
                    // Ignore anything addressed to agents outside the team.
                    actions.extend(chosen.into_iter().filter(|(a, _)| ids.contains(a)));
                }
                Err(_) => {
                    crashed.push(team);
                    actions.extend(stay);
                }
            }
        }
        let events = world
            .step(&actions)
            .expect("actions only name existing agents");
        for e in events {
            if let Event::Captured { cow, team, .. } = e {
                captures.push(Capture {
                    step: world.step_count(),
                    cow,
                    team,
                });
            }
        }
        log.push_str(&LogRecord::step_of(&world, &actions).to_line());
    }

    team1.finish(&world);
    team2.finish(&world);
    log.push_str(
        &LogRecord::Result {
            steps: world.step_count(),
            scores: [world.score(TeamId::ONE), world.score(TeamId::TWO)],
            captures: captures.clone(),
            crashed: crashed.clone(),
        }
        .to_line(),
    );
    if let Some(path) = &cfg.log_path {
        std::fs::write(path, &log)?;
    }
    Ok(MatchResult {
        scores: world.scores().clone(),
        steps: world.step_count(),
        captures,
        crashed,
        log,
    })
}

#[cfg(test)]
mod tests;
