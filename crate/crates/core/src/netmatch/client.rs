use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};

use super::{AgentAction, NetError, ProtocolMessage};
use crate::agents::HerderTeam;
use crate::config::Params;
use crate::world::{Action, AgentId, Percept, TeamId};

/// A connected, welcomed team client.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    pub team: TeamId,
    pub agents: Vec<AgentId>,
    pub width: i32,
    pub height: i32,
    pub r_fov: i32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClientSummary {
    pub turns: u64,
    /// Final scores, if the server sent them before closing.
    pub scores: Option<[u32; 2]>,
    /// `(code, text)` of every error the server reported.
    pub errors: Vec<(String, String)>,
}

impl Client {
    pub fn connect(
        addr: impl ToSocketAddrs,
        team: TeamId,
        token: Option<String>,
    ) -> Result<Self, NetError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut writer = stream.try_clone()?;
        let mut reader = BufReader::new(stream);
        writer.write_all(ProtocolMessage::Hello { team, token }.to_line().as_bytes())?;
        match read_message(&mut reader)? {
            ProtocolMessage::Welcome {
                team,
                agents,
                width,
                height,
                r_fov,
            } => Ok(Self {
                reader,
                writer,
                team,
                agents,
                width,
                height,
                r_fov,
            }),
            ProtocolMessage::Error { code, text } => {
                Err(NetError::Rejected(format!("{code}: {text}")))
            }
            other => Err(NetError::Protocol(format!(
                "expected welcome, got {other:?}"
            ))),
        }
    }

    /// Answers every percept with `decide` until the server sends the result
    /// or hangs up.
    pub fn play<F>(mut self, mut decide: F) -> Result<ClientSummary, NetError>
    where
        F: FnMut(u64, &BTreeMap<AgentId, Percept>) -> BTreeMap<AgentId, Action>,
    {
        let mut summary = ClientSummary::default();
        loop {
            let msg = match read_message(&mut self.reader) {
                Ok(m) => m,
                Err(NetError::Closed) => return Ok(summary),
                Err(e) => return Err(e),
            };
            match msg {
                ProtocolMessage::Percept { step, percepts, .. } => {
                    let percepts: BTreeMap<AgentId, Percept> =
                        percepts.into_iter().map(|p| (p.agent, p)).collect();
                    let actions = decide(step, &percepts)
                        .into_iter()
                        .map(|(agent, act)| AgentAction {
                            agent,
                            action: act.code().to_string(),
                        })
                        .collect();
                    let reply = ProtocolMessage::Act { step, actions }.to_line();
                    if self.writer.write_all(reply.as_bytes()).is_err() {
                        return Ok(summary);
                    }
                    summary.turns += 1;
                }
                ProtocolMessage::Result { scores } => {
                    summary.scores = Some(scores);
                    return Ok(summary);
                }
                ProtocolMessage::Error { code, text } => summary.errors.push((code, text)),
                other => return Err(NetError::Protocol(format!("unexpected {other:?}"))),
            }
        }
    }

    /// Plays with the built-in herder team, built from the first percept.
    pub fn play_herders(self, params: &Params) -> Result<ClientSummary, NetError> {
        let (team, w, h, r) = (self.team, self.width, self.height, self.r_fov);
        let params = params.clone();
        let mut herders: Option<HerderTeam> = None;
        self.play(move |_, percepts| {
            let t = herders.get_or_insert_with(|| {
                let starts: Vec<_> = percepts.iter().map(|(&a, p)| (a, p.pos)).collect();
                HerderTeam::new(team, &starts, w, h, r, &params)
            });
            t.decide(percepts)
        })
    }
}

fn read_message(reader: &mut BufReader<TcpStream>) -> Result<ProtocolMessage, NetError> {
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(NetError::Closed);
        }
        if !line.trim().is_empty() {
            return serde_json::from_str(&line).map_err(|e| NetError::Protocol(e.to_string()));
        }
    }
}
