use std::collections::BTreeMap;

use super::{agent_act, normalize_inbox, AgentState, Message};
use crate::config::Params;
use crate::world::{Action, AgentId, Percept, Position, TeamId};

/// A whole herder team. Messages sent during one turn reach every other
/// teammate at the start of the next.
#[derive(Clone, Debug)]
pub struct HerderTeam {
    agents: BTreeMap<AgentId, AgentState>,
    inboxes: BTreeMap<AgentId, Vec<Message>>,
}

impl HerderTeam {
    pub fn new(
        team: TeamId,
        starts: &[(AgentId, Position)],
        width: i32,
        height: i32,
        r_fov: i32,
        params: &Params,
    ) -> Self {
        let roster: Vec<AgentId> = starts.iter().map(|s| s.0).collect();
        let agents = starts
            .iter()
            .map(|&(id, pos)| {
                (
                    id,
                    AgentState::new(id, &roster, team, width, height, r_fov, pos, params.clone()),
                )
            })
            .collect();
        Self {
            agents,
            inboxes: roster.iter().map(|&id| (id, Vec::new())).collect(),
        }
    }

    pub fn agents(&self) -> &BTreeMap<AgentId, AgentState> {
        &self.agents
    }

    /// Runs every agent's decision cycle for one turn.
    ///
    /// Agents without a percept stay and send nothing.
    pub fn decide(&mut self, percepts: &BTreeMap<AgentId, Percept>) -> BTreeMap<AgentId, Action> {
        let mut actions = BTreeMap::new();
        let mut sent: Vec<Message> = Vec::new();
        for (&id, agent) in self.agents.iter_mut() {
            let inbox = std::mem::take(self.inboxes.get_mut(&id).expect("inbox per agent"));
            let action = match percepts.get(&id) {
                Some(p) => {
                    let (action, out) = agent_act(agent, &inbox, p);
                    sent.extend(out);
                    action
                }
                None => Action::Stay,
            };
            actions.insert(id, action);
        }
        normalize_inbox(&mut sent);
        for (&id, inbox) in self.inboxes.iter_mut() {
            inbox.extend(sent.iter().filter(|m| m.sender != id).cloned());
        }
        actions
    }
}
