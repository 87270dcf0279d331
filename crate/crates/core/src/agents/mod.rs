//! The herder team.
//!
//! Every agent keeps its own [`BeliefBase`] and broadcasts whatever its
//! percept changed. The leader (lowest id) answers target requests with
//! [`delegate`]; the scout (second-lowest id) picks exploration targets on
//! its own until the map holds no more reachable unknown cells, then herds
//! like everyone else. A target that is reached, stale, unreachable or
//! invalidated is dropped and a new one requested on the same turn.

mod belief;
mod delegate;
mod explore;
mod formation;
mod switch;
mod team;

use std::collections::BTreeMap;

pub use belief::{BeliefBase, Fact, Sighting};
pub use delegate::{best_cluster, delegate, greedy_match, held_targets, SAME_CLUSTER_RADIUS};
pub use explore::{
    exploration_candidates, frontier_cells, pick_by_gain_rate, scout_next_target,
    scout_target_avoiding, Candidate, ExplorationComplete, UnknownDensity,
};
pub use formation::{formation_slots, nearest_corral, EmptyCluster};
pub use switch::needs_switch;
pub use team::HerderTeam;

use crate::cluster::{herds, ClusterId};
use crate::config::Params;
use crate::pathfind::{
    astar, build_weight_grid, build_weight_grid_with, path_next, FencePolicy, Path,
};
use crate::world::{Action, AgentId, FenceId, Percept, Position, TeamId, Terrain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TargetKind {
    Exploration,
    Formation {
        cluster: ClusterId,
        centroid: Position,
    },
    Switch {
        fence: FenceId,
        switch: Position,
    },
    /// Parking spot when nothing else is worth doing.
    Idle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Target {
    pub pos: Position,
    pub kind: TargetKind,
    pub issued_at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MessageKind {
    BeliefShare(Vec<Fact>),
    TargetRequest { agent: AgentId, pos: Position },
    TargetAssign { agent: AgentId, target: Target },
}

impl MessageKind {
    fn rank(&self) -> u8 {
        match self {
            MessageKind::BeliefShare(_) => 0,
            MessageKind::TargetRequest { .. } => 1,
            MessageKind::TargetAssign { .. } => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub sender: AgentId,
    pub kind: MessageKind,
}

/// Puts a turn's messages in delivery order: by sender, then kind.
pub fn normalize_inbox(msgs: &mut [Message]) {
    msgs.sort_by_key(|m| (m.sender, m.kind.rank()));
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Leader,
    Scout,
    Herder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropReason {
    Reached,
    Stale,
    Unreachable,
    Invalidated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Revision {
    Keep,
    Drop(DropReason),
}

/// One run of the leader's delegation, kept for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct Delegation {
    pub step: u64,
    /// Teammates' targets the delegation had to work around.
    pub held: BTreeMap<AgentId, Target>,
    pub assigned: Vec<(AgentId, Target)>,
}

#[derive(Clone, Debug)]
pub struct AgentState {
    pub id: AgentId,
    pub role: Role,
    pub leader: AgentId,
    pub scout: Option<AgentId>,
    pub beliefs: BeliefBase,
    pub target: Option<Target>,
    pub path: Option<Path>,
    /// A request is outstanding; set when the goal is dropped, cleared on assignment.
    pub goal_retry: bool,
    /// Step of the last request sent, to re-ask if no answer arrives.
    pub requested_at: Option<u64>,
    /// What the agent believes each teammate is working on.
    pub team_targets: BTreeMap<AgentId, Target>,
    /// Requests waiting for the leader's next delegation.
    pub pending_requests: Vec<(AgentId, Position)>,
    /// Set when the target was adopted this turn; revision starts next turn.
    fresh_target: bool,
    /// The leader's most recent delegation.
    pub last_delegation: Option<Delegation>,
    pub params: Params,
}

/// Roles by id order: lowest leads, second-lowest scouts.
pub fn role_for(id: AgentId, roster: &[AgentId]) -> Role {
    let mut sorted = roster.to_vec();
    sorted.sort();
    match sorted.iter().position(|&a| a == id) {
        Some(0) => Role::Leader,
        Some(1) => Role::Scout,
        _ => Role::Herder,
    }
}

impl AgentState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: AgentId,
        roster: &[AgentId],
        team: TeamId,
        width: i32,
        height: i32,
        r_fov: i32,
        start: Position,
        params: Params,
    ) -> Self {
        Self {
            id,
            role: role_for(id, roster),
            leader: roster.iter().copied().min().unwrap_or(id),
            scout: roster
                .iter()
                .copied()
                .find(|&a| role_for(a, roster) == Role::Scout),
            beliefs: BeliefBase::new(width, height, r_fov, team, id, start),
            target: None,
            path: None,
            goal_retry: false,
            requested_at: None,
            team_targets: BTreeMap::new(),
            pending_requests: Vec::new(),
            fresh_target: false,
            last_delegation: None,
            params,
        }
    }

    fn drop_target(&mut self) {
        self.target = None;
        self.path = None;
        self.goal_retry = true;
        self.team_targets.remove(&self.id);
    }

    /// Exploration targets of teammates that are still fresh.
    fn team_exploration_targets(&self) -> Vec<Position> {
        let step = self.beliefs.step();
        self.team_targets
            .iter()
            .filter(|(&a, t)| {
                a != self.id
                    && t.kind == TargetKind::Exploration
                    && step.saturating_sub(t.issued_at) <= self.params.t_stale
            })
            .map(|(_, t)| t.pos)
            .collect()
    }

    /// Two explorers picked spots within view of each other in the same turn.
    /// The scout yields, since it can pick again at once; otherwise the higher
    /// id does. Every teammate applies the same rule, so all views agree
    /// without another round of messages.
    fn settle_exploration_clash(&mut self, newcomer: AgentId) {
        let Some(new) = self.team_targets.get(&newcomer).copied() else {
            return;
        };
        if new.kind != TargetKind::Exploration {
            return;
        }
        let r = self.beliefs.r_fov();
        let rivals: Vec<AgentId> = self
            .team_targets
            .iter()
            .filter(|(&a, t)| {
                a != newcomer && t.kind == TargetKind::Exploration && t.pos.cheb(new.pos) <= r
            })
            .map(|(&a, _)| a)
            .collect();
        for rival in rivals {
            let loser = match self.scout {
                Some(s) if s == rival || s == newcomer => s,
                _ => rival.max(newcomer),
            };
            if loser == self.id {
                self.drop_target();
            } else {
                self.team_targets.remove(&loser);
            }
            if loser == newcomer {
                return;
            }
        }
    }

    fn adopt(&mut self, target: Target) {
        self.target = Some(target);
        self.path = None;
        self.goal_retry = false;
        self.requested_at = None;
        self.fresh_target = true;
        self.team_targets.insert(self.id, target);
    }
}

/// Merges shared facts into `beliefs`, newest step winning per cell or entity.
pub fn apply_messages(beliefs: &mut BeliefBase, msgs: &[Message]) {
    for m in msgs {
        if let MessageKind::BeliefShare(facts) = &m.kind {
            for f in facts {
                beliefs.merge(f);
            }
        }
    }
}

/// Whether the agent should keep pursuing its current target.
pub fn revise_target(agent: &AgentState) -> Revision {
    let Some(t) = agent.target else {
        return Revision::Keep;
    };
    let b = &agent.beliefs;
    let p = &agent.params;
    let holding_switch = matches!(t.kind, TargetKind::Switch { .. });
    if b.self_pos() == t.pos && !holding_switch {
        return Revision::Drop(DropReason::Reached);
    }
    if b.step().saturating_sub(t.issued_at) > p.t_stale {
        return Revision::Drop(DropReason::Stale);
    }
    let grid = build_weight_grid_with(b, p, FencePolicy::AllOpen);
    if !matches!(astar(&grid, b.self_pos(), t.pos), Ok(Some(_))) {
        return Revision::Drop(DropReason::Unreachable);
    }
    if let TargetKind::Formation { centroid, .. } = t.kind {
        let cows: Vec<_> = b.cows().collect();
        let alive = herds(&cows, p.link, p.max_cluster)
            .iter()
            .any(|c| c.center_cell().cheb(centroid) <= SAME_CLUSTER_RADIUS);
        if !alive {
            return Revision::Drop(DropReason::Invalidated);
        }
    }
    Revision::Keep
}

/// One decision cycle.
///
/// Order: integrate the percept, broadcast what changed, merge teammates'
/// messages, revise the target, obtain a new one if needed (scouts choose,
/// others request and stay, the leader delegates), then plan a path and take
/// its first step.
pub fn agent_act(
    agent: &mut AgentState,
    inbox: &[Message],
    percept: &Percept,
) -> (Action, Vec<Message>) {
    let mut outbox = Vec::new();
    let me = agent.id;

    let facts = agent.beliefs.integrate_percept(percept);
    if !facts.is_empty() {
        outbox.push(Message {
            sender: me,
            kind: MessageKind::BeliefShare(facts),
        });
    }

    apply_messages(&mut agent.beliefs, inbox);
    for m in inbox {
        match &m.kind {
            MessageKind::TargetAssign { agent: to, target } => {
                if *to == me {
                    agent.adopt(*target);
                } else {
                    agent.team_targets.insert(*to, *target);
                    agent.settle_exploration_clash(*to);
                }
            }
            MessageKind::TargetRequest { agent: from, pos } => {
                agent.team_targets.remove(from);
                if me == agent.leader {
                    agent.pending_requests.push((*from, *pos));
                }
            }
            MessageKind::BeliefShare(_) => {}
        }
    }

    if !agent.fresh_target {
        if let Revision::Drop(_) = revise_target(agent) {
            agent.drop_target();
        }
    }
    agent.fresh_target = false;

    let mut waiting = false;
    if agent.target.is_none() {
        if agent.role == Role::Scout {
            let taken = agent.team_exploration_targets();
            match scout_target_avoiding(&agent.beliefs, &agent.params, &taken) {
                // Everything left is covered by teammates: ask the leader instead.
                Ok(None) => {}
                Ok(Some(pos)) => {
                    let t = Target {
                        pos,
                        kind: TargetKind::Exploration,
                        issued_at: agent.beliefs.step(),
                    };
                    agent.adopt(t);
                    agent.fresh_target = false;
                    outbox.push(Message {
                        sender: me,
                        kind: MessageKind::TargetAssign {
                            agent: me,
                            target: t,
                        },
                    });
                }
                Err(ExplorationComplete) => agent.role = Role::Herder,
            }
        }
        if agent.target.is_none() {
            let pos = agent.beliefs.self_pos();
            if me == agent.leader {
                agent.pending_requests.push((me, pos));
            } else {
                let step = agent.beliefs.step();
                let overdue = agent.requested_at.is_none_or(|t| step >= t + 2);
                if overdue {
                    agent.requested_at = Some(step);
                    outbox.push(Message {
                        sender: me,
                        kind: MessageKind::TargetRequest { agent: me, pos },
                    });
                }
                agent.goal_retry = true;
                waiting = true;
            }
        }
    }

    if me == agent.leader && !agent.pending_requests.is_empty() {
        let requests = std::mem::take(&mut agent.pending_requests);
        let assignments = delegate(
            &agent.beliefs,
            &agent.params,
            &requests,
            &agent.team_targets,
        );
        let step = agent.beliefs.step();
        agent.last_delegation = Some(Delegation {
            step,
            held: held_targets(&agent.team_targets, &requests, step, agent.params.t_stale),
            assigned: assignments.clone(),
        });
        for (to, target) in assignments {
            if to == me {
                agent.adopt(target);
                agent.fresh_target = false;
            } else {
                agent.team_targets.insert(to, target);
            }
            outbox.push(Message {
                sender: me,
                kind: MessageKind::TargetAssign { agent: to, target },
            });
        }
    }

    let action = if waiting {
        Action::Stay
    } else {
        next_move(agent)
    };
    (action, outbox)
}

/// Replans toward the current target and returns the first step.
fn next_move(agent: &mut AgentState) -> Action {
    let Some(t) = agent.target else {
        return Action::Stay;
    };
    let b = &agent.beliefs;
    let from = b.self_pos();
    if from == t.pos {
        agent.path = None;
        return Action::Stay;
    }
    let mut grid = build_weight_grid(b, &agent.params);
    // Standing on a segment nobody else holds still leaves a way off it.
    grid.set(from, grid.cost(from).or(Some(1)));
    // Step around agents standing next to us this turn.
    let step = b.step();
    let blockers: Vec<Position> = b
        .allies()
        .chain(b.opponents())
        .filter(|&(id, p)| id != agent.id && p.cheb(from) <= 2 && p != t.pos)
        .filter(|&(id, _)| seen_now(b, id, step))
        .map(|(_, p)| p)
        .collect();
    let mut avoid = grid.clone();
    for &p in &blockers {
        avoid.set(p, None);
    }
    let path = match astar(&avoid, from, t.pos) {
        Ok(Some(p)) => Some(p),
        _ => match astar(&grid, from, t.pos) {
            Ok(Some(p)) => Some(p),
            // Through a closed fence: walk up to it and wait for it to open.
            _ => {
                grid = build_weight_grid_with(b, &agent.params, FencePolicy::AllOpen);
                grid.set(from, grid.cost(from).or(Some(1)));
                astar(&grid, from, t.pos).ok().flatten()
            }
        },
    };
    agent.path = path;
    let Some(path) = &agent.path else {
        return Action::Stay;
    };
    match path_next(path, from) {
        Ok(Action::Move(d)) => {
            let next = from.offset(d);
            match b.terrain(next) {
                Some(Terrain::FenceSegment(f)) if !b.fence_open(f) => Action::Stay,
                _ => Action::Move(d),
            }
        }
        _ => Action::Stay,
    }
}

fn seen_now(b: &BeliefBase, id: AgentId, step: u64) -> bool {
    b.ally_sighting_step(id)
        .or_else(|| b.opponent_sighting_step(id))
        == Some(step)
}

#[cfg(test)]
mod tests;
