//! The authoritative environment: terrain, cows, agents, fences and scores.
//!
//! A turn is applied in a fixed phase order (agent moves by ascending id,
//! fence update, cow moves by ascending id, captures, step counter), so a
//! map, a seed and an action stream fully determine every later state.

mod map;
mod types;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::Params;

pub use map::{MapError, MapErrorKind};
pub use types::{
    Action, AgentId, CowId, Direction, Event, FenceId, Occupant, Percept, Position, TeamId,
    Terrain, VisibleCell,
};

use map::Spawn;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorldError {
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AgentInfo {
    pub pos: Position,
    pub team: TeamId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fence {
    pub segments: Vec<Position>,
    pub switches: [Position; 2],
    pub open: bool,
}

impl Fence {
    /// True when some cell within Chebyshev 1 of a switch satisfies `occupied`.
    fn held_by(&self, mut is_agent: impl FnMut(Position) -> bool) -> bool {
        self.switches
            .iter()
            .any(|s| std::iter::once(*s).chain(s.neighbors()).any(&mut is_agent))
    }
}

/// Cow reaction constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CowModel {
    pub radius: i32,
    pub agent_weight: i64,
    pub cow_weight: i64,
    pub wall_weight: i64,
}

impl From<&Params> for CowModel {
    fn from(p: &Params) -> Self {
        Self {
            radius: p.r_cow,
            agent_weight: p.cow_weight_agent,
            cow_weight: p.cow_weight_cow,
            wall_weight: p.cow_weight_wall,
        }
    }
}

impl Default for CowModel {
    fn default() -> Self {
        CowModel::from(&Params::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Entity {
    Cow(CowId),
    Agent(AgentId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    width: i32,
    height: i32,
    r_fov: i32,
    terrain: Vec<Terrain>,
    cows: BTreeMap<CowId, Position>,
    agents: BTreeMap<AgentId, AgentInfo>,
    fences: BTreeMap<FenceId, Fence>,
    step: u64,
    scores: BTreeMap<TeamId, u32>,
    rng: ChaCha8Rng,
    cow_model: CowModel,
    occupancy: Vec<Option<Entity>>,
}

/// Parses a map document into a world at step 0 with seed 0 and default constants.
pub fn load_map(text: &str) -> Result<WorldState, MapError> {
    let layout = map::parse_map(text)?;
    let mut world = WorldState {
        width: layout.width,
        height: layout.height,
        r_fov: layout.r_fov,
        terrain: layout.terrain,
        cows: BTreeMap::new(),
        agents: BTreeMap::new(),
        fences: layout
            .fences
            .into_iter()
            .map(|(id, f)| {
                (
                    id,
                    Fence {
                        segments: f.segments,
                        switches: f.switches,
                        open: false,
                    },
                )
            })
            .collect(),
        step: 0,
        scores: [(TeamId::ONE, 0), (TeamId::TWO, 0)].into_iter().collect(),
        rng: ChaCha8Rng::seed_from_u64(0),
        cow_model: CowModel::default(),
        occupancy: vec![None; (layout.width * layout.height) as usize],
    };
    for (pos, spawn) in layout.spawns {
        let idx = world.index(pos);
        match spawn {
            Spawn::Cow => {
                let id = CowId(world.cows.len() as u32);
                world.cows.insert(id, pos);
                world.occupancy[idx] = Some(Entity::Cow(id));
            }
            Spawn::Agent(team) => {
                let id = AgentId(world.agents.len() as u32);
                world.agents.insert(id, AgentInfo { pos, team });
                world.occupancy[idx] = Some(Entity::Agent(id));
            }
        }
    }
    Ok(world)
}

impl WorldState {
    /// Loads a map and applies a seed and constant overrides.
    pub fn new(text: &str, seed: u64, params: &Params) -> Result<Self, MapError> {
        let mut w = load_map(text)?;
        w.rng = ChaCha8Rng::seed_from_u64(seed);
        w.cow_model = CowModel::from(params);
        if let Some(r) = params.r_fov {
            w.r_fov = r;
        }
        Ok(w)
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn r_fov(&self) -> i32 {
        self.r_fov
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn cows(&self) -> &BTreeMap<CowId, Position> {
        &self.cows
    }

    pub fn agents(&self) -> &BTreeMap<AgentId, AgentInfo> {
        &self.agents
    }

    pub fn fences(&self) -> &BTreeMap<FenceId, Fence> {
        &self.fences
    }

    pub fn scores(&self) -> &BTreeMap<TeamId, u32> {
        &self.scores
    }

    pub fn score(&self, team: TeamId) -> u32 {
        self.scores.get(&team).copied().unwrap_or(0)
    }

    pub fn cow_model(&self) -> CowModel {
        self.cow_model
    }

    pub fn team_agents(&self, team: TeamId) -> Vec<AgentId> {
        self.agents
            .iter()
            .filter(|(_, a)| a.team == team)
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    fn index(&self, p: Position) -> usize {
        (p.y * self.width + p.x) as usize
    }

    /// Terrain at an in-bounds position.
    pub fn terrain(&self, p: Position) -> Terrain {
        self.terrain[self.index(p)]
    }

    pub fn corral_cells(&self, team: TeamId) -> Vec<Position> {
        self.positions()
            .filter(|&p| self.terrain(p) == Terrain::Corral(team))
            .collect()
    }

    /// All positions in row-major order.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Position::new(x, y)))
    }

    /// Obstacle or closed fence segment.
    pub fn is_blocking(&self, p: Position) -> bool {
        match self.terrain(p) {
            Terrain::Obstacle => true,
            Terrain::FenceSegment(f) => !self.fences[&f].open,
            _ => false,
        }
    }

    pub fn occupied(&self, p: Position) -> bool {
        self.occupancy[self.index(p)].is_some()
    }

    pub fn occupant_for(&self, p: Position, viewer_team: TeamId) -> Option<Occupant> {
        self.occupancy[self.index(p)].map(|e| match e {
            Entity::Cow(c) => Occupant::Cow(c),
            Entity::Agent(a) if self.agents[&a].team == viewer_team => Occupant::Ally(a),
            Entity::Agent(a) => Occupant::Opponent(a),
        })
    }

    /// Field-of-view snapshot for one agent: every in-bounds cell within
    /// Chebyshev `r_fov`, without occlusion.
    pub fn percept(&self, agent: AgentId) -> Result<Percept, WorldError> {
        let info = self
            .agents
            .get(&agent)
            .ok_or(WorldError::UnknownAgent(agent))?;
        let r = self.r_fov;
        let c = info.pos;
        let mut visible = Vec::new();
        let mut fences = BTreeMap::new();
        for y in (c.y - r).max(0)..=(c.y + r).min(self.height - 1) {
            for x in (c.x - r).max(0)..=(c.x + r).min(self.width - 1) {
                let pos = Position::new(x, y);
                let terrain = self.terrain(pos);
                if let Terrain::FenceSegment(f) = terrain {
                    fences.insert(f, self.fences[&f].open);
                }
                visible.push(VisibleCell {
                    pos,
                    terrain,
                    occupant: self.occupant_for(pos, info.team),
                });
            }
        }
        Ok(Percept {
            agent,
            pos: c,
            step: self.step,
            visible,
            fences: fences.into_iter().collect(),
        })
    }

    /// Whether `candidate` is a legal destination for a cow currently at `from`.
    fn cow_may_enter(&self, from: Position, candidate: Position) -> bool {
        self.in_bounds(candidate)
            && !self.is_blocking(candidate)
            && (candidate == from || !self.occupied(candidate))
    }

    /// How much the cow would like to stand on `candidate`.
    ///
    /// Sums `w(e) * (R + 1 - cheb(e, candidate))` over agents and other cows
    /// within `R` of the cow, plus the wall term for each obstacle or closed
    /// fence cell adjacent to the candidate.
    pub fn cow_desirability(&self, cow: CowId, candidate: Position) -> i64 {
        let Some(&at) = self.cows.get(&cow) else {
            return 0;
        };
        let m = self.cow_model;
        let r = m.radius;
        let reach = |e: Position| (r + 1 - e.cheb(candidate)) as i64;
        let mut score = 0;
        for y in (at.y - r).max(0)..=(at.y + r).min(self.height - 1) {
            for x in (at.x - r).max(0)..=(at.x + r).min(self.width - 1) {
                let p = Position::new(x, y);
                match self.occupancy[self.index(p)] {
                    Some(Entity::Agent(_)) => score += m.agent_weight * reach(p),
                    Some(Entity::Cow(other)) if other != cow => score += m.cow_weight * reach(p),
                    _ => {}
                }
            }
        }
        for n in candidate.neighbors() {
            if self.in_bounds(n) && self.is_blocking(n) && n.cheb(at) <= r {
                score += m.wall_weight * reach(n);
            }
        }
        score
    }

    /// Whether a move by `agent` in `dir` would be carried out against the current state.
    pub fn move_is_legal(&self, agent: AgentId, dir: Direction) -> bool {
        let Some(info) = self.agents.get(&agent) else {
            return false;
        };
        let to = info.pos.offset(dir);
        if !self.in_bounds(to) || self.occupied(to) {
            return false;
        }
        match self.terrain(to) {
            Terrain::Obstacle => false,
            Terrain::FenceSegment(f) => {
                let fence = &self.fences[&f];
                // The gate must stay held once the mover has left its post.
                fence.open
                    && fence.held_by(|p| {
                        p == to
                            || (p != info.pos
                                && self.in_bounds(p)
                                && matches!(self.occupancy[self.index(p)], Some(Entity::Agent(_))))
                    })
            }
            _ => true,
        }
    }

    /// Advances the world by one turn. Agents absent from `actions` stay.
    pub fn step(&mut self, actions: &BTreeMap<AgentId, Action>) -> Result<Vec<Event>, WorldError> {
        if let Some(&bad) = actions.keys().find(|a| !self.agents.contains_key(a)) {
            return Err(WorldError::UnknownAgent(bad));
        }
        let mut events = Vec::new();

        // (1) agent moves
        let ids: Vec<AgentId> = self.agents.keys().copied().collect();
        for id in ids {
            let Some(Action::Move(dir)) = actions.get(&id).copied() else {
                continue;
            };
            let from = self.agents[&id].pos;
            if self.move_is_legal(id, dir) {
                let to = from.offset(dir);
                let (fi, ti) = (self.index(from), self.index(to));
                self.occupancy[fi] = None;
                self.occupancy[ti] = Some(Entity::Agent(id));
                self.agents.get_mut(&id).expect("agent exists").pos = to;
                events.push(Event::AgentMoved {
                    agent: id,
                    from,
                    to,
                });
            } else {
                events.push(Event::AgentBlocked {
                    agent: id,
                    at: from,
                });
            }
        }

        // (2) fences
        let fence_ids: Vec<FenceId> = self.fences.keys().copied().collect();
        for f in fence_ids {
            let fence = &self.fences[&f];
            let held = fence.held_by(|p| {
                self.in_bounds(p) && matches!(self.occupancy[self.index(p)], Some(Entity::Agent(_)))
            });
            let blocked = fence.segments.iter().any(|&s| self.occupied(s));
            let open = held || (fence.open && blocked);
            if open != fence.open {
                self.fences.get_mut(&f).expect("fence exists").open = open;
                events.push(Event::FenceToggled { fence: f, open });
            }
        }

        // (3) cows
        let cow_ids: Vec<CowId> = self.cows.keys().copied().collect();
        for cow in cow_ids {
            let from = self.cows[&cow];
            let mut best: Vec<Position> = Vec::with_capacity(9);
            let mut best_score = i64::MIN;
            for cand in std::iter::once(from).chain(from.neighbors()) {
                if !self.cow_may_enter(from, cand) {
                    continue;
                }
                let s = self.cow_desirability(cow, cand);
                if s > best_score {
                    best_score = s;
                    best.clear();
                }
                if s == best_score {
                    best.push(cand);
                }
            }
            let to = if best.len() > 1 {
                best[self.rng.gen_range(0..best.len())]
            } else {
                best[0]
            };
            if to != from {
                let (fi, ti) = (self.index(from), self.index(to));
                self.occupancy[fi] = None;
                self.occupancy[ti] = Some(Entity::Cow(cow));
                self.cows.insert(cow, to);
                events.push(Event::CowMoved { cow, from, to });
            }
        }

        // (4) captures
        let captured: Vec<(CowId, Position, TeamId)> = self
            .cows
            .iter()
            .filter_map(|(&c, &p)| match self.terrain(p) {
                Terrain::Corral(team) => Some((c, p, team)),
                _ => None,
            })
            .collect();
        for (cow, at, team) in captured {
            self.cows.remove(&cow);
            let idx = self.index(at);
            self.occupancy[idx] = None;
            *self.scores.entry(team).or_insert(0) += 1;
            events.push(Event::Captured { cow, team, at });
        }

        // (5)
        self.step += 1;
        Ok(events)
    }

    /// 64-bit FNV-1a over a canonical serialization: row-major terrain and
    /// occupancy, sorted cows, sorted agents, fences, scores, step.
    pub fn state_hash(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_i64(self.width as i64);
        h.write_i64(self.height as i64);
        for (i, t) in self.terrain.iter().enumerate() {
            let (tag, arg) = match *t {
                Terrain::Empty => (0u8, 0),
                Terrain::Obstacle => (1, 0),
                Terrain::Corral(team) => (2, team.0 as u32),
                Terrain::FenceSegment(f) => (3, f.0),
                Terrain::SwitchCell(f) => (4, f.0),
            };
            h.write(&[tag]);
            h.write_i64(arg as i64);
            let (otag, oid) = match self.occupancy[i] {
                None => (0u8, 0),
                Some(Entity::Cow(c)) => (1, c.0),
                Some(Entity::Agent(a)) => (2, a.0),
            };
            h.write(&[otag]);
            h.write_i64(oid as i64);
        }
        for (c, p) in &self.cows {
            h.write_i64(c.0 as i64);
            h.write_i64(p.x as i64);
            h.write_i64(p.y as i64);
        }
        for (a, info) in &self.agents {
            h.write_i64(a.0 as i64);
            h.write_i64(info.pos.x as i64);
            h.write_i64(info.pos.y as i64);
            h.write(&[info.team.0]);
        }
        for (f, fence) in &self.fences {
            h.write_i64(f.0 as i64);
            h.write(&[fence.open as u8]);
        }
        for (t, s) in &self.scores {
            h.write(&[t.0]);
            h.write_i64(*s as i64);
        }
        h.write_i64(self.step as i64);
        h.finish()
    }

    /// ASCII board using the map alphabet; open fence segments print as `f`.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(((self.width + 1) * self.height) as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                let p = Position::new(x, y);
                let ch = match self.occupancy[self.index(p)] {
                    Some(Entity::Cow(_)) => 'c',
                    Some(Entity::Agent(a)) if self.agents[&a].team == TeamId::ONE => 'A',
                    Some(Entity::Agent(_)) => 'B',
                    None => match self.terrain(p) {
                        Terrain::Empty => '.',
                        Terrain::Obstacle => '#',
                        Terrain::Corral(t) if t == TeamId::ONE => '1',
                        Terrain::Corral(_) => '2',
                        Terrain::FenceSegment(f) if self.fences[&f].open => 'f',
                        Terrain::FenceSegment(_) => 'F',
                        Terrain::SwitchCell(_) => 'S',
                    },
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

/// 64-bit FNV-1a.
#[derive(Clone, Copy, Debug)]
pub struct Fnv1a(u64);

impl Fnv1a {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    pub fn new() -> Self {
        Fnv1a(Self::OFFSET)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    fn write_i64(&mut self, v: i64) {
        self.write(&v.to_le_bytes());
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}
