use std::collections::BTreeMap;

use crate::world::{AgentId, CowId, FenceId, Occupant, Percept, Position, TeamId, Terrain};

/// Where an entity was last believed to be. `pos: None` records that it was
/// looked for and not found at `step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sighting {
    pub pos: Option<Position>,
    pub step: u64,
}

impl Sighting {
    /// Total order used by merges: newer step first, then presence, then position.
    fn key(&self) -> (u64, bool, Option<(i32, i32)>) {
        (
            self.step,
            self.pos.is_some(),
            self.pos.map(|p| p.row_major()),
        )
    }
}

/// A single unit of shared knowledge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fact {
    Cell {
        pos: Position,
        terrain: Terrain,
        step: u64,
    },
    Cow {
        id: CowId,
        seen: Sighting,
    },
    Opponent {
        id: AgentId,
        seen: Sighting,
    },
    Ally {
        id: AgentId,
        seen: Sighting,
    },
    Fence {
        id: FenceId,
        open: bool,
        step: u64,
    },
}

/// One agent's accumulated picture of the world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeliefBase {
    width: i32,
    height: i32,
    r_fov: i32,
    team: TeamId,
    known: Vec<Option<Terrain>>,
    last_seen: Vec<u64>,
    cows: BTreeMap<CowId, Sighting>,
    opponents: BTreeMap<AgentId, Sighting>,
    allies: BTreeMap<AgentId, Sighting>,
    fences: BTreeMap<FenceId, (bool, u64)>,
    self_id: AgentId,
    self_pos: Position,
    step: u64,
}

impl BeliefBase {
    pub fn new(
        width: i32,
        height: i32,
        r_fov: i32,
        team: TeamId,
        self_id: AgentId,
        self_pos: Position,
    ) -> Self {
        let n = (width * height) as usize;
        Self {
            width,
            height,
            r_fov,
            team,
            known: vec![None; n],
            last_seen: vec![0; n],
            cows: BTreeMap::new(),
            opponents: BTreeMap::new(),
            allies: BTreeMap::new(),
            fences: BTreeMap::new(),
            self_id,
            self_pos,
            step: 0,
        }
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

    pub fn team(&self) -> TeamId {
        self.team
    }

    pub fn self_id(&self) -> AgentId {
        self.self_id
    }

    pub fn self_pos(&self) -> Position {
        self.self_pos
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    fn index(&self, p: Position) -> usize {
        (p.y * self.width + p.x) as usize
    }

    /// Believed terrain, `None` while unknown or out of bounds.
    pub fn terrain(&self, p: Position) -> Option<Terrain> {
        if self.in_bounds(p) {
            self.known[self.index(p)]
        } else {
            None
        }
    }

    pub fn is_known(&self, p: Position) -> bool {
        self.terrain(p).is_some()
    }

    pub fn last_seen(&self, p: Position) -> Option<u64> {
        self.is_known(p).then(|| self.last_seen[self.index(p)])
    }

    /// The known grid, row-major.
    pub fn known_grid(&self) -> &[Option<Terrain>] {
        &self.known
    }

    pub fn unknown_count(&self) -> usize {
        self.known.iter().filter(|t| t.is_none()).count()
    }

    /// Fences nobody has reported open are assumed closed.
    pub fn fence_open(&self, f: FenceId) -> bool {
        self.fences.get(&f).is_some_and(|&(open, _)| open)
    }

    /// Open and held by some agent other than this one, so stepping onto a
    /// segment will not close it behind the mover.
    pub fn fence_crossable(&self, f: FenceId) -> bool {
        if !self.fence_open(f) {
            return false;
        }
        let switches = self.switch_cells(f);
        self.allies()
            .filter(|&(id, _)| id != self.self_id)
            .chain(self.opponents())
            .any(|(_, p)| switches.iter().any(|s| s.cheb(p) <= 1))
    }

    /// Known, in bounds, not an obstacle and not a believed-closed fence.
    pub fn believed_passable(&self, p: Position) -> bool {
        match self.terrain(p) {
            Some(t) => t.passable(|f| self.fence_open(f)),
            None => false,
        }
    }

    /// Currently believed cow positions, ascending cow id.
    pub fn cows(&self) -> impl Iterator<Item = (CowId, Position)> + '_ {
        self.cows
            .iter()
            .filter_map(|(&id, s)| s.pos.map(|p| (id, p)))
    }

    pub fn cow_at(&self, p: Position) -> bool {
        self.cows().any(|(_, q)| q == p)
    }

    pub fn opponents(&self) -> impl Iterator<Item = (AgentId, Position)> + '_ {
        self.opponents
            .iter()
            .filter_map(|(&id, s)| s.pos.map(|p| (id, p)))
    }

    /// Teammates (self included) with their last known positions.
    pub fn allies(&self) -> impl Iterator<Item = (AgentId, Position)> + '_ {
        self.allies
            .iter()
            .filter_map(|(&id, s)| s.pos.map(|p| (id, p)))
    }

    pub fn ally_pos(&self, id: AgentId) -> Option<Position> {
        if id == self.self_id {
            return Some(self.self_pos);
        }
        self.allies.get(&id).and_then(|s| s.pos)
    }

    pub fn ally_sighting_step(&self, id: AgentId) -> Option<u64> {
        self.allies
            .get(&id)
            .filter(|s| s.pos.is_some())
            .map(|s| s.step)
    }

    pub fn opponent_sighting_step(&self, id: AgentId) -> Option<u64> {
        self.opponents
            .get(&id)
            .filter(|s| s.pos.is_some())
            .map(|s| s.step)
    }

    pub fn cow_sighting(&self, id: CowId) -> Option<Sighting> {
        self.cows.get(&id).copied()
    }

    /// Fences whose segments have been seen, with the believed state.
    pub fn known_fences(&self) -> BTreeMap<FenceId, Vec<Position>> {
        let mut out: BTreeMap<FenceId, Vec<Position>> = BTreeMap::new();
        for (i, t) in self.known.iter().enumerate() {
            if let Some(Terrain::FenceSegment(f)) = t {
                let p = Position::new(i as i32 % self.width, i as i32 / self.width);
                out.entry(*f).or_default().push(p);
            }
        }
        out
    }

    pub fn switch_cells(&self, f: FenceId) -> Vec<Position> {
        self.known
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == Some(Terrain::SwitchCell(f)))
            .map(|(i, _)| Position::new(i as i32 % self.width, i as i32 / self.width))
            .collect()
    }

    /// Known corral cells of the agent's own team.
    pub fn corral_cells(&self) -> Vec<Position> {
        let own = Some(Terrain::Corral(self.team));
        self.known
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == own)
            .map(|(i, _)| Position::new(i as i32 % self.width, i as i32 / self.width))
            .collect()
    }

    /// Records a percept and returns exactly the facts it changed.
    ///
    /// Percepts older than the current step are ignored. Cows and agents
    /// believed inside the visible window but no longer there are evicted.
    pub fn integrate_percept(&mut self, p: &Percept) -> Vec<Fact> {
        if p.step < self.step {
            return Vec::new();
        }
        let mut facts = Vec::new();
        self.step = p.step;
        self.self_pos = p.pos;
        let me = Sighting {
            pos: Some(p.pos),
            step: p.step,
        };
        if self.allies.remove(&self.self_id).and_then(|s| s.pos) != Some(p.pos) {
            facts.push(Fact::Ally {
                id: self.self_id,
                seen: me,
            });
        }

        let mut seen_cows = BTreeMap::new();
        let mut seen_opps = BTreeMap::new();
        let mut seen_allies = BTreeMap::new();
        let (mut lo, mut hi) = (p.pos, p.pos);
        for cell in &p.visible {
            if !self.in_bounds(cell.pos) {
                continue;
            }
            lo = Position::new(lo.x.min(cell.pos.x), lo.y.min(cell.pos.y));
            hi = Position::new(hi.x.max(cell.pos.x), hi.y.max(cell.pos.y));
            let i = self.index(cell.pos);
            if self.known[i] != Some(cell.terrain) {
                facts.push(Fact::Cell {
                    pos: cell.pos,
                    terrain: cell.terrain,
                    step: p.step,
                });
            }
            self.known[i] = Some(cell.terrain);
            self.last_seen[i] = p.step;
            match cell.occupant {
                Some(Occupant::Cow(c)) => {
                    seen_cows.insert(c, cell.pos);
                }
                Some(Occupant::Opponent(a)) => {
                    seen_opps.insert(a, cell.pos);
                }
                Some(Occupant::Ally(a)) if a != self.self_id => {
                    seen_allies.insert(a, cell.pos);
                }
                _ => {}
            }
        }

        let in_window = |q: Position| q.x >= lo.x && q.x <= hi.x && q.y >= lo.y && q.y <= hi.y;
        observe(
            &mut self.cows,
            &seen_cows,
            p.step,
            in_window,
            &mut facts,
            |id, seen| Fact::Cow { id, seen },
        );
        observe(
            &mut self.opponents,
            &seen_opps,
            p.step,
            in_window,
            &mut facts,
            |id, seen| Fact::Opponent { id, seen },
        );
        observe(
            &mut self.allies,
            &seen_allies,
            p.step,
            in_window,
            &mut facts,
            |id, seen| Fact::Ally { id, seen },
        );
        self.allies.insert(self.self_id, me);

        for &(f, open) in &p.fences {
            let prev = self.fences.get(&f).copied();
            if prev.map(|(o, _)| o) != Some(open) {
                facts.push(Fact::Fence {
                    id: f,
                    open,
                    step: p.step,
                });
            }
            self.fences.insert(f, (open, p.step));
        }
        facts
    }

    /// Merges one fact with newest-step-wins; returns whether anything changed.
    pub fn merge(&mut self, fact: &Fact) -> bool {
        match *fact {
            Fact::Cell { pos, terrain, step } => {
                if !self.in_bounds(pos) {
                    return false;
                }
                let i = self.index(pos);
                let newer = match self.known[i] {
                    None => true,
                    Some(cur) => (step, terrain) > (self.last_seen[i], cur),
                };
                if newer {
                    self.known[i] = Some(terrain);
                    self.last_seen[i] = step;
                }
                newer
            }
            Fact::Cow { id, seen } => upsert(&mut self.cows, id, seen),
            Fact::Opponent { id, seen } => upsert(&mut self.opponents, id, seen),
            Fact::Ally { id, seen } => {
                if id == self.self_id {
                    return false;
                }
                upsert(&mut self.allies, id, seen)
            }
            Fact::Fence { id, open, step } => {
                let newer = match self.fences.get(&id) {
                    None => true,
                    Some(&cur) => (step, open) > (cur.1, cur.0),
                };
                if newer {
                    self.fences.insert(id, (open, step));
                }
                newer
            }
        }
    }

    /// Treats a cell as a wall from now on (used when a move is refused unexpectedly).
    pub fn mark_obstacle(&mut self, p: Position, step: u64) {
        if self.in_bounds(p) && self.terrain(p).is_none() {
            let i = self.index(p);
            self.known[i] = Some(Terrain::Obstacle);
            self.last_seen[i] = step;
        }
    }
}

fn upsert<K: Ord + Copy>(map: &mut BTreeMap<K, Sighting>, id: K, seen: Sighting) -> bool {
    match map.get(&id) {
        Some(cur) if cur.key() >= seen.key() => false,
        _ => {
            map.insert(id, seen);
            true
        }
    }
}

/// Upserts sightings and evicts entities believed inside the window but not seen.
fn observe<K: Ord + Copy>(
    beliefs: &mut BTreeMap<K, Sighting>,
    seen: &BTreeMap<K, Position>,
    step: u64,
    in_window: impl Fn(Position) -> bool,
    facts: &mut Vec<Fact>,
    make: impl Fn(K, Sighting) -> Fact,
) {
    for (&id, &pos) in seen {
        let s = Sighting {
            pos: Some(pos),
            step,
        };
        let changed = beliefs.get(&id).and_then(|c| c.pos) != Some(pos);
        beliefs.insert(id, s);
        if changed {
            facts.push(make(id, s));
        }
    }
    let gone: Vec<K> = beliefs
        .iter()
        .filter(|(id, s)| !seen.contains_key(id) && s.pos.is_some_and(&in_window))
        .map(|(&id, _)| id)
        .collect();
    for id in gone {
        let s = Sighting { pos: None, step };
        beliefs.insert(id, s);
        facts.push(make(id, s));
    }
}
