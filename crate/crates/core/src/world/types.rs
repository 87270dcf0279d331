use std::fmt;

use serde::{Deserialize, Serialize};

/// A cell on the board. `x` is the column, `y` the row; row 0 is the top line of the map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

impl Position {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// Chebyshev distance, the natural metric of an 8-connected grid.
    pub fn cheb(self, other: Position) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn offset(self, dir: Direction) -> Position {
        let (dx, dy) = dir.delta();
        Position::new(self.x + dx, self.y + dy)
    }

    /// Key that orders positions row-major (by `y`, then `x`).
    pub fn row_major(self) -> (i32, i32) {
        (self.y, self.x)
    }

    /// The direction that moves from `self` to an adjacent `to`.
    pub fn direction_to(self, to: Position) -> Option<Direction> {
        let d = (to.x - self.x, to.y - self.y);
        Direction::ALL.into_iter().find(|dir| dir.delta() == d)
    }

    pub fn neighbors(self) -> impl Iterator<Item = Position> {
        Direction::ALL.into_iter().map(move |d| self.offset(d))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Agent identity; assigned in row-major order over the whole map, both teams sharing one sequence.
    AgentId
);
id_type!(CowId);
id_type!(FenceId);

/// Team 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TeamId(pub u8);

impl TeamId {
    pub const ONE: TeamId = TeamId(1);
    pub const TWO: TeamId = TeamId(2);

    pub fn opponent(self) -> TeamId {
        if self == TeamId::ONE {
            TeamId::TWO
        } else {
            TeamId::ONE
        }
    }
}

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Terrain {
    Empty,
    Obstacle,
    Corral(TeamId),
    FenceSegment(FenceId),
    SwitchCell(FenceId),
}

impl Terrain {
    /// Passable for movement given whether the cell's fence (if any) is open.
    pub fn passable(self, fence_open: impl Fn(FenceId) -> bool) -> bool {
        match self {
            Terrain::Obstacle => false,
            Terrain::FenceSegment(f) => fence_open(f),
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::N,
        Direction::NE,
        Direction::E,
        Direction::SE,
        Direction::S,
        Direction::SW,
        Direction::W,
        Direction::NW,
    ];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::N => (0, -1),
            Direction::NE => (1, -1),
            Direction::E => (1, 0),
            Direction::SE => (1, 1),
            Direction::S => (0, 1),
            Direction::SW => (-1, 1),
            Direction::W => (-1, 0),
            Direction::NW => (-1, -1),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Move(Direction),
    #[default]
    Stay,
}

impl Action {
    pub fn code(self) -> &'static str {
        match self {
            Action::Stay => "Stay",
            Action::Move(d) => match d {
                Direction::N => "N",
                Direction::NE => "NE",
                Direction::E => "E",
                Direction::SE => "SE",
                Direction::S => "S",
                Direction::SW => "SW",
                Direction::W => "W",
                Direction::NW => "NW",
            },
        }
    }

    pub fn from_code(code: &str) -> Option<Action> {
        Some(match code {
            "Stay" => Action::Stay,
            "N" => Action::Move(Direction::N),
            "NE" => Action::Move(Direction::NE),
            "E" => Action::Move(Direction::E),
            "SE" => Action::Move(Direction::SE),
            "S" => Action::Move(Direction::S),
            "SW" => Action::Move(Direction::SW),
            "W" => Action::Move(Direction::W),
            "NW" => Action::Move(Direction::NW),
            _ => return None,
        })
    }
}

/// What stands on a visible cell, relative to the observing agent's team.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupant {
    Cow(CowId),
    Ally(AgentId),
    Opponent(AgentId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibleCell {
    pub pos: Position,
    pub terrain: Terrain,
    pub occupant: Option<Occupant>,
}

/// One agent's sensory snapshot for a turn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Percept {
    pub agent: AgentId,
    pub pos: Position,
    pub step: u64,
    /// Row-major, every in-bounds cell within the field of view.
    pub visible: Vec<VisibleCell>,
    /// `(fence, open)` for each fence with at least one visible segment, ascending fence id.
    pub fences: Vec<(FenceId, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    AgentMoved {
        agent: AgentId,
        from: Position,
        to: Position,
    },
    AgentBlocked {
        agent: AgentId,
        at: Position,
    },
    CowMoved {
        cow: CowId,
        from: Position,
        to: Position,
    },
    FenceToggled {
        fence: FenceId,
        open: bool,
    },
    Captured {
        cow: CowId,
        team: TeamId,
        at: Position,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_codes_round_trip() {
        let mut all: Vec<Action> = Direction::ALL.iter().map(|&d| Action::Move(d)).collect();
        all.push(Action::Stay);
        for a in all {
            assert_eq!(Action::from_code(a.code()), Some(a));
        }
        assert_eq!(Action::from_code("up"), None);
    }

    #[test]
    fn direction_to_neighbors() {
        let p = Position::new(3, 3);
        for d in Direction::ALL {
            assert_eq!(p.direction_to(p.offset(d)), Some(d));
        }
        assert_eq!(p.direction_to(p), None);
        assert_eq!(p.direction_to(Position::new(5, 3)), None);
    }
}
