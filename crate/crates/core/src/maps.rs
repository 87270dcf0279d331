//! Maps shipped with the crate.

/// 20x20, six cows between the corrals, four team-1 herders, two team-2 agents.
pub const PASTURE_SMALL: &str = include_str!("../maps/pasture_small.map");
/// 17x11 split by one fence whose switches sit two cells off the line.
pub const FENCE_GAP: &str = include_str!("../maps/fence_gap.map");
/// 30x30 with no walls, cows or corrals; three team-1 agents in a corner.
pub const OPEN_30: &str = include_str!("../maps/open_30.map");
/// 50x50, ten agents, thirty cows.
pub const ARENA_50: &str = include_str!("../maps/arena_50.map");

pub const ALL: [(&str, &str); 4] = [
    ("pasture_small", PASTURE_SMALL),
    ("fence_gap", FENCE_GAP),
    ("open_30", OPEN_30),
    ("arena_50", ARENA_50),
];

/// A bundled map by name.
pub fn bundled(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, m)| *m)
}
