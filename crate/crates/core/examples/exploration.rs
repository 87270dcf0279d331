//! Three agents map the empty `open_30`; prints how much each knows as they go.

use std::collections::BTreeMap;

use herdsim::agents::{HerderTeam, TargetKind};
use herdsim::config::Params;
use herdsim::maps;
use herdsim::world::{AgentId, TeamId, WorldState};

fn main() {
    let params = Params::default();
    let mut world = WorldState::new(maps::OPEN_30, 0, &params).unwrap();
    let ids = world.team_agents(TeamId::ONE);
    let starts: Vec<_> = ids.iter().map(|&a| (a, world.agents()[&a].pos)).collect();
    let mut team = HerderTeam::new(
        TeamId::ONE,
        &starts,
        world.width(),
        world.height(),
        world.r_fov(),
        &params,
    );
    let cells = (world.width() * world.height()) as usize;

    for _ in 0..200 {
        let percepts: BTreeMap<AgentId, _> = ids
            .iter()
            .map(|&a| (a, world.percept(a).unwrap()))
            .collect();
        let actions = team.decide(&percepts);
        world.step(&actions).unwrap();
        if world.step_count().is_multiple_of(25) {
            let line: Vec<String> = team
                .agents()
                .values()
                .map(|a| {
                    let known = 100 * (cells - a.beliefs.unknown_count()) / cells;
                    let goal = match a.target {
                        Some(t) if t.kind == TargetKind::Exploration => t.pos.to_string(),
                        Some(t) => format!("{:?}", t.kind),
                        None => "-".into(),
                    };
                    format!("{} {:?} {known:>3}% -> {goal}", a.id, a.role)
                })
                .collect();
            println!("step {:>3}: {}", world.step_count(), line.join(" | "));
        }
    }
}
