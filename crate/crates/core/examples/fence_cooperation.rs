//! Two herders on `fence_gap`: one holds a switch so the other can cross.

use std::collections::BTreeMap;

use herdsim::agents::{HerderTeam, TargetKind};
use herdsim::config::Params;
use herdsim::maps;
use herdsim::world::{AgentId, TeamId, WorldState};

fn main() {
    let params = Params::default();
    let mut world = WorldState::new(maps::FENCE_GAP, 0, &params).unwrap();
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
    println!("{}", world.render());

    while world.step_count() < 60 {
        let percepts: BTreeMap<AgentId, _> = ids
            .iter()
            .map(|&a| (a, world.percept(a).unwrap()))
            .collect();
        let actions = team.decide(&percepts);
        world.step(&actions).unwrap();
        let holders: Vec<_> = team
            .agents()
            .values()
            .filter(|a| matches!(a.target.map(|t| t.kind), Some(TargetKind::Switch { .. })))
            .map(|a| a.id)
            .collect();
        let open = world.fences().values().any(|f| f.open);
        println!(
            "step {:>2}: fence {} holders {:?}",
            world.step_count(),
            if open { "open" } else { "closed" },
            holders
        );
        if world.step_count().is_multiple_of(10) {
            println!("{}", world.render());
        }
    }
    println!("score {}", world.score(TeamId::ONE));
}
