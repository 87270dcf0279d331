//! Plans a route across `pasture_small` on a believed map, first with every
//! cell known, then as a freshly spawned agent sees it.

use herdsim::agents::{BeliefBase, Fact};
use herdsim::config::Params;
use herdsim::maps;
use herdsim::pathfind::{astar, build_weight_grid, cost_field, field_at};
use herdsim::world::{Position, TeamId, WorldState};

fn main() {
    let params = Params::default();
    let world = WorldState::new(maps::PASTURE_SMALL, 0, &params).unwrap();
    let me = world.team_agents(TeamId::ONE)[0];
    let start = world.agents()[&me].pos;
    let goal = Position::new(3, 12);

    let mut fresh = BeliefBase::new(
        world.width(),
        world.height(),
        world.r_fov(),
        TeamId::ONE,
        me,
        start,
    );
    fresh.integrate_percept(&world.percept(me).unwrap());
    let mut full = fresh.clone();
    for pos in world.positions() {
        full.merge(&Fact::Cell {
            pos,
            terrain: world.terrain(pos),
            step: 0,
        });
    }

    for (name, beliefs) in [("full map", &full), ("first glance", &fresh)] {
        let grid = build_weight_grid(beliefs, &params);
        let path = astar(&grid, start, goal)
            .unwrap()
            .expect("corral is reachable");
        let field = cost_field(&grid, start);
        println!(
            "{name}: {} moves, cost {} (dijkstra {:?})",
            path.cells.len() - 1,
            path.cost,
            field_at(&field, &grid, goal)
        );
        let cells: Vec<String> = path.cells.iter().map(|p| p.to_string()).collect();
        println!("  {}", cells.join(" "));
    }
}
