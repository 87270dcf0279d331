//! Groups the cows of `arena_50` into herds and ranks them for team 1.

use herdsim::cluster::{herds, rank_clusters};
use herdsim::config::Params;
use herdsim::maps;
use herdsim::pathfind::WeightGrid;
use herdsim::world::{TeamId, Terrain, WorldState};

fn main() {
    let params = Params::default();
    let world = WorldState::new(maps::ARENA_50, 0, &params).unwrap();
    let cows: Vec<_> = world.cows().iter().map(|(&c, &p)| (c, p)).collect();
    let clusters = herds(&cows, params.link, params.max_cluster);
    println!(
        "{} cows in {} herds (link {}, max {})",
        cows.len(),
        clusters.len(),
        params.link,
        params.max_cluster
    );

    let mut grid = WeightGrid::uniform(world.width(), world.height());
    for p in world.positions() {
        if world.terrain(p) == Terrain::Obstacle {
            grid.set(p, None);
        }
    }
    let opponents: Vec<_> = world
        .team_agents(TeamId::TWO)
        .iter()
        .map(|a| world.agents()[a].pos)
        .collect();
    let ranked = rank_clusters(
        &clusters,
        &world.corral_cells(TeamId::ONE),
        &grid,
        &opponents,
        params.p_opp,
        params.r_opp,
    );
    for r in ranked {
        let c = &r.cluster;
        println!(
            "herd {:>2}: {} cows around {} radius {} score {:?}",
            c.id.0,
            c.len(),
            c.center_cell(),
            c.bbox.radius(),
            r.score
        );
    }
}
