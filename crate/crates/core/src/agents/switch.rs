//! Deciding when a closed fence is worth holding open, and who should do it.

use std::collections::BTreeMap;

use super::{BeliefBase, Target, TargetKind};
use crate::config::Params;
use crate::pathfind::{
    astar, build_weight_grid_with, cost_field, field_at, FencePolicy, WeightGrid,
};
use crate::world::{AgentId, FenceId, Position};

/// Cows this close to a segment count as "near the fence".
const COW_NEAR_FENCE: i32 = 3;

fn min_corral_cost(grid: &WeightGrid, from: Position, corral: &[Position]) -> Option<u64> {
    let field = cost_field(grid, from);
    corral
        .iter()
        .filter_map(|&c| field_at(&field, grid, c))
        .min()
}

/// Cow within 3 of a segment whose cheapest way to the corral runs through the fence.
fn cows_need_fence(
    beliefs: &BeliefBase,
    segments: &[Position],
    closed: &WeightGrid,
    open: &WeightGrid,
) -> bool {
    let corral = beliefs.corral_cells();
    if corral.is_empty() {
        return false;
    }
    beliefs.cows().any(|(_, cow)| {
        segments.iter().any(|s| s.cheb(cow) <= COW_NEAR_FENCE)
            && match (
                min_corral_cost(open, cow, &corral),
                min_corral_cost(closed, cow, &corral),
            ) {
                (Some(o), Some(c)) => o < c,
                (Some(_), None) => true,
                _ => false,
            }
    })
}

/// Teammate whose target is reachable only through this fence.
fn stranded_teammate(
    beliefs: &BeliefBase,
    team_targets: &BTreeMap<AgentId, Target>,
    closed: &WeightGrid,
    open: &WeightGrid,
) -> Option<AgentId> {
    team_targets.iter().find_map(|(&agent, t)| {
        if matches!(t.kind, TargetKind::Switch { .. }) {
            return None;
        }
        let from = beliefs.ally_pos(agent)?;
        if !closed.in_bounds(t.pos) || !closed.in_bounds(from) {
            return None;
        }
        let blocked = astar(closed, from, t.pos).ok()?.is_none();
        let opens = astar(open, from, t.pos).ok()?.is_some();
        (blocked && opens).then_some(agent)
    })
}

/// Cost, agent, row-major post, post, switch.
type Bid = (u64, AgentId, (i32, i32), Position, Position);

/// If some believed-closed fence should be opened, the switch target and the
/// eligible agent who reaches a switch most cheaply.
///
/// A fence qualifies when a believed cow is near it on the way to the
/// corral, or a teammate's target lies on its far side. The teammate who
/// needs to pass is never picked to hold the switch, and a fence that
/// already has a switch holder is skipped.
pub fn needs_switch(
    beliefs: &BeliefBase,
    team_targets: &BTreeMap<AgentId, Target>,
    eligible: &[(AgentId, Position)],
    params: &Params,
) -> Option<(AgentId, Target)> {
    let closed = build_weight_grid_with(beliefs, params, FencePolicy::AsBelieved);
    for (fence, segments) in beliefs.known_fences() {
        if beliefs.fence_crossable(fence) || already_held(team_targets, fence) {
            continue;
        }
        let switches = beliefs.switch_cells(fence);
        if switches.is_empty() {
            continue;
        }
        let open = build_weight_grid_with(beliefs, params, FencePolicy::Open(fence));
        let needer = stranded_teammate(beliefs, team_targets, &closed, &open);
        if needer.is_none() && !cows_need_fence(beliefs, &segments, &closed, &open) {
            continue;
        }
        let mut best: Option<Bid> = None;
        for &(agent, from) in eligible {
            if Some(agent) == needer {
                continue;
            }
            let field = cost_field(&closed, from);
            for &s in &switches {
                for post in std::iter::once(s).chain(s.neighbors()) {
                    let Some(cost) = field_at(&field, &closed, post) else {
                        continue;
                    };
                    let key = (cost, agent, post.row_major(), post, s);
                    if best.is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                        best = Some(key);
                    }
                }
            }
        }
        if let Some((_, agent, _, post, switch)) = best {
            return Some((
                agent,
                Target {
                    pos: post,
                    kind: TargetKind::Switch { fence, switch },
                    issued_at: beliefs.step(),
                },
            ));
        }
    }
    None
}

fn already_held(team_targets: &BTreeMap<AgentId, Target>, fence: FenceId) -> bool {
    team_targets
        .values()
        .any(|t| matches!(t.kind, TargetKind::Switch { fence: f, .. } if f == fence))
}
