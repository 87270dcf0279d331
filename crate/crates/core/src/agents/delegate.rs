//! The leader's target delegation pipeline.

use std::collections::{BTreeMap, BTreeSet};

use super::explore::{exploration_candidates, pick_by_gain_rate};
use super::formation::formation_slots;
use super::switch::needs_switch;
use super::{BeliefBase, Target, TargetKind};
use crate::cluster::{herds, rank_clusters, RankedCluster};
use crate::config::Params;
use crate::pathfind::{build_weight_grid_with, cost_field, field_at, FencePolicy, WeightGrid};
use crate::world::{AgentId, CowId, Position, Terrain};

/// A formation target counts toward a cluster when its recorded centroid is this close.
pub const SAME_CLUSTER_RADIUS: i32 = 5;

/// Greedy assignment: repeatedly take the cheapest remaining `(agent, slot)` pair.
///
/// `costs[(agent, slot)]` lists only reachable pairs. Ties break on agent id,
/// then slot index.
pub fn greedy_match(costs: &BTreeMap<(AgentId, usize), u64>) -> Vec<(AgentId, usize)> {
    let mut pairs: Vec<(u64, AgentId, usize)> =
        costs.iter().map(|(&(a, s), &c)| (c, a, s)).collect();
    pairs.sort();
    let mut used_agents = BTreeSet::new();
    let mut used_slots = BTreeSet::new();
    let mut out = Vec::new();
    for (_, a, s) in pairs {
        if used_agents.contains(&a) || used_slots.contains(&s) {
            continue;
        }
        used_agents.insert(a);
        used_slots.insert(s);
        out.push((a, s));
    }
    out
}

/// Answers every request with exactly one target.
///
/// 1. Believed cows are clustered, split and ranked; the best reachable
///    cluster gets formation slots for the requesters (and for teammates
///    already holding a formation target on it, whose slots are reserved).
/// 2. Slots go to requesters greedily by path cost.
/// 3. A switch target may override one assignment.
/// 4. Remaining requesters explore, never within the field-of-view radius
///    of another exploration target.
/// 5. Anyone still unassigned idles next to the corral.
pub fn delegate(
    beliefs: &BeliefBase,
    params: &Params,
    requests: &[(AgentId, Position)],
    team_targets: &BTreeMap<AgentId, Target>,
) -> Vec<(AgentId, Target)> {
    let step = beliefs.step();
    let mut requests: Vec<(AgentId, Position)> = requests.to_vec();
    requests.sort_by_key(|r| r.0);
    requests.dedup_by_key(|r| r.0);
    let others = held_targets(team_targets, &requests, step, params.t_stale);

    let open_grid = build_weight_grid_with(beliefs, params, FencePolicy::AllOpen);
    let fields: BTreeMap<AgentId, Vec<Option<u64>>> = requests
        .iter()
        .map(|&(a, p)| (a, cost_field(&open_grid, p)))
        .collect();
    let mut assigned: BTreeMap<AgentId, Target> = BTreeMap::new();

    // (1)-(2) formation
    if let Some(best) = best_cluster(beliefs, params, &open_grid) {
        let c = &best.cluster;
        let centroid = c.center_cell();
        let holders: Vec<Position> = others
            .values()
            .filter_map(|t| match t.kind {
                TargetKind::Formation { centroid: at, .. }
                    if at.cheb(centroid) <= SAME_CLUSTER_RADIUS =>
                {
                    Some(t.pos)
                }
                _ => None,
            })
            .collect();
        let k = (requests.len() + holders.len()).min(params.k_form);
        let corral = beliefs.corral_cells();
        let mut slots = formation_slots(
            c,
            &corral,
            k,
            beliefs,
            params.d_gap,
            params.formation_spread_deg,
        )
        .unwrap_or_default();
        // Each holder keeps the slot closest to where it is already headed.
        for h in holders {
            if let Some(i) = (0..slots.len()).min_by_key(|&i| (slots[i].cheb(h), i)) {
                slots.remove(i);
            }
        }
        let mut costs = BTreeMap::new();
        for &(a, _) in &requests {
            for (i, &s) in slots.iter().enumerate() {
                if let Some(cost) = field_at(&fields[&a], &open_grid, s) {
                    costs.insert((a, i), cost);
                }
            }
        }
        for (a, i) in greedy_match(&costs) {
            assigned.insert(
                a,
                Target {
                    pos: slots[i],
                    kind: TargetKind::Formation {
                        cluster: c.id,
                        centroid,
                    },
                    issued_at: step,
                },
            );
        }
    }

    // (3) switch override
    let mut view = others.clone();
    view.extend(assigned.iter().map(|(&a, &t)| (a, t)));
    if let Some((agent, target)) = needs_switch(beliefs, &view, &requests, params) {
        assigned.insert(agent, target);
    }

    // (4) exploration
    let mut explore_targets: Vec<Position> = others
        .values()
        .chain(assigned.values())
        .filter(|t| t.kind == TargetKind::Exploration)
        .map(|t| t.pos)
        .collect();
    if beliefs.unknown_count() > 0 {
        for &(a, from) in &requests {
            if assigned.contains_key(&a) {
                continue;
            }
            let cands = exploration_candidates(beliefs, params, from, |p| {
                explore_targets.iter().any(|e| e.cheb(p) <= beliefs.r_fov())
            });
            if let Some(c) = pick_by_gain_rate(&cands) {
                explore_targets.push(c.pos);
                assigned.insert(
                    a,
                    Target {
                        pos: c.pos,
                        kind: TargetKind::Exploration,
                        issued_at: step,
                    },
                );
            }
        }
    }

    // (5) idle
    let mut taken: BTreeSet<Position> = others
        .values()
        .chain(assigned.values())
        .map(|t| t.pos)
        .collect();
    for &(a, from) in &requests {
        if assigned.contains_key(&a) {
            continue;
        }
        let pos = idle_position(beliefs, &open_grid, &fields[&a], &taken).unwrap_or(from);
        taken.insert(pos);
        assigned.insert(
            a,
            Target {
                pos,
                kind: TargetKind::Idle,
                issued_at: step,
            },
        );
    }

    assigned.into_iter().collect()
}

/// Fresh targets of teammates who are not asking for a new one; delegation
/// works around these.
pub fn held_targets(
    team_targets: &BTreeMap<AgentId, Target>,
    requests: &[(AgentId, Position)],
    step: u64,
    t_stale: u64,
) -> BTreeMap<AgentId, Target> {
    team_targets
        .iter()
        .filter(|(a, t)| {
            !requests.iter().any(|r| r.0 == **a) && step.saturating_sub(t.issued_at) <= t_stale
        })
        .map(|(&a, &t)| (a, t))
        .collect()
}

/// Best-ranked cluster with a finite herding cost, if cows and a corral are known.
pub fn best_cluster(
    beliefs: &BeliefBase,
    params: &Params,
    grid: &WeightGrid,
) -> Option<RankedCluster> {
    let corral = beliefs.corral_cells();
    let cows: Vec<(CowId, Position)> = beliefs.cows().collect();
    if corral.is_empty() || cows.is_empty() {
        return None;
    }
    let clusters = herds(&cows, params.link, params.max_cluster);
    let opponents: Vec<Position> = beliefs.opponents().map(|o| o.1).collect();
    rank_clusters(
        &clusters,
        &corral,
        grid,
        &opponents,
        params.p_opp,
        params.r_opp,
    )
    .into_iter()
    .find(|r| r.score.is_some())
}

/// Cheapest reachable free cell bordering the own corral.
fn idle_position(
    beliefs: &BeliefBase,
    grid: &WeightGrid,
    field: &[Option<u64>],
    taken: &BTreeSet<Position>,
) -> Option<Position> {
    let own = Terrain::Corral(beliefs.team());
    let mut best: Option<(u64, (i32, i32), Position)> = None;
    for p in beliefs.corral_cells() {
        for q in p.neighbors() {
            let ok = beliefs.believed_passable(q)
                && beliefs.terrain(q) != Some(own)
                && !taken.contains(&q)
                && !beliefs.cow_at(q);
            if !ok {
                continue;
            }
            if let Some(cost) = field_at(field, grid, q) {
                let key = (cost, q.row_major(), q);
                if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                    best = Some(key);
                }
            }
        }
    }
    best.map(|b| b.2)
}
