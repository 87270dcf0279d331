use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::cluster::{Cluster, ClusterId};
use crate::maps;
use crate::world::{load_map, CowId, Occupant, WorldState};

/// 14x12, corral on the west, two cows, four team-1 agents (ids 0..3 row-major).
const FIELD: &str = "\
14 12 3
##############
#A...........#
#..A.........#
#11..........#
#11..........#
#11..........#
#11..........#
#.........c..#
#..........c.#
#...A........#
#.........A..#
##############
";

fn roster(world: &WorldState) -> Vec<AgentId> {
    world.team_agents(TeamId::ONE)
}

fn state_for(world: &WorldState, id: AgentId) -> AgentState {
    AgentState::new(
        id,
        &roster(world),
        TeamId::ONE,
        world.width(),
        world.height(),
        world.r_fov(),
        world.agents()[&id].pos,
        Params::default(),
    )
}

fn beliefs_for(world: &WorldState, id: AgentId) -> BeliefBase {
    BeliefBase::new(
        world.width(),
        world.height(),
        world.r_fov(),
        TeamId::ONE,
        id,
        world.agents()[&id].pos,
    )
}

fn requests_in(out: &[Message]) -> Vec<AgentId> {
    out.iter()
        .filter_map(|m| match m.kind {
            MessageKind::TargetRequest { agent, .. } => Some(agent),
            _ => None,
        })
        .collect()
}

fn assigns_in(out: &[Message]) -> Vec<(AgentId, Target)> {
    out.iter()
        .filter_map(|m| match m.kind {
            MessageKind::TargetAssign { agent, target } => Some((agent, target)),
            _ => None,
        })
        .collect()
}

#[test]
fn first_percept_reports_every_cell_and_entity() {
    let world = load_map(FIELD).unwrap();
    let me = AgentId(3);
    let mut b = beliefs_for(&world, me);
    let p = world.percept(me).unwrap();
    let facts = b.integrate_percept(&p);
    let cells = facts
        .iter()
        .filter(|f| matches!(f, Fact::Cell { .. }))
        .count();
    assert_eq!(cells, p.visible.len());
    let cows_seen = p
        .visible
        .iter()
        .filter(|c| matches!(c.occupant, Some(Occupant::Cow(_))))
        .count();
    let cow_facts = facts
        .iter()
        .filter(|f| matches!(f, Fact::Cow { .. }))
        .count();
    assert_eq!(cow_facts, cows_seen);
    assert!(facts.contains(&Fact::Ally {
        id: me,
        seen: Sighting {
            pos: Some(p.pos),
            step: 0
        }
    }));
}

#[test]
fn identical_percept_adds_nothing() {
    let world = load_map(FIELD).unwrap();
    let mut b = beliefs_for(&world, AgentId(3));
    let p = world.percept(AgentId(3)).unwrap();
    assert!(!b.integrate_percept(&p).is_empty());
    assert!(b.integrate_percept(&p).is_empty());
}

#[test]
fn stale_percept_is_ignored() {
    let world = load_map(FIELD).unwrap();
    let mut b = beliefs_for(&world, AgentId(3));
    let mut p = world.percept(AgentId(3)).unwrap();
    p.step = 4;
    b.integrate_percept(&p);
    let before = b.clone();
    p.step = 3;
    assert!(b.integrate_percept(&p).is_empty());
    assert_eq!(b, before);
}

#[test]
fn missing_cow_is_evicted_and_reported() {
    let world = load_map(FIELD).unwrap();
    let me = AgentId(3);
    let mut b = beliefs_for(&world, me);
    let mut p = world.percept(me).unwrap();
    let (cow, at) = p
        .visible
        .iter()
        .find_map(|c| match c.occupant {
            Some(Occupant::Cow(id)) => Some((id, c.pos)),
            _ => None,
        })
        .expect("agent 3 sees a cow");
    p.step = 10;
    b.integrate_percept(&p);
    assert_eq!(b.cow_sighting(cow).unwrap().pos, Some(at));

    p.step = 15;
    for c in &mut p.visible {
        if c.occupant == Some(Occupant::Cow(cow)) {
            c.occupant = None;
        }
    }
    let facts = b.integrate_percept(&p);
    assert!(b.cows().all(|(id, _)| id != cow));
    assert!(facts.contains(&Fact::Cow {
        id: cow,
        seen: Sighting {
            pos: None,
            step: 15
        }
    }));
}

#[test]
fn merge_is_idempotent_and_newest_wins() {
    let world = load_map(FIELD).unwrap();
    let mut b = beliefs_for(&world, AgentId(0));
    let at7 = Fact::Cow {
        id: CowId(0),
        seen: Sighting {
            pos: Some(Position::new(3, 3)),
            step: 7,
        },
    };
    let at9 = Fact::Cow {
        id: CowId(0),
        seen: Sighting {
            pos: Some(Position::new(5, 6)),
            step: 9,
        },
    };
    assert!(b.merge(&at7));
    assert!(!b.merge(&at7));
    assert!(b.merge(&at9));
    assert!(!b.merge(&at7));
    assert_eq!(
        b.cow_sighting(CowId(0)).unwrap().pos,
        Some(Position::new(5, 6))
    );
}

fn arb_terrain() -> impl Strategy<Value = Terrain> {
    prop_oneof![
        Just(Terrain::Empty),
        Just(Terrain::Obstacle),
        Just(Terrain::Corral(TeamId::ONE)),
        (0u32..2).prop_map(|f| Terrain::FenceSegment(FenceId(f))),
    ]
}

fn arb_sighting() -> impl Strategy<Value = Sighting> {
    (prop::option::of((0i32..6, 0i32..6)), 0u64..5).prop_map(|(p, step)| Sighting {
        pos: p.map(|(x, y)| Position::new(x, y)),
        step,
    })
}

fn arb_fact() -> impl Strategy<Value = Fact> {
    prop_oneof![
        ((0i32..6, 0i32..6), arb_terrain(), 0u64..5).prop_map(|((x, y), terrain, step)| {
            Fact::Cell {
                pos: Position::new(x, y),
                terrain,
                step,
            }
        }),
        (0u32..3, arb_sighting()).prop_map(|(id, seen)| Fact::Cow {
            id: CowId(id),
            seen
        }),
        (0u32..3, arb_sighting()).prop_map(|(id, seen)| Fact::Opponent {
            id: AgentId(id),
            seen
        }),
        (0u32..3, arb_sighting()).prop_map(|(id, seen)| Fact::Ally {
            id: AgentId(id),
            seen
        }),
        (0u32..2, any::<bool>(), 0u64..5).prop_map(|(id, open, step)| Fact::Fence {
            id: FenceId(id),
            open,
            step
        }),
    ]
}

proptest! {
    #[test]
    fn merge_order_does_not_matter(facts in prop::collection::vec(arb_fact(), 0..40), seed in any::<u64>()) {
        let fresh = || BeliefBase::new(6, 6, 2, TeamId::ONE, AgentId(0), Position::new(0, 0));
        let mut forward = fresh();
        for f in &facts {
            forward.merge(f);
        }
        let mut shuffled = facts.clone();
        // Deterministic shuffle driven by the seed.
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let mut other = fresh();
        for f in &shuffled {
            other.merge(f);
        }
        for f in &facts {
            other.merge(f);
        }
        prop_assert_eq!(forward, other);
    }

    #[test]
    fn formation_slots_sit_behind_the_herd(
        cows in prop::collection::vec((3i32..17, 3i32..17), 1..6),
        corral in (0i32..20, 0i32..20),
        k in 1usize..4,
        d_gap in 0i32..5,
    ) {
        let mut text = String::from("20 20 40\n");
        for y in 0..20 {
            for x in 0..20 {
                text.push(if (x, y) == (19, 19) { 'A' } else { '.' });
            }
            text.push('\n');
        }
        let world = load_map(&text).unwrap();
        let mut b = beliefs_for(&world, AgentId(0));
        b.integrate_percept(&world.percept(AgentId(0)).unwrap());
        let members: Vec<(CowId, Position)> = cows
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| (CowId(i as u32), Position::new(x, y)))
            .collect();
        let c = Cluster::new(ClusterId(0), members);
        let corral = [Position::new(corral.0, corral.1)];
        let d2 = |x: f64, y: f64| (x - corral[0].x as f64).powi(2) + (y - corral[0].y as f64).powi(2);
        let centroid_d2 = d2(c.centroid.0, c.centroid.1);
        let slots = formation_slots(&c, &corral, k, &b, d_gap, 60.0).unwrap();
        prop_assert!(slots.len() <= k);
        for s in slots {
            prop_assert!(d2(s.x as f64, s.y as f64) > centroid_d2, "slot {:?} not behind centroid {:?}", s, c.centroid);
        }
    }
}

#[test]
fn targetless_herder_requests_and_stays() {
    let world = load_map(FIELD).unwrap();
    let me = AgentId(2);
    let mut agent = state_for(&world, me);
    assert_eq!(agent.role, Role::Herder);
    let (action, out) = agent_act(&mut agent, &[], &world.percept(me).unwrap());
    assert_eq!(action, Action::Stay);
    assert_eq!(requests_in(&out), vec![me]);
}

#[test]
fn scout_picks_a_target_and_moves() {
    let world = load_map(FIELD).unwrap();
    let me = AgentId(1);
    let mut agent = state_for(&world, me);
    assert_eq!(agent.role, Role::Scout);
    let (action, out) = agent_act(&mut agent, &[], &world.percept(me).unwrap());
    let target = agent.target.expect("scout chose a target");
    assert_eq!(target.kind, TargetKind::Exploration);
    assert_eq!(assigns_in(&out), vec![(me, target)]);
    let path = agent.path.as_ref().expect("path planned");
    let next = path.cells[1];
    assert_eq!(
        action,
        Action::Move(world.agents()[&me].pos.direction_to(next).unwrap())
    );
}

#[test]
fn leader_answers_two_requests_and_itself() {
    let world = load_map(FIELD).unwrap();
    let lead = AgentId(0);
    let mut leader = state_for(&world, lead);
    assert_eq!(leader.role, Role::Leader);
    let inbox: Vec<Message> = [AgentId(2), AgentId(3)]
        .iter()
        .map(|&a| Message {
            sender: a,
            kind: MessageKind::TargetRequest {
                agent: a,
                pos: world.agents()[&a].pos,
            },
        })
        .collect();
    let (_, out) = agent_act(&mut leader, &inbox, &world.percept(lead).unwrap());
    let assigned: Vec<AgentId> = assigns_in(&out).iter().map(|a| a.0).collect();
    assert_eq!(assigned, vec![AgentId(0), AgentId(2), AgentId(3)]);
    assert!(leader.target.is_some());
}

fn with_target(world: &WorldState, id: AgentId, target: Target) -> AgentState {
    let mut agent = state_for(world, id);
    agent.beliefs.integrate_percept(&world.percept(id).unwrap());
    agent.target = Some(target);
    agent
}

#[test]
fn fresh_reachable_target_is_kept() {
    let world = load_map(FIELD).unwrap();
    let t = Target {
        pos: Position::new(6, 8),
        kind: TargetKind::Exploration,
        issued_at: 0,
    };
    assert_eq!(
        revise_target(&with_target(&world, AgentId(3), t)),
        Revision::Keep
    );
}

#[test]
fn old_target_goes_stale() {
    let world = load_map(FIELD).unwrap();
    let mut agent = with_target(
        &world,
        AgentId(3),
        Target {
            pos: Position::new(6, 8),
            kind: TargetKind::Exploration,
            issued_at: 5,
        },
    );
    let mut p = world.percept(AgentId(3)).unwrap();
    p.step = 25;
    agent.beliefs.integrate_percept(&p);
    assert_eq!(revise_target(&agent), Revision::Keep);
    p.step = 26;
    agent.beliefs.integrate_percept(&p);
    assert_eq!(revise_target(&agent), Revision::Drop(DropReason::Stale));
}

#[test]
fn sealed_target_is_unreachable() {
    let world = load_map(FIELD).unwrap();
    let goal = Position::new(7, 8);
    let mut agent = with_target(
        &world,
        AgentId(3),
        Target {
            pos: goal,
            kind: TargetKind::Exploration,
            issued_at: 0,
        },
    );
    assert_eq!(revise_target(&agent), Revision::Keep);
    for n in goal.neighbors() {
        agent.beliefs.merge(&Fact::Cell {
            pos: n,
            terrain: Terrain::Obstacle,
            step: 1,
        });
    }
    assert_eq!(
        revise_target(&agent),
        Revision::Drop(DropReason::Unreachable)
    );
}

#[test]
fn formation_without_its_herd_is_invalidated() {
    let world = load_map(FIELD).unwrap();
    let agent = with_target(
        &world,
        AgentId(3),
        Target {
            pos: Position::new(8, 8),
            kind: TargetKind::Formation {
                cluster: ClusterId(0),
                centroid: Position::new(3, 9),
            },
            issued_at: 0,
        },
    );
    assert_eq!(
        revise_target(&agent),
        Revision::Drop(DropReason::Invalidated)
    );
}

#[test]
fn every_drop_is_followed_by_a_request() {
    let world = load_map(FIELD).unwrap();
    let me = AgentId(2);
    let here = world.agents()[&me].pos;
    // Out of view, so the percept cannot overwrite the walls.
    let sealed = Position::new(11, 3);
    let cases = [
        (here, TargetKind::Exploration, 0),
        (Position::new(6, 6), TargetKind::Exploration, 0),
        (sealed, TargetKind::Exploration, 3),
        (
            Position::new(8, 8),
            TargetKind::Formation {
                cluster: ClusterId(0),
                centroid: Position::new(2, 9),
            },
            3,
        ),
    ];
    for (i, (pos, kind, issued_at)) in cases.into_iter().enumerate() {
        let mut agent = with_target(
            &world,
            me,
            Target {
                pos,
                kind,
                issued_at,
            },
        );
        for n in sealed.neighbors() {
            agent.beliefs.merge(&Fact::Cell {
                pos: n,
                terrain: Terrain::Obstacle,
                step: 0,
            });
        }
        let mut p = world.percept(me).unwrap();
        // Case 1 is only stale; the rest are current.
        p.step = if i == 1 { 30 } else { 4 };
        let (action, out) = agent_act(&mut agent, &[], &p);
        assert!(agent.target.is_none(), "case {i} kept its target");
        assert_eq!(requests_in(&out), vec![me], "case {i}");
        assert_eq!(action, Action::Stay);
    }
}

#[test]
fn unknown_map_yields_separated_exploration_targets() {
    let world = load_map(maps::OPEN_30).unwrap();
    let ids = roster(&world);
    let mut b = beliefs_for(&world, ids[0]);
    b.integrate_percept(&world.percept(ids[0]).unwrap());
    let requests: Vec<(AgentId, Position)> =
        ids.iter().map(|&a| (a, world.agents()[&a].pos)).collect();
    let out = delegate(&b, &Params::default(), &requests, &BTreeMap::new());
    assert_eq!(out.len(), 3);
    assert!(out.iter().all(|(_, t)| t.kind == TargetKind::Exploration));
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            assert!(
                out[i].1.pos.cheb(out[j].1.pos) > world.r_fov(),
                "{:?} vs {:?}",
                out[i],
                out[j]
            );
        }
    }
}

#[test]
fn single_requester_gets_the_central_slot() {
    let world = load_map(FIELD).unwrap();
    let me = AgentId(3);
    let b = full_beliefs(&world, me);
    let params = Params::default();
    let grid = build_weight_grid_with(&b, &params, FencePolicy::AllOpen);
    let best = best_cluster(&b, &params, &grid).expect("cows in view");
    let expected = formation_slots(
        &best.cluster,
        &b.corral_cells(),
        1,
        &b,
        params.d_gap,
        params.formation_spread_deg,
    )
    .unwrap();
    let out = delegate(&b, &params, &[(me, b.self_pos())], &BTreeMap::new());
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].1.pos, expected[0]);
    assert!(matches!(out[0].1.kind, TargetKind::Formation { .. }));
}

/// Beliefs of an agent that knows the whole board and every fence.
fn full_beliefs(world: &WorldState, id: AgentId) -> BeliefBase {
    let mut b = beliefs_for(world, id);
    for y in 0..world.height() {
        for x in 0..world.width() {
            let pos = Position::new(x, y);
            b.merge(&Fact::Cell {
                pos,
                terrain: world.terrain(pos),
                step: 0,
            });
        }
    }
    for (&fid, f) in world.fences() {
        b.merge(&Fact::Fence {
            id: fid,
            open: f.open,
            step: 0,
        });
    }
    b.integrate_percept(&world.percept(id).unwrap());
    b
}

#[test]
fn no_closed_fence_no_switch() {
    let world = load_map(FIELD).unwrap();
    let b = full_beliefs(&world, AgentId(0));
    let pos = |a: u32| (AgentId(a), world.agents()[&AgentId(a)].pos);
    assert_eq!(
        needs_switch(&b, &BTreeMap::new(), &[pos(0), pos(2)], &Params::default()),
        None
    );
}

#[test]
fn teammate_across_fence_gets_a_switch_holder() {
    let world = load_map(maps::FENCE_GAP).unwrap();
    let (h1, h2) = (AgentId(0), AgentId(1));
    let mut b = full_beliefs(&world, h1);
    b.merge(&Fact::Ally {
        id: h2,
        seen: Sighting {
            pos: Some(world.agents()[&h2].pos),
            step: 0,
        },
    });
    let across = Target {
        pos: Position::new(12, 5),
        kind: TargetKind::Formation {
            cluster: ClusterId(0),
            centroid: Position::new(13, 4),
        },
        issued_at: 0,
    };
    let targets: BTreeMap<AgentId, Target> = [(h1, across)].into_iter().collect();
    let eligible = [(h1, world.agents()[&h1].pos), (h2, world.agents()[&h2].pos)];
    let (who, t) =
        needs_switch(&b, &targets, &eligible, &Params::default()).expect("switch needed");
    assert_eq!(who, h2);
    let TargetKind::Switch { switch, .. } = t.kind else {
        panic!("expected a switch target, got {t:?}");
    };
    assert_eq!(switch, Position::new(6, 5));
    assert!(t.pos.cheb(switch) <= 1);

    // Nobody but the stranded agent is around: no holder.
    assert_eq!(
        needs_switch(&b, &targets, &eligible[..1], &Params::default()),
        None
    );
}

#[test]
fn cow_by_the_fence_gets_a_switch_holder() {
    let world = load_map(maps::FENCE_GAP).unwrap();
    let b0 = full_beliefs(&world, AgentId(0));
    let eligible = [
        (AgentId(0), world.agents()[&AgentId(0)].pos),
        (AgentId(1), world.agents()[&AgentId(1)].pos),
    ];
    assert_eq!(
        needs_switch(&b0, &BTreeMap::new(), &eligible, &Params::default()),
        None
    );

    let mut b = b0.clone();
    b.merge(&Fact::Cow {
        id: CowId(0),
        seen: Sighting {
            pos: Some(Position::new(10, 3)),
            step: 0,
        },
    });
    let (who, t) =
        needs_switch(&b, &BTreeMap::new(), &eligible, &Params::default()).expect("switch needed");
    assert!(matches!(t.kind, TargetKind::Switch { .. }));
    // Both agents are two steps from a cell next to the west switch; the lower id wins the tie.
    assert_eq!(who, AgentId(0));
}

#[test]
fn herder_is_never_targetless_for_long() {
    let params = Params::default();
    let mut world = WorldState::new(maps::PASTURE_SMALL, 3, &params).unwrap();
    let ids = roster(&world);
    let starts: Vec<_> = ids.iter().map(|&a| (a, world.agents()[&a].pos)).collect();
    let mut team = HerderTeam::new(
        TeamId::ONE,
        &starts,
        world.width(),
        world.height(),
        world.r_fov(),
        &params,
    );
    let mut idle_run: BTreeMap<AgentId, u32> = BTreeMap::new();
    for _ in 0..150 {
        let percepts = ids
            .iter()
            .map(|&a| (a, world.percept(a).unwrap()))
            .collect();
        let actions = team.decide(&percepts);
        for (id, agent) in team.agents() {
            let run = idle_run.entry(*id).or_default();
            *run = if agent.target.is_some() { 0 } else { *run + 1 };
            assert!(
                *run <= 2,
                "agent {id} targetless for {run} steps at step {}",
                world.step_count()
            );
        }
        world.step(&actions).unwrap();
        if world.cows().is_empty() {
            break;
        }
    }
}

#[test]
fn own_switch_hold_does_not_make_the_fence_crossable() {
    let world = load_map(maps::FENCE_GAP).unwrap();
    let me = AgentId(0);
    let mut b = full_beliefs(&world, me);
    let fence = *world.fences().keys().next().unwrap();
    b.merge(&Fact::Fence {
        id: fence,
        open: true,
        step: 1,
    });
    b.merge(&Fact::Ally {
        id: me,
        seen: Sighting {
            pos: Some(Position::new(7, 6)),
            step: 1,
        },
    });
    assert!(!b.fence_crossable(fence));
    b.merge(&Fact::Ally {
        id: AgentId(1),
        seen: Sighting {
            pos: Some(Position::new(11, 4)),
            step: 1,
        },
    });
    assert!(b.fence_crossable(fence));
}
