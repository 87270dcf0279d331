//! Standoff positions behind a herd, on the far side from the corral.

use thiserror::Error;

use super::BeliefBase;
use crate::cluster::Cluster;
use crate::world::Position;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cluster has no members")]
pub struct EmptyCluster;

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

fn as_f(p: Position) -> (f64, f64) {
    (p.x as f64, p.y as f64)
}

/// Squared Euclidean distance from a point to the closest corral cell.
fn corral_dist2(corral: &[Position], q: (f64, f64)) -> f64 {
    corral
        .iter()
        .map(|&c| dist2(as_f(c), q))
        .fold(f64::INFINITY, f64::min)
}

/// Corral cell nearest to `q`; row-major on ties.
pub fn nearest_corral(corral: &[Position], q: (f64, f64)) -> Option<Position> {
    corral.iter().copied().min_by(|a, b| {
        dist2(as_f(*a), q)
            .total_cmp(&dist2(as_f(*b), q))
            .then(a.row_major().cmp(&b.row_major()))
    })
}

/// `k` slots spread over `±spread_deg` around the ray from the nearest
/// corral cell through the centroid, at the cluster radius plus `d_gap`.
///
/// Each slot is rounded to a cell and snapped to the closest believed
/// passable, cow-free cell within Chebyshev 2 that is still farther from the
/// corral than the centroid. When nothing qualifies the slot is retried one
/// cell closer along its ray, down to distance 1. Slots that never snap are
/// dropped, and so are duplicates.
pub fn formation_slots(
    c: &Cluster,
    corral: &[Position],
    k: usize,
    beliefs: &BeliefBase,
    d_gap: i32,
    spread_deg: f64,
) -> Result<Vec<Position>, EmptyCluster> {
    if c.is_empty() {
        return Err(EmptyCluster);
    }
    let Some(anchor) = nearest_corral(corral, c.centroid) else {
        return Ok(Vec::new());
    };
    let (mut ux, mut uy) = (
        c.centroid.0 - anchor.x as f64,
        c.centroid.1 - anchor.y as f64,
    );
    let len = (ux * ux + uy * uy).sqrt();
    if len < 1e-9 {
        (ux, uy) = (1.0, 0.0);
    } else {
        (ux, uy) = (ux / len, uy / len);
    }
    let d = (c.bbox.radius() + d_gap) as f64;
    let centroid_gap = corral_dist2(corral, c.centroid);

    let angles: Vec<f64> = if k <= 1 {
        vec![0.0]
    } else {
        (0..k)
            .map(|i| -spread_deg + 2.0 * spread_deg * i as f64 / (k - 1) as f64)
            .collect()
    };

    let snap = |nominal: Position| {
        let mut best: Option<(i32, i64, (i32, i32), Position)> = None;
        for dy in -2..=2 {
            for dx in -2..=2 {
                let q = Position::new(nominal.x + dx, nominal.y + dy);
                if !beliefs.believed_passable(q)
                    || beliefs.cow_at(q)
                    || corral_dist2(corral, as_f(q)) <= centroid_gap
                {
                    continue;
                }
                let key = (
                    q.cheb(nominal),
                    (dx * dx + dy * dy) as i64,
                    q.row_major(),
                    q,
                );
                if best.is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                    best = Some(key);
                }
            }
        }
        best.map(|b| b.3)
    };

    let mut slots: Vec<Position> = Vec::with_capacity(k);
    for deg in angles {
        let (s, co) = deg.to_radians().sin_cos();
        let (rx, ry) = (ux * co - uy * s, ux * s + uy * co);
        // Slide toward the herd when the full standoff lands in a wall or off the map.
        let found = (1..=d as i32).rev().find_map(|r| {
            let r = r as f64;
            snap(Position::new(
                (c.centroid.0 + r * rx).round() as i32,
                (c.centroid.1 + r * ry).round() as i32,
            ))
        });
        if let Some(q) = found {
            if !slots.contains(&q) {
                slots.push(q);
            }
        }
    }
    Ok(slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{Cluster, ClusterId};
    use crate::world::{load_map, AgentId, CowId, TeamId};

    fn beliefs_of(text: &str) -> BeliefBase {
        let world = load_map(text).unwrap();
        let me = AgentId(0);
        let mut b = BeliefBase::new(
            world.width(),
            world.height(),
            world.r_fov(),
            TeamId::ONE,
            me,
            world.agents()[&me].pos,
        );
        b.integrate_percept(&world.percept(me).unwrap());
        b
    }

    fn open_field() -> String {
        let mut s = String::from("21 21 30\n");
        for y in 0..21 {
            for x in 0..21 {
                s.push(match (x, y) {
                    (0, 10) => '1',
                    (20, 20) => 'A',
                    _ => '.',
                });
            }
            s.push('\n');
        }
        s
    }

    #[test]
    fn single_slot_directly_behind() {
        let b = beliefs_of(&open_field());
        let c = Cluster::new(ClusterId(0), vec![(CowId(0), Position::new(10, 10))]);
        let slots = formation_slots(&c, &[Position::new(0, 10)], 1, &b, 3, 60.0).unwrap();
        assert_eq!(slots, vec![Position::new(13, 10)]);
    }

    #[test]
    fn three_slots_on_sixty_degree_arc() {
        let b = beliefs_of(&open_field());
        let c = Cluster::new(ClusterId(0), vec![(CowId(0), Position::new(10, 10))]);
        let slots = formation_slots(&c, &[Position::new(0, 10)], 3, &b, 5, 60.0).unwrap();
        // d = 5: (10 + 5cos60, 10 -+ 5sin60) = (12.5, 5.67 / 14.33) -> rounded.
        assert_eq!(
            slots,
            vec![
                Position::new(13, 6),
                Position::new(15, 10),
                Position::new(13, 14)
            ]
        );
    }

    #[test]
    fn walled_slot_snaps_or_drops() {
        // The nominal slot (13,10) is an obstacle; the four orthogonal neighbours tie
        // and the row-major first wins.
        let mut lines: Vec<String> = open_field().lines().map(String::from).collect();
        lines[11].replace_range(13..14, "#");
        let b = beliefs_of(&lines.join("\n"));
        let c = Cluster::new(ClusterId(0), vec![(CowId(0), Position::new(10, 10))]);
        let slots = formation_slots(&c, &[Position::new(0, 10)], 1, &b, 3, 60.0).unwrap();
        assert_eq!(slots, vec![Position::new(13, 9)]);

        // Wall the 5x5 box around the nominal slot: the slot slides in to (10,9).
        for y in 8..=12 {
            lines[y + 1].replace_range(11..16, "#####");
        }
        let b = beliefs_of(&lines.join("\n"));
        let slots = formation_slots(&c, &[Position::new(0, 10)], 1, &b, 3, 60.0).unwrap();
        assert_eq!(slots, vec![Position::new(10, 9)]);

        // Wall the whole far side: nothing is farther from the corral, dropped.
        for line in lines.iter_mut().skip(1).take(20) {
            line.replace_range(10..21, "###########");
        }
        let b = beliefs_of(&lines.join("\n"));
        let slots = formation_slots(&c, &[Position::new(0, 10)], 1, &b, 3, 60.0).unwrap();
        assert!(slots.is_empty());
    }
}
