//! Frontier-based exploration target selection.

use std::cmp::Ordering;

use thiserror::Error;

use super::BeliefBase;
use crate::config::Params;
use crate::pathfind::{build_weight_grid_with, cost_field, field_at, FencePolicy};
use crate::world::{Position, Terrain};

/// Nothing left worth exploring.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("exploration complete")]
pub struct ExplorationComplete;

/// Known cells that can be stood on and touch at least one unknown cell.
pub fn frontier_cells(beliefs: &BeliefBase) -> Vec<Position> {
    let mut out = Vec::new();
    for y in 0..beliefs.height() {
        for x in 0..beliefs.width() {
            let p = Position::new(x, y);
            let standable = matches!(
                beliefs.terrain(p),
                Some(Terrain::Empty | Terrain::Corral(_) | Terrain::SwitchCell(_))
            );
            if standable
                && p.neighbors()
                    .any(|n| beliefs.in_bounds(n) && !beliefs.is_known(n))
            {
                out.push(p);
            }
        }
    }
    out
}

/// Unknown-cell counts over Chebyshev windows, answered in O(1) from prefix sums.
pub struct UnknownDensity {
    width: i32,
    height: i32,
    sums: Vec<u32>,
}

impl UnknownDensity {
    pub fn new(beliefs: &BeliefBase) -> Self {
        let (w, h) = (beliefs.width(), beliefs.height());
        let stride = (w + 1) as usize;
        let mut sums = vec![0u32; stride * (h + 1) as usize];
        for y in 0..h {
            for x in 0..w {
                let unknown = !beliefs.is_known(Position::new(x, y)) as u32;
                let (xu, yu) = (x as usize, y as usize);
                sums[(yu + 1) * stride + xu + 1] =
                    unknown + sums[yu * stride + xu + 1] + sums[(yu + 1) * stride + xu]
                        - sums[yu * stride + xu];
            }
        }
        Self {
            width: w,
            height: h,
            sums,
        }
    }

    /// Unknown cells within Chebyshev `r` of `c`.
    pub fn gain(&self, c: Position, r: i32) -> u32 {
        let x0 = (c.x - r).max(0) as usize;
        let y0 = (c.y - r).max(0) as usize;
        let x1 = ((c.x + r).min(self.width - 1) + 1) as usize;
        let y1 = ((c.y + r).min(self.height - 1) + 1) as usize;
        if x0 >= x1 || y0 >= y1 {
            return 0;
        }
        let stride = (self.width + 1) as usize;
        self.sums[y1 * stride + x1] + self.sums[y0 * stride + x0]
            - self.sums[y0 * stride + x1]
            - self.sums[y1 * stride + x0]
    }
}

/// A scored exploration candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub pos: Position,
    pub gain: u32,
    pub cost: u64,
}

impl Candidate {
    /// Compares `gain / max(1, cost)` exactly; higher is better.
    fn rate_cmp(&self, other: &Candidate) -> Ordering {
        let lhs = self.gain as u128 * other.cost.max(1) as u128;
        let rhs = other.gain as u128 * self.cost.max(1) as u128;
        lhs.cmp(&rhs)
    }
}

/// Best gain rate; ties go to the row-major smallest position.
pub fn pick_by_gain_rate(cands: &[Candidate]) -> Option<Candidate> {
    cands.iter().copied().fold(None, |best, c| match best {
        None => Some(c),
        Some(b) => match c.rate_cmp(&b) {
            Ordering::Greater => Some(c),
            Ordering::Equal if c.pos.row_major() < b.pos.row_major() => Some(c),
            _ => Some(b),
        },
    })
}

/// Reachable frontier candidates scored from `from`, skipping anything for
/// which `excluded` returns true.
pub fn exploration_candidates(
    beliefs: &BeliefBase,
    params: &Params,
    from: Position,
    excluded: impl Fn(Position) -> bool,
) -> Vec<Candidate> {
    let frontier = frontier_cells(beliefs);
    if frontier.is_empty() {
        return Vec::new();
    }
    let grid = build_weight_grid_with(beliefs, params, FencePolicy::AllOpen);
    let field = cost_field(&grid, from);
    let density = UnknownDensity::new(beliefs);
    frontier
        .into_iter()
        .filter(|&p| !excluded(p))
        .filter_map(|p| {
            let cost = field_at(&field, &grid, p)?;
            let gain = density.gain(p, beliefs.r_fov());
            (gain > 0).then_some(Candidate { pos: p, gain, cost })
        })
        .collect()
}

/// The scout's own choice: the reachable frontier cell with the best ratio
/// of unknown cells in view to path cost.
pub fn scout_next_target(
    beliefs: &BeliefBase,
    params: &Params,
) -> Result<Position, ExplorationComplete> {
    if beliefs.unknown_count() == 0 {
        return Err(ExplorationComplete);
    }
    let cands = exploration_candidates(beliefs, params, beliefs.self_pos(), |_| false);
    pick_by_gain_rate(&cands)
        .map(|c| c.pos)
        .ok_or(ExplorationComplete)
}

/// Like [`scout_next_target`], but never within the field-of-view radius of
/// `taken`. `Ok(None)` means every remaining frontier cell is already covered.
pub fn scout_target_avoiding(
    beliefs: &BeliefBase,
    params: &Params,
    taken: &[Position],
) -> Result<Option<Position>, ExplorationComplete> {
    if beliefs.unknown_count() == 0 {
        return Err(ExplorationComplete);
    }
    let r = beliefs.r_fov();
    let cands = exploration_candidates(beliefs, params, beliefs.self_pos(), |_| false);
    if cands.is_empty() {
        return Err(ExplorationComplete);
    }
    let spread: Vec<Candidate> = cands
        .into_iter()
        .filter(|c| taken.iter().all(|t| t.cheb(c.pos) > r))
        .collect();
    Ok(pick_by_gain_rate(&spread).map(|c| c.pos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{load_map, AgentId, TeamId};

    #[test]
    fn gain_rate_prefers_cheap_small_gain() {
        let a = Candidate {
            pos: Position::new(1, 1),
            gain: 30,
            cost: 10,
        };
        let b = Candidate {
            pos: Position::new(5, 5),
            gain: 12,
            cost: 3,
        };
        assert_eq!(pick_by_gain_rate(&[a, b]), Some(b));
        assert_eq!(pick_by_gain_rate(&[b, a]), Some(b));
    }

    #[test]
    fn gain_rate_ties_go_row_major() {
        let a = Candidate {
            pos: Position::new(5, 2),
            gain: 10,
            cost: 5,
        };
        let b = Candidate {
            pos: Position::new(9, 1),
            gain: 4,
            cost: 2,
        };
        assert_eq!(pick_by_gain_rate(&[a, b]), Some(b));
        assert_eq!(pick_by_gain_rate(&[]), None);
    }

    fn scout_on_blank(w: i32, h: i32, at: Position) -> BeliefBase {
        let mut text = format!("{w} {h} 8\n");
        for y in 0..h {
            for x in 0..w {
                text.push(if Position::new(x, y) == at { 'A' } else { '.' });
            }
            text.push('\n');
        }
        let world = load_map(&text).unwrap();
        let mut b = BeliefBase::new(w, h, 8, TeamId::ONE, AgentId(0), at);
        b.integrate_percept(&world.percept(AgentId(0)).unwrap());
        b
    }

    #[test]
    fn first_target_lies_on_window_rim() {
        let at = Position::new(15, 15);
        let b = scout_on_blank(40, 40, at);
        let t = scout_next_target(&b, &Params::default()).unwrap();
        assert_eq!(t.cheb(at), 8);
        assert!(frontier_cells(&b).iter().all(|p| p.cheb(at) == 8));
    }

    #[test]
    fn fully_known_map_completes() {
        let b = scout_on_blank(10, 10, Position::new(5, 5));
        assert_eq!(b.unknown_count(), 0);
        assert_eq!(
            scout_next_target(&b, &Params::default()),
            Err(ExplorationComplete)
        );
    }

    #[test]
    fn density_matches_brute_force() {
        let b = scout_on_blank(30, 20, Position::new(3, 4));
        let d = UnknownDensity::new(&b);
        for (x, y, r) in [(0, 0, 8), (12, 10, 8), (29, 19, 3), (15, 2, 0)] {
            let c = Position::new(x, y);
            let brute = (0..20)
                .flat_map(|yy| (0..30).map(move |xx| Position::new(xx, yy)))
                .filter(|&p| p.cheb(c) <= r && !b.is_known(p))
                .count() as u32;
            assert_eq!(d.gain(c, r), brute);
        }
    }
}
