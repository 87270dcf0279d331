//! Weighted 8-connected shortest paths over an agent's believed map.
//!
//! Entering a cell costs that cell's weight; the start cell is free. Cows
//! and their neighbourhood are expensive so agents walk around herds instead
//! of scattering them, obstacles and closed fences are impassable.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use thiserror::Error;

use crate::agents::BeliefBase;
use crate::config::Params;
use crate::world::{Action, FenceId, Position, Terrain};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightGrid {
    width: i32,
    height: i32,
    cost: Vec<Option<u32>>,
}

impl WeightGrid {
    /// Every cell passable at cost 1.
    pub fn uniform(width: i32, height: i32) -> Self {
        Self {
            width,
            height,
            cost: vec![Some(1); (width * height) as usize],
        }
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    fn index(&self, p: Position) -> usize {
        (p.y * self.width + p.x) as usize
    }

    /// Cost of entering `p`; `None` when impassable or out of bounds.
    pub fn cost(&self, p: Position) -> Option<u32> {
        if self.in_bounds(p) {
            self.cost[self.index(p)]
        } else {
            None
        }
    }

    pub fn passable(&self, p: Position) -> bool {
        self.cost(p).is_some()
    }

    /// Sets a cell's cost. Costs below 1 are raised to 1 to keep the heuristic admissible.
    pub fn set(&mut self, p: Position, cost: Option<u32>) {
        let i = self.index(p);
        self.cost[i] = cost.map(|c| c.max(1));
    }

    fn add(&mut self, p: Position, extra: u32) {
        if self.in_bounds(p) {
            let i = self.index(p);
            if let Some(c) = self.cost[i].as_mut() {
                *c += extra;
            }
        }
    }
}

/// How believed-closed fences are treated when building a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FencePolicy {
    /// Fences are walls unless believed open and held by someone else.
    AsBelieved,
    /// Every fence counts as passable, as if a teammate held it open.
    AllOpen,
    /// Only the given fence is treated as open.
    Open(FenceId),
}

/// Weight grid from beliefs: base 1, unknown cells `w_unknown`, `+w_cow` on a
/// believed cow, `+w_adj` per adjacent believed cow; obstacles and closed
/// fences impassable.
pub fn build_weight_grid(beliefs: &BeliefBase, params: &Params) -> WeightGrid {
    build_weight_grid_with(beliefs, params, FencePolicy::AsBelieved)
}

pub fn build_weight_grid_with(
    beliefs: &BeliefBase,
    params: &Params,
    fences: FencePolicy,
) -> WeightGrid {
    let (w, h) = (beliefs.width(), beliefs.height());
    let mut grid = WeightGrid {
        width: w,
        height: h,
        cost: Vec::with_capacity((w * h) as usize),
    };
    let mut crossable = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            let cost = match beliefs.terrain(Position::new(x, y)) {
                None => Some(params.w_unknown),
                Some(Terrain::Obstacle) => None,
                Some(Terrain::FenceSegment(f)) => {
                    let open = match fences {
                        FencePolicy::AsBelieved => *crossable
                            .entry(f)
                            .or_insert_with(|| beliefs.fence_crossable(f)),
                        FencePolicy::AllOpen => true,
                        FencePolicy::Open(g) => {
                            g == f
                                || *crossable
                                    .entry(f)
                                    .or_insert_with(|| beliefs.fence_crossable(f))
                        }
                    };
                    open.then_some(1)
                }
                Some(_) => Some(1),
            };
            grid.cost.push(cost);
        }
    }
    for (_, p) in beliefs.cows() {
        grid.add(p, params.w_cow);
        for n in p.neighbors() {
            grid.add(n, params.w_adj);
        }
    }
    grid
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    /// From start to goal inclusive.
    pub cells: Vec<Position>,
    /// Sum of the weights of every cell after the first.
    pub cost: u64,
}

impl Path {
    pub fn start(&self) -> Position {
        self.cells[0]
    }

    pub fn goal(&self) -> Position {
        *self.cells.last().expect("path is never empty")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("endpoint {0} is outside the grid")]
    OutOfBounds(Position),
}

/// Minimum-cost path with the Chebyshev heuristic.
///
/// Returns `Ok(None)` when either endpoint is impassable or the goal is
/// unreachable. Frontier
/// ties on `f` prefer the smaller `h`, then the row-major smaller cell.
pub fn astar(
    grid: &WeightGrid,
    start: Position,
    goal: Position,
) -> Result<Option<Path>, PathError> {
    for p in [start, goal] {
        if !grid.in_bounds(p) {
            return Err(PathError::OutOfBounds(p));
        }
    }
    if !grid.passable(start) {
        return Ok(None);
    }
    if start == goal {
        return Ok(Some(Path {
            cells: vec![start],
            cost: 0,
        }));
    }
    if !grid.passable(goal) {
        return Ok(None);
    }

    let n = (grid.width * grid.height) as usize;
    let mut g = vec![u64::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let h = |p: Position| p.cheb(goal) as u64;
    let si = grid.index(start);
    g[si] = 0;
    open.push(Reverse((h(start), h(start), si)));

    let gi = grid.index(goal);
    while let Some(Reverse((_, _, idx))) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == gi {
            break;
        }
        let p = Position::new(idx as i32 % grid.width, idx as i32 / grid.width);
        for q in p.neighbors() {
            let Some(c) = grid.cost(q) else { continue };
            let qi = grid.index(q);
            if closed[qi] {
                continue;
            }
            let cand = g[idx] + c as u64;
            if cand < g[qi] {
                g[qi] = cand;
                parent[qi] = idx;
                let hq = h(q);
                open.push(Reverse((cand + hq, hq, qi)));
            }
        }
    }

    if g[gi] == u64::MAX {
        return Ok(None);
    }
    let mut cells = vec![goal];
    let mut cur = gi;
    while cur != si {
        cur = parent[cur];
        cells.push(Position::new(
            cur as i32 % grid.width,
            cur as i32 / grid.width,
        ));
    }
    cells.reverse();
    Ok(Some(Path { cells, cost: g[gi] }))
}

/// Single-source cost-to-reach for every cell (`None` when unreachable,
/// everywhere when `start` itself is impassable).
pub fn cost_field(grid: &WeightGrid, start: Position) -> Vec<Option<u64>> {
    let n = (grid.width * grid.height) as usize;
    let mut dist = vec![u64::MAX; n];
    if !grid.passable(start) {
        return vec![None; n];
    }
    let mut heap = BinaryHeap::new();
    let si = grid.index(start);
    dist[si] = 0;
    heap.push(Reverse((0u64, si)));
    while let Some(Reverse((d, idx))) = heap.pop() {
        if d > dist[idx] {
            continue;
        }
        let p = Position::new(idx as i32 % grid.width, idx as i32 / grid.width);
        for q in p.neighbors() {
            let Some(c) = grid.cost(q) else { continue };
            let qi = grid.index(q);
            let nd = d + c as u64;
            if nd < dist[qi] {
                dist[qi] = nd;
                heap.push(Reverse((nd, qi)));
            }
        }
    }
    dist.into_iter()
        .map(|d| (d != u64::MAX).then_some(d))
        .collect()
}

/// Row-major index helper matching [`cost_field`]'s layout.
pub fn field_at(field: &[Option<u64>], grid: &WeightGrid, p: Position) -> Option<u64> {
    if grid.in_bounds(p) {
        field[grid.index(p)]
    } else {
        None
    }
}

/// The agent is not on the path, or is already at its end.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("stale path at {0}")]
pub struct StalePath(pub Position);

/// The move toward the cell after `current`.
pub fn path_next(path: &Path, current: Position) -> Result<Action, StalePath> {
    let i = path
        .cells
        .iter()
        .position(|&c| c == current)
        .ok_or(StalePath(current))?;
    let next = path.cells.get(i + 1).ok_or(StalePath(current))?;
    current
        .direction_to(*next)
        .map(Action::Move)
        .ok_or(StalePath(current))
}
