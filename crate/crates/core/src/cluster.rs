//! Herds: connected groups of believed cows, capped in size and ranked by
//! how cheaply they can be driven home.

use crate::pathfind::{cost_field, field_at, WeightGrid};
use crate::world::{CowId, Position};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BBox {
    pub min: Position,
    pub max: Position,
}

impl BBox {
    pub fn width(&self) -> i32 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> i32 {
        self.max.y - self.min.y
    }

    /// Half the diagonal, rounded up.
    pub fn radius(&self) -> i32 {
        let d2 = (self.width() * self.width() + self.height() * self.height()) as f64;
        (d2.sqrt() / 2.0).ceil() as i32
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub id: ClusterId,
    /// Sorted row-major by position.
    pub members: Vec<(CowId, Position)>,
    pub centroid: (f64, f64),
    pub bbox: BBox,
}

impl Cluster {
    /// Builds a cluster from a non-empty member list.
    pub fn new(id: ClusterId, mut members: Vec<(CowId, Position)>) -> Self {
        assert!(!members.is_empty(), "cluster needs members");
        members.sort_by_key(|&(c, p)| (p.row_major(), c));
        let n = members.len() as f64;
        let sx: i64 = members.iter().map(|m| m.1.x as i64).sum();
        let sy: i64 = members.iter().map(|m| m.1.y as i64).sum();
        let min = Position::new(
            members.iter().map(|m| m.1.x).min().unwrap_or(0),
            members.iter().map(|m| m.1.y).min().unwrap_or(0),
        );
        let max = Position::new(
            members.iter().map(|m| m.1.x).max().unwrap_or(0),
            members.iter().map(|m| m.1.y).max().unwrap_or(0),
        );
        Self {
            id,
            members,
            centroid: (sx as f64 / n, sy as f64 / n),
            bbox: BBox { min, max },
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Centroid rounded to the nearest cell.
    pub fn center_cell(&self) -> Position {
        Position::new(
            self.centroid.0.round() as i32,
            self.centroid.1.round() as i32,
        )
    }

    fn min_member(&self) -> Position {
        self.members[0].1
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Connected components under "Chebyshev distance ≤ `link`". Ids follow
/// row-major order of each cluster's first member.
pub fn cluster_cows(cows: &[(CowId, Position)], link: i32) -> Vec<Cluster> {
    let mut sorted = cows.to_vec();
    sorted.sort_by_key(|&(c, p)| (p.row_major(), c));
    let mut dsu = DisjointSet::new(sorted.len());
    // Sorted by row, so the inner scan can stop once rows are too far apart.
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if sorted[j].1.y - sorted[i].1.y > link {
                break;
            }
            if sorted[i].1.cheb(sorted[j].1) <= link {
                dsu.union(i, j);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<(CowId, Position)>)> = Vec::new();
    for (i, &m) in sorted.iter().enumerate() {
        let root = dsu.find(i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(m),
            None => groups.push((root, vec![m])),
        }
    }
    // Groups were opened in row-major order of their first member.
    groups
        .into_iter()
        .enumerate()
        .map(|(i, (_, members))| Cluster::new(ClusterId(i as u32), members))
        .collect()
}

/// Recursively halves a cluster along its longer bounding-box axis until
/// every piece has at most `max_size` members.
pub fn split_cluster(c: &Cluster, max_size: usize) -> Vec<Cluster> {
    let max_size = max_size.max(1);
    if c.len() <= max_size {
        return vec![c.clone()];
    }
    let along_x = c.bbox.width() >= c.bbox.height();
    let mut members = c.members.clone();
    if along_x {
        members.sort_by_key(|&(id, p)| (p.x, p.y, id));
    } else {
        members.sort_by_key(|&(id, p)| (p.y, p.x, id));
    }
    let upper = members.split_off(members.len().div_ceil(2));
    let mut out = split_cluster(&Cluster::new(c.id, members), max_size);
    out.extend(split_cluster(&Cluster::new(c.id, upper), max_size));
    out
}

/// Clusters, splits and renumbers in row-major order of each piece's first member.
pub fn herds(cows: &[(CowId, Position)], link: i32, max_size: usize) -> Vec<Cluster> {
    let mut pieces: Vec<Cluster> = cluster_cows(cows, link)
        .iter()
        .flat_map(|c| split_cluster(c, max_size))
        .collect();
    pieces.sort_by_key(|c| (c.min_member().row_major(), c.members[0].0));
    for (i, c) in pieces.iter_mut().enumerate() {
        c.id = ClusterId(i as u32);
    }
    pieces
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedCluster {
    pub cluster: Cluster,
    /// Herding cost; `None` when no corral cell is reachable.
    pub score: Option<u64>,
}

/// Passable cell closest to `target` (Chebyshev rings, row-major ties).
pub fn nearest_passable(grid: &WeightGrid, target: Position) -> Option<Position> {
    let max_r = grid.width().max(grid.height());
    (0..=max_r).find_map(|r| {
        let mut ring: Vec<Position> = (target.y - r..=target.y + r)
            .flat_map(|y| (target.x - r..=target.x + r).map(move |x| Position::new(x, y)))
            .filter(|p| p.cheb(target) == r && grid.passable(*p))
            .collect();
        ring.sort_by_key(|p| p.row_major());
        ring.first().copied()
    })
}

/// Orders clusters by path cost from their centroid to the nearest corral
/// cell plus `p_opp` for every opponent within `r_opp` of the centroid.
/// Unreachable clusters go last; ties keep cluster-id order.
pub fn rank_clusters(
    clusters: &[Cluster],
    corral_cells: &[Position],
    grid: &WeightGrid,
    opponents: &[Position],
    p_opp: u64,
    r_opp: i32,
) -> Vec<RankedCluster> {
    let mut ranked: Vec<RankedCluster> = clusters
        .iter()
        .map(|c| {
            let score = nearest_passable(grid, c.center_cell()).and_then(|start| {
                let field = cost_field(grid, start);
                let to_corral = corral_cells
                    .iter()
                    .filter_map(|&q| field_at(&field, grid, q))
                    .min()?;
                let near = opponents
                    .iter()
                    .filter(|o| o.cheb(c.center_cell()) <= r_opp)
                    .count() as u64;
                Some(to_corral + p_opp * near)
            });
            RankedCluster {
                cluster: c.clone(),
                score,
            }
        })
        .collect();
    ranked.sort_by_key(|r| (r.score.is_none(), r.score, r.cluster.id));
    ranked
}
