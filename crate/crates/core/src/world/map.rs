//! ASCII map documents.
//!
//! ```text
//! 7 5 8          <- width height field-of-view radius
//! #######
//! #A..c1#        <- `height` rows of `width` characters
//! #..F.1#
//! #S.F.S#
//! #######
//! c 2 3          <- optional overlay lines: `c|A|B x y`
//! ```
//!
//! `.` empty, `#` obstacle, `1`/`2` corral of team 1/2, `F` fence segment,
//! `S` switch, `c` cow, `A`/`B` agent of team 1/2. Cows and agents stand on
//! empty ground. Connected runs of `F` (8-connectivity) form one fence each;
//! every switch belongs to the fence whose nearest segment is closest to it,
//! and every fence needs exactly two switches. Cow and agent ids follow
//! row-major order of their starting cells, overlay entities included.

use std::collections::BTreeMap;

use thiserror::Error;

use super::types::{FenceId, Position, TeamId, Terrain};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct MapError {
    pub line: usize,
    pub column: usize,
    pub kind: MapErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapErrorKind {
    #[error("header must be `width height R_fov`")]
    BadHeader,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown character `{0}`")]
    UnknownChar(char),
    #[error("fence has {0} switches, expected 2")]
    SwitchCount(usize),
    #[error("switch is not near any fence")]
    OrphanSwitch,
    #[error("switch is equally close to two fences")]
    AmbiguousSwitch,
    #[error("entity on obstacle")]
    EntityOnObstacle,
    #[error("two entities on one cell")]
    EntityCollision,
    #[error("overlay line must be `c|A|B x y` inside the map")]
    BadOverlay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Spawn {
    Cow,
    Agent(TeamId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct FenceLayout {
    pub segments: Vec<Position>,
    pub switches: [Position; 2],
}

#[derive(Clone, Debug)]
pub(crate) struct MapLayout {
    pub width: i32,
    pub height: i32,
    pub r_fov: i32,
    pub terrain: Vec<Terrain>,
    /// Row-major.
    pub spawns: Vec<(Position, Spawn)>,
    pub fences: BTreeMap<FenceId, FenceLayout>,
}

fn err(line: usize, column: usize, kind: MapErrorKind) -> MapError {
    MapError { line, column, kind }
}

pub(crate) fn parse_map(text: &str) -> Result<MapLayout, MapError> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    let header = lines
        .first()
        .ok_or_else(|| err(1, 1, MapErrorKind::BadHeader))?;
    let nums: Vec<i64> = header
        .split_whitespace()
        .map(|t| t.parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| err(1, 1, MapErrorKind::BadHeader))?;
    let (width, height, r_fov) = match nums[..] {
        [w, h, r] if w >= 1 && h >= 1 && r >= 0 && w <= 10_000 && h <= 10_000 => {
            (w as i32, h as i32, r as i32)
        }
        _ => return Err(err(1, 1, MapErrorKind::BadHeader)),
    };

    let w = width as usize;
    let h = height as usize;
    let mut terrain = vec![Terrain::Empty; w * h];
    let mut is_fence = vec![false; w * h];
    let mut switches = Vec::new();
    let mut spawns: BTreeMap<(i32, i32), (Spawn, usize, usize)> = BTreeMap::new();

    for row in 0..h {
        let line_no = row + 2;
        let Some(line) = lines.get(row + 1) else {
            return Err(err(
                line_no,
                1,
                MapErrorKind::DimensionMismatch {
                    expected: h,
                    found: row,
                },
            ));
        };
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != w {
            return Err(err(
                line_no,
                chars.len().min(w) + 1,
                MapErrorKind::DimensionMismatch {
                    expected: w,
                    found: chars.len(),
                },
            ));
        }
        for (col, ch) in chars.into_iter().enumerate() {
            let idx = row * w + col;
            let pos = Position::new(col as i32, row as i32);
            let spawn = match ch {
                '.' => None,
                '#' => {
                    terrain[idx] = Terrain::Obstacle;
                    None
                }
                '1' => {
                    terrain[idx] = Terrain::Corral(TeamId::ONE);
                    None
                }
                '2' => {
                    terrain[idx] = Terrain::Corral(TeamId::TWO);
                    None
                }
                'F' => {
                    is_fence[idx] = true;
                    None
                }
                'S' => {
                    switches.push((pos, line_no, col + 1));
                    None
                }
                'c' => Some(Spawn::Cow),
                'A' => Some(Spawn::Agent(TeamId::ONE)),
                'B' => Some(Spawn::Agent(TeamId::TWO)),
                other => return Err(err(line_no, col + 1, MapErrorKind::UnknownChar(other))),
            };
            if let Some(s) = spawn {
                spawns.insert(pos.row_major(), (s, line_no, col + 1));
            }
        }
    }

    for (i, line) in lines.iter().enumerate().skip(h + 1) {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || err(line_no, 1, MapErrorKind::BadOverlay);
        let [kind, x, y] = parts[..] else {
            return Err(bad());
        };
        let spawn = match kind {
            "c" => Spawn::Cow,
            "A" => Spawn::Agent(TeamId::ONE),
            "B" => Spawn::Agent(TeamId::TWO),
            _ => return Err(bad()),
        };
        let x: i32 = x.parse().map_err(|_| bad())?;
        let y: i32 = y.parse().map_err(|_| bad())?;
        if !(0..width).contains(&x) || !(0..height).contains(&y) {
            return Err(bad());
        }
        let idx = (y * width + x) as usize;
        if matches!(terrain[idx], Terrain::Obstacle) || is_fence[idx] {
            return Err(err(line_no, 1, MapErrorKind::EntityOnObstacle));
        }
        if spawns.insert((y, x), (spawn, line_no, 1)).is_some() {
            return Err(err(line_no, 1, MapErrorKind::EntityCollision));
        }
    }

    // Fence components, labelled in row-major order of their first segment.
    let mut label = vec![usize::MAX; w * h];
    let mut components: Vec<Vec<Position>> = Vec::new();
    for start in 0..w * h {
        if !is_fence[start] || label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(idx) = stack.pop() {
            let p = Position::new((idx % w) as i32, (idx / w) as i32);
            members.push(p);
            for n in p.neighbors() {
                if n.x < 0 || n.y < 0 || n.x >= width || n.y >= height {
                    continue;
                }
                let ni = (n.y * width + n.x) as usize;
                if is_fence[ni] && label[ni] == usize::MAX {
                    label[ni] = id;
                    stack.push(ni);
                }
            }
        }
        members.sort_by_key(|p| p.row_major());
        components.push(members);
    }

    let mut owned: Vec<Vec<Position>> = vec![Vec::new(); components.len()];
    for &(s, line_no, col) in &switches {
        let mut best: Option<(i32, usize)> = None;
        let mut tie = false;
        for (id, segs) in components.iter().enumerate() {
            let d = segs.iter().map(|&p| p.cheb(s)).min().unwrap_or(i32::MAX);
            match best {
                Some((bd, _)) if d > bd => {}
                Some((bd, _)) if d == bd => tie = true,
                _ => {
                    best = Some((d, id));
                    tie = false;
                }
            }
        }
        match best {
            None => return Err(err(line_no, col, MapErrorKind::OrphanSwitch)),
            Some(_) if tie => return Err(err(line_no, col, MapErrorKind::AmbiguousSwitch)),
            Some((_, id)) => owned[id].push(s),
        }
    }

    let mut fences = BTreeMap::new();
    for (id, (segments, sw)) in components.into_iter().zip(owned).enumerate() {
        let first = segments[0];
        if sw.len() != 2 {
            return Err(err(
                first.y as usize + 2,
                first.x as usize + 1,
                MapErrorKind::SwitchCount(sw.len()),
            ));
        }
        let fid = FenceId(id as u32);
        for &p in &segments {
            terrain[(p.y * width + p.x) as usize] = Terrain::FenceSegment(fid);
        }
        for &p in &sw {
            terrain[(p.y * width + p.x) as usize] = Terrain::SwitchCell(fid);
        }
        fences.insert(
            fid,
            FenceLayout {
                segments,
                switches: [sw[0], sw[1]],
            },
        );
    }

    let spawns = spawns
        .into_iter()
        .map(|((y, x), (s, _, _))| (Position::new(x, y), s))
        .collect();

    Ok(MapLayout {
        width,
        height,
        r_fov,
        terrain,
        spawns,
        fences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_empty_map() {
        let m = parse_map("3 3 8\n...\n...\n...\n").unwrap();
        assert_eq!(m.terrain, vec![Terrain::Empty; 9]);
        assert!(m.spawns.is_empty());
        assert!(m.fences.is_empty());
    }

    #[test]
    fn trailing_newline_optional() {
        assert!(parse_map("2 1 1\n..").is_ok());
    }

    #[test]
    fn vertical_fence_with_two_switches() {
        let text = "5 5 8\n.....\n.SF..\n..F..\n..FS.\n.....\n";
        let m = parse_map(text).unwrap();
        assert_eq!(m.fences.len(), 1);
        let f = &m.fences[&FenceId(0)];
        assert_eq!(f.segments.len(), 3);
        assert_eq!(f.switches, [Position::new(1, 1), Position::new(3, 3)]);
    }

    #[test]
    fn errors_carry_line_and_column() {
        let e = parse_map("3 2 8\n...\n.x.\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 2));
        assert_eq!(e.kind, MapErrorKind::UnknownChar('x'));

        let e = parse_map("3 2 8\n...\n....\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(matches!(
            e.kind,
            MapErrorKind::DimensionMismatch {
                expected: 3,
                found: 4
            }
        ));

        let e = parse_map("3 3 8\n...\n...\n").unwrap_err();
        assert!(matches!(
            e.kind,
            MapErrorKind::DimensionMismatch {
                expected: 3,
                found: 2
            }
        ));

        let e = parse_map("3 x 8\n").unwrap_err();
        assert_eq!(e.kind, MapErrorKind::BadHeader);
    }

    #[test]
    fn fence_switch_count_checked() {
        let e = parse_map("3 3 8\n.F.\n.F.\nS..\n").unwrap_err();
        assert_eq!(e.kind, MapErrorKind::SwitchCount(1));
        assert_eq!((e.line, e.column), (2, 2));

        let e = parse_map("3 1 8\nS..\n").unwrap_err();
        assert_eq!(e.kind, MapErrorKind::OrphanSwitch);
    }

    #[test]
    fn overlay_entity_on_obstacle() {
        let e = parse_map("3 3 8\n...\n.#.\n...\nc 1 1\n").unwrap_err();
        assert_eq!(e.kind, MapErrorKind::EntityOnObstacle);
        assert_eq!(e.line, 5);

        let e = parse_map("3 3 8\nc..\n...\n...\nA 0 0\n").unwrap_err();
        assert_eq!(e.kind, MapErrorKind::EntityCollision);
    }

    #[test]
    fn overlay_entities_join_row_major_order() {
        let m = parse_map("3 2 8\n..c\n...\nc 0 0\nA 1 1\n").unwrap();
        let order: Vec<Position> = m.spawns.iter().map(|s| s.0).collect();
        assert_eq!(
            order,
            vec![
                Position::new(0, 0),
                Position::new(2, 0),
                Position::new(1, 1)
            ]
        );
    }
}
