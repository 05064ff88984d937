//! Grid geometry and the maximum independent set reference.
//!
//! Coordinates are 1-based: row 1 is the north boundary, column 1 the west
//! boundary. Every direction word used elsewhere in the crate refers to this
//! fixed global frame.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid must be at least 2x2, got {m}x{n}")]
    TooSmall { m: u32, n: u32 },
    #[error("row {row} out of range 1..={m}")]
    RowOutOfRange { row: u32, m: u32 },
    #[error("coordinate {coord} lies outside the {m}x{n} grid")]
    CoordOutOfRange { coord: Coord, m: u32, n: u32 },
    #[error("brute-force search limited to {limit} nodes, grid has {nodes}")]
    BudgetExceeded { nodes: u32, limit: u32 },
}

/// Dimensions of an `m x n` rectangular grid, both at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDims", into = "RawDims")]
pub struct GridDims {
    m: u32,
    n: u32,
}

#[derive(Serialize, Deserialize)]
struct RawDims {
    rows: u32,
    cols: u32,
}

impl TryFrom<RawDims> for GridDims {
    type Error = GridError;
    fn try_from(raw: RawDims) -> Result<Self, GridError> {
        GridDims::new(raw.rows, raw.cols)
    }
}

impl From<GridDims> for RawDims {
    fn from(d: GridDims) -> Self {
        RawDims {
            rows: d.m,
            cols: d.n,
        }
    }
}

impl GridDims {
    pub fn new(m: u32, n: u32) -> Result<Self, GridError> {
        if m < 2 || n < 2 {
            return Err(GridError::TooSmall { m, n });
        }
        Ok(Self { m, n })
    }

    /// Number of rows.
    pub fn rows(&self) -> u32 {
        self.m
    }

    /// Number of columns.
    pub fn cols(&self) -> u32 {
        self.n
    }

    pub fn node_count(&self) -> u32 {
        self.m * self.n
    }

    pub fn edge_count(&self) -> u32 {
        (self.m - 1) * self.n + self.m * (self.n - 1)
    }

    /// Size of a maximum independent set, which is also the robot count of a
    /// standard instance.
    pub fn mis_size(&self) -> usize {
        (self.node_count() as usize).div_ceil(2)
    }

    pub fn contains(&self, c: Coord) -> bool {
        (1..=self.m).contains(&c.i) && (1..=self.n).contains(&c.j)
    }

    pub fn check(&self, c: Coord) -> Result<(), GridError> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(GridError::CoordOutOfRange {
                coord: c,
                m: self.m,
                n: self.n,
            })
        }
    }

    /// Row-major index of `c`, starting at zero.
    pub fn index(&self, c: Coord) -> usize {
        debug_assert!(self.contains(c));
        ((c.i - 1) * self.n + (c.j - 1)) as usize
    }

    pub fn coord_at(&self, index: usize) -> Coord {
        let idx = index as u32;
        Coord::new(idx / self.n + 1, idx % self.n + 1)
    }

    /// All nodes in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.node_count() as usize).map(|k| self.coord_at(k))
    }

    /// Offsets a coordinate by a signed displacement, returning `None` when the
    /// result leaves the grid.
    pub fn offset(&self, c: Coord, di: i32, dj: i32) -> Option<Coord> {
        let i = c.i as i64 + di as i64;
        let j = c.j as i64 + dj as i64;
        if i < 1 || j < 1 || i > self.m as i64 || j > self.n as i64 {
            return None;
        }
        Some(Coord::new(i as u32, j as u32))
    }
}

impl fmt::Display for GridDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

/// A grid node `(i, j)`: row `i`, column `j`. Serialized as `[i, j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct Coord {
    pub i: u32,
    pub j: u32,
}

impl Coord {
    pub const fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }

    /// Whether the node belongs to the parity set `{(s, t) : s = t mod 2}`.
    pub fn on_target(&self) -> bool {
        self.i % 2 == self.j % 2
    }

    pub fn manhattan(&self, other: Coord) -> u32 {
        self.i.abs_diff(other.i) + self.j.abs_diff(other.j)
    }

    pub fn is_adjacent(&self, other: Coord) -> bool {
        self.manhattan(other) == 1
    }
}

impl From<(u32, u32)> for Coord {
    fn from((i, j): (u32, u32)) -> Self {
        Self { i, j }
    }
}

impl From<Coord> for (u32, u32) {
    fn from(c: Coord) -> Self {
        (c.i, c.j)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Light color of a robot. Red is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Green,
    Blue,
    Red,
}

impl Color {
    pub fn letter(self) -> char {
        match self {
            Color::Green => 'G',
            Color::Blue => 'B',
            Color::Red => 'R',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'G' => Some(Color::Green),
            'B' => Some(Color::Blue),
            'R' => Some(Color::Red),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Red => "red",
        })
    }
}

/// The parity set `S = {(s, t) : s = t mod 2}`, a maximum independent set of
/// the grid with `ceil(m*n/2)` nodes.
pub fn reference_mis(dims: GridDims) -> BTreeSet<Coord> {
    dims.coords().filter(Coord::on_target).collect()
}

/// Number of nodes of the reference set lying in row `i`.
pub fn row_quota(dims: GridDims, i: u32) -> Result<u32, GridError> {
    if !(1..=dims.rows()).contains(&i) {
        return Err(GridError::RowOutOfRange {
            row: i,
            m: dims.rows(),
        });
    }
    let n = dims.cols();
    Ok(if n.is_multiple_of(2) {
        n / 2
    } else if i % 2 == 1 {
        n.div_ceil(2)
    } else {
        (n - 1) / 2
    })
}

/// True iff `nodes` is independent and has the maximum possible size
/// `ceil(m*n/2)`.
pub fn is_maximum_independent(dims: GridDims, nodes: &BTreeSet<Coord>) -> Result<bool, GridError> {
    for &c in nodes {
        dims.check(c)?;
    }
    if nodes.len() != dims.mis_size() {
        return Ok(false);
    }
    // Only right and down neighbours need checking in a symmetric relation.
    let independent = nodes.iter().all(|&c| {
        [dims.offset(c, 0, 1), dims.offset(c, 1, 0)]
            .into_iter()
            .flatten()
            .all(|nb| !nodes.contains(&nb))
    });
    Ok(independent)
}

/// Node limit for [`brute_force_max_independent_size`].
pub const BRUTE_FORCE_NODE_LIMIT: u32 = 20;

/// Exact maximum independent set size by enumerating every subset of nodes.
///
/// This deliberately ignores the closed form so it can be used to check it.
pub fn brute_force_max_independent_size(dims: GridDims) -> Result<usize, GridError> {
    let p = dims.node_count();
    if p > BRUTE_FORCE_NODE_LIMIT {
        return Err(GridError::BudgetExceeded {
            nodes: p,
            limit: BRUTE_FORCE_NODE_LIMIT,
        });
    }
    // Neighbour bitmasks over row-major indices.
    let adj: Vec<u32> = dims
        .coords()
        .map(|c| {
            [(0, 1), (1, 0), (0, -1), (-1, 0)]
                .into_iter()
                .filter_map(|(di, dj)| dims.offset(c, di, dj))
                .fold(0u32, |acc, nb| acc | 1 << dims.index(nb))
        })
        .collect();
    let mut best = 0;
    for subset in 0u32..(1u32 << p) {
        let size = subset.count_ones() as usize;
        if size <= best {
            continue;
        }
        let independent = (0..p as usize)
            .filter(|&k| subset & (1 << k) != 0)
            .all(|k| subset & adj[k] == 0);
        if independent {
            best = size;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(m: u32, n: u32) -> GridDims {
        GridDims::new(m, n).unwrap()
    }

    fn set(cs: &[(u32, u32)]) -> BTreeSet<Coord> {
        cs.iter().map(|&(i, j)| Coord::new(i, j)).collect()
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert_eq!(GridDims::new(1, 5), Err(GridError::TooSmall { m: 1, n: 5 }));
        assert!(GridDims::new(2, 1).is_err());
    }

    #[test]
    fn node_and_edge_counts() {
        let d = dims(3, 4);
        assert_eq!(d.node_count(), 12);
        assert_eq!(d.edge_count(), 2 * 4 + 3 * 3);
    }

    #[test]
    fn reference_set_small_grids() {
        assert_eq!(reference_mis(dims(2, 2)), set(&[(1, 1), (2, 2)]));
        assert_eq!(
            reference_mis(dims(3, 3)),
            set(&[(1, 1), (1, 3), (2, 2), (3, 1), (3, 3)])
        );
        assert_eq!(reference_mis(dims(4, 5)).len(), 10);
    }

    #[test]
    fn row_quotas() {
        assert_eq!(row_quota(dims(3, 4), 2), Ok(2));
        assert_eq!(row_quota(dims(3, 5), 1), Ok(3));
        assert_eq!(row_quota(dims(3, 5), 2), Ok(2));
        assert_eq!(
            row_quota(dims(3, 5), 4),
            Err(GridError::RowOutOfRange { row: 4, m: 3 })
        );
        assert!(row_quota(dims(3, 5), 0).is_err());
    }

    #[test]
    fn mis_verifier() {
        assert_eq!(
            is_maximum_independent(dims(3, 3), &reference_mis(dims(3, 3))),
            Ok(true)
        );
        assert_eq!(
            is_maximum_independent(dims(2, 2), &set(&[(1, 1), (1, 2)])),
            Ok(false)
        );
        assert_eq!(
            is_maximum_independent(dims(2, 2), &set(&[(1, 2), (2, 1)])),
            Ok(true)
        );
        // independent but not maximum
        assert_eq!(
            is_maximum_independent(dims(3, 3), &set(&[(1, 1), (3, 3)])),
            Ok(false)
        );
        assert!(matches!(
            is_maximum_independent(dims(2, 2), &set(&[(3, 1), (1, 2)])),
            Err(GridError::CoordOutOfRange { .. })
        ));
    }

    #[test]
    fn brute_force_small() {
        assert_eq!(brute_force_max_independent_size(dims(2, 2)), Ok(2));
        assert_eq!(brute_force_max_independent_size(dims(3, 3)), Ok(5));
        assert_eq!(brute_force_max_independent_size(dims(2, 3)), Ok(3));
        assert!(matches!(
            brute_force_max_independent_size(dims(5, 5)),
            Err(GridError::BudgetExceeded { nodes: 25, .. })
        ));
    }

    #[test]
    fn reference_set_is_independent_and_sized() {
        for m in 2..=8 {
            for n in 2..=8 {
                let d = dims(m, n);
                let s = reference_mis(d);
                assert_eq!(s.len(), ((m * n) as usize).div_ceil(2));
                for a in &s {
                    for b in &s {
                        assert!(!a.is_adjacent(*b), "{a} {b} adjacent in {d}");
                    }
                }
                let quota: u32 = (1..=m).map(|i| row_quota(d, i).unwrap()).sum();
                assert_eq!(quota as usize, s.len());
            }
        }
    }
}
