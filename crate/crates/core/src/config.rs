//! Global state: robot identities, positions, and lights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Color, Coord, GridDims, GridError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("two robots placed on {0}")]
    DuplicatePosition(Coord),
}

/// Opaque robot identity. The protocol never sees it; it exists so traces can
/// follow individual robots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Robot {
    pub pos: Coord,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    dims: GridDims,
    robots: BTreeMap<RobotId, Robot>,
}

impl Configuration {
    /// Builds a configuration from placements, numbering robots `0, 1, ...` in
    /// the order given.
    pub fn new(
        dims: GridDims,
        placements: impl IntoIterator<Item = (Coord, Color)>,
    ) -> Result<Self, ConfigError> {
        let robots = placements
            .into_iter()
            .enumerate()
            .map(|(k, (pos, color))| (RobotId(k as u32), Robot { pos, color }))
            .collect();
        Self::with_ids(dims, robots)
    }

    /// All-green robots on the given nodes.
    pub fn green(
        dims: GridDims,
        nodes: impl IntoIterator<Item = Coord>,
    ) -> Result<Self, ConfigError> {
        Self::new(dims, nodes.into_iter().map(|c| (c, Color::Green)))
    }

    pub fn with_ids(dims: GridDims, robots: BTreeMap<RobotId, Robot>) -> Result<Self, ConfigError> {
        let mut seen = BTreeSet::new();
        for r in robots.values() {
            dims.check(r.pos)?;
            if !seen.insert(r.pos) {
                return Err(ConfigError::DuplicatePosition(r.pos));
            }
        }
        Ok(Self { dims, robots })
    }

    /// Builds a configuration without the distinctness check. Used for the
    /// post-state of a faulty round so that monitors can inspect it.
    pub(crate) fn unchecked(dims: GridDims, robots: BTreeMap<RobotId, Robot>) -> Self {
        Self { dims, robots }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn robots(&self) -> &BTreeMap<RobotId, Robot> {
        &self.robots
    }

    pub fn robot(&self, id: RobotId) -> Option<&Robot> {
        self.robots.get(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = RobotId> + '_ {
        self.robots.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    /// Whether the robot count equals `ceil(m*n/2)`.
    pub fn is_standard(&self) -> bool {
        self.robots.len() == self.dims.mis_size()
    }

    pub fn robot_at(&self, c: Coord) -> Option<(RobotId, &Robot)> {
        self.robots
            .iter()
            .find(|(_, r)| r.pos == c)
            .map(|(id, r)| (*id, r))
    }

    pub fn occupancy(&self) -> Occupancy {
        Occupancy::from_config(self)
    }

    /// Coordinates of robots currently showing `color`.
    pub fn nodes_with(&self, color: Color) -> BTreeSet<Coord> {
        self.robots
            .values()
            .filter(|r| r.color == color)
            .map(|r| r.pos)
            .collect()
    }

    /// `"m,n|i,j,c;i,j,c;..."` with occupied cells in row-major order; robot
    /// identities are not part of the encoding.
    pub fn canonical_encoding(&self) -> String {
        let mut cells: Vec<(Coord, Color)> =
            self.robots.values().map(|r| (r.pos, r.color)).collect();
        cells.sort();
        let body: Vec<String> = cells
            .iter()
            .map(|(c, col)| format!("{},{},{}", c.i, c.j, col.letter()))
            .collect();
        format!(
            "{},{}|{}",
            self.dims.rows(),
            self.dims.cols(),
            body.join(";")
        )
    }

    pub fn digest(&self) -> Digest {
        canonical_digest(self)
    }
}

/// 64-bit FNV-1a hash of a canonical encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub u64);

impl Digest {
    pub fn of_str(s: &str) -> Self {
        let mut h = FnvHasher::default();
        h.write(s.as_bytes());
        Digest(h.finish())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl std::str::FromStr for Digest {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u64::from_str_radix(s, 16).map(Digest)
    }
}

impl Serialize for Digest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.len() != 16 {
            return Err(serde::de::Error::custom("digest must be 16 hex characters"));
        }
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn canonical_digest(config: &Configuration) -> Digest {
    Digest::of_str(&config.canonical_encoding())
}

/// Dense row-major cell contents, the anonymous view of a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Occupancy {
    dims: GridDims,
    cells: Vec<Option<Color>>,
}

impl Occupancy {
    pub fn empty(dims: GridDims) -> Self {
        Self {
            dims,
            cells: vec![None; dims.node_count() as usize],
        }
    }

    pub fn from_config(config: &Configuration) -> Self {
        let mut occ = Self::empty(config.dims);
        for r in config.robots.values() {
            occ.set(r.pos, Some(r.color));
        }
        occ
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn get(&self, c: Coord) -> Option<Color> {
        self.cells[self.dims.index(c)]
    }

    pub fn set(&mut self, c: Coord, v: Option<Color>) {
        let k = self.dims.index(c);
        self.cells[k] = v;
    }

    /// Occupied cells in row-major order.
    pub fn occupied(&self) -> impl Iterator<Item = (Coord, Color)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|col| (self.dims.coord_at(k), col)))
    }

    /// Configuration with robot ids assigned in row-major order.
    pub fn to_config(&self) -> Configuration {
        let robots = self
            .occupied()
            .enumerate()
            .map(|(k, (pos, color))| (RobotId(k as u32), Robot { pos, color }))
            .collect();
        Configuration::unchecked(self.dims, robots)
    }
}
