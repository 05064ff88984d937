//! Initial placements: seeded random, packed into a corner, or on the target
//! set. All emit `ceil(m*n/2)` green robots on distinct nodes.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::grid::{reference_mis, Coord, GridDims};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    NE,
    SE,
    SW,
    NW,
}

impl FromStr for Corner {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ne" => Ok(Corner::NE),
            "se" => Ok(Corner::SE),
            "sw" => Ok(Corner::SW),
            "nw" => Ok(Corner::NW),
            _ => Err(format!("unknown corner {s:?}")),
        }
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Corner::NE => "ne",
            Corner::SE => "se",
            Corner::SW => "sw",
            Corner::NW => "nw",
        };
        f.write_str(s)
    }
}

/// Uniformly random distinct nodes, deterministic in `(dims, seed)`.
pub fn random_placement(dims: GridDims, seed: u64) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<usize> =
        sample(&mut rng, dims.node_count() as usize, dims.mis_size()).into_vec();
    nodes.sort_unstable();
    Configuration::green(dims, nodes.into_iter().map(|k| dims.coord_at(k)))
        .expect("sampling without replacement yields distinct nodes")
}

/// Fills nodes row by row starting from `corner`, rows nearest the corner
/// first and, within a row, columns nearest the corner first.
pub fn packed_corner(dims: GridDims, corner: Corner) -> Configuration {
    let (m, n) = (dims.rows(), dims.cols());
    let rows: Vec<u32> = match corner {
        Corner::NE | Corner::NW => (1..=m).collect(),
        Corner::SE | Corner::SW => (1..=m).rev().collect(),
    };
    let cols: Vec<u32> = match corner {
        Corner::NW | Corner::SW => (1..=n).collect(),
        Corner::NE | Corner::SE => (1..=n).rev().collect(),
    };
    let order = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| Coord::new(i, j)));
    Configuration::green(dims, order.take(dims.mis_size())).expect("distinct in-range nodes")
}

/// Green robots already on the target set. They still have to settle in
/// order before turning red.
pub fn target_preset(dims: GridDims) -> Configuration {
    Configuration::green(dims, reference_mis(dims)).expect("distinct in-range nodes")
}
