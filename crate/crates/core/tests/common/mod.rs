//! Shared oracles for the integration and acceptance tests.

#![allow(dead_code)]

pub mod golden;
pub mod props;

use misgrid::{Color, Configuration, Coord, GridDims};

/// Reference FNV-1a 64, written out independently of the library.
pub fn fnv1a64(s: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

pub fn dims(m: u32, n: u32) -> GridDims {
    GridDims::new(m, n).unwrap()
}

pub fn greens(m: u32, n: u32, nodes: &[(u32, u32)]) -> Configuration {
    Configuration::green(dims(m, n), nodes.iter().map(|&(i, j)| Coord::new(i, j))).unwrap()
}

/// Red nodes of a configuration.
pub fn reds(c: &Configuration) -> std::collections::BTreeSet<Coord> {
    c.nodes_with(Color::Red)
}
