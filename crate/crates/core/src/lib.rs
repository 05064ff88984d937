//! Luminous myopic robots forming a maximum independent set on an oriented
//! rectangular grid.
//!
//! Robots see two hops around themselves (13 nodes), carry a green/blue/red
//! light, agree on the compass, and run under a semi-synchronous scheduler.
//! The crate provides the grid and target set ([`grid`]), the perceived
//! window ([`view`]), the decision rule ([`rules`]), the round engine
//! ([`sim`]), runtime checks ([`monitors`]), an exhaustive explorer for small
//! grids ([`explorer`]), initial placements ([`placement`]) and file formats
//! ([`io`]).

pub mod config;
pub mod explorer;
#[doc(hidden)]
pub mod faults;
pub mod grid;
pub mod io;
pub mod monitors;
pub mod placement;
pub mod rules;
pub mod sim;
pub mod view;

pub use config::{canonical_digest, Configuration, Digest, Occupancy, Robot, RobotId};
pub use grid::{
    brute_force_max_independent_size, is_maximum_independent, reference_mis, row_quota, Color,
    Coord, GridDims, GridError,
};
pub use rules::{decide, guard_family, Action, Decision, Direction, GuardId, MisRules, Rules};
pub use sim::{
    is_final, next_activation, run, step, ActivationSet, Outcome, RunOptions, RunResult,
    SchedulerSpec, TraceEvent,
};
pub use view::{extract_view, CellView, View};
