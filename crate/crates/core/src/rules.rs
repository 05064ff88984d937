//! The compute phase: a first-match guard table from a robot's [`View`] to an
//! [`Action`].
//!
//! Green and blue robots each have an ordered list of guards; the first guard
//! whose predicate holds fires. Red robots are fixed and never act.
//!
//! Cell predicates are written over [`CellView`]: `missing()` is a
//! nonexistent node, `vacant()` an existing empty node, `is(c)` a robot of
//! color `c`, `occupied()` any robot.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grid::Color;
use crate::view::{CellView, View, ViewError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl Direction {
    /// `(di, dj)` displacement in the global frame.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
            Direction::Up => (-1, 0),
            Direction::Down => (1, 0),
        }
    }

    /// The adjacent cell of a view in this direction.
    pub fn neighbour(self, view: &View) -> CellView {
        match self {
            Direction::Left => view.l1,
            Direction::Right => view.r1,
            Direction::Up => view.u1,
            Direction::Down => view.d1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Noop,
    Move(Direction),
    SetColor(Color),
    SetColorAndMove(Color, Direction),
}

impl Action {
    pub fn direction(self) -> Option<Direction> {
        match self {
            Action::Move(d) | Action::SetColorAndMove(_, d) => Some(d),
            _ => None,
        }
    }

    /// Color after the action, given the color before.
    pub fn color_after(self, before: Color) -> Color {
        match self {
            Action::SetColor(c) | Action::SetColorAndMove(c, _) => c,
            _ => before,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Noop => f.write_str("noop"),
            Action::Move(d) => write!(f, "move {d:?}"),
            Action::SetColor(c) => write!(f, "set {c}"),
            Action::SetColorAndMove(c, d) => write!(f, "set {c} and move {d:?}"),
        }
    }
}

/// Identifies which row of the guard table fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GuardId {
    #[serde(rename = "G-RED")]
    GRed,
    #[serde(rename = "G-LEFT")]
    GLeft,
    #[serde(rename = "G-UP")]
    GUp,
    #[serde(rename = "G-RIGHT-A")]
    GRightA,
    #[serde(rename = "G-DOWN-A")]
    GDownA,
    #[serde(rename = "G-BLUE-A")]
    GBlueA,
    #[serde(rename = "G-RIGHT-B")]
    GRightB,
    #[serde(rename = "G-DOWN-B")]
    GDownB,
    #[serde(rename = "G-UP-B")]
    GUpB,
    #[serde(rename = "G-BLUE-B")]
    GBlueB,
    #[serde(rename = "G-DOWN-U")]
    GDownU,
    #[serde(rename = "G-BLUE-U")]
    GBlueU,
    #[serde(rename = "G-WAIT")]
    GWait,
    #[serde(rename = "B-RIGHT")]
    BRight,
    #[serde(rename = "B-LEFT")]
    BLeft,
    #[serde(rename = "B-DOWN")]
    BDown,
    #[serde(rename = "B-REVERT")]
    BRevert,
    #[serde(rename = "B-WAIT")]
    BWait,
    #[serde(rename = "R-FIXED")]
    RFixed,
}

impl GuardId {
    pub const ALL: [GuardId; 19] = [
        GuardId::GRed,
        GuardId::GLeft,
        GuardId::GUp,
        GuardId::GRightA,
        GuardId::GDownA,
        GuardId::GBlueA,
        GuardId::GRightB,
        GuardId::GDownB,
        GuardId::GUpB,
        GuardId::GBlueB,
        GuardId::GDownU,
        GuardId::GBlueU,
        GuardId::GWait,
        GuardId::BRight,
        GuardId::BLeft,
        GuardId::BDown,
        GuardId::BRevert,
        GuardId::BWait,
        GuardId::RFixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GuardId::GRed => "G-RED",
            GuardId::GLeft => "G-LEFT",
            GuardId::GUp => "G-UP",
            GuardId::GRightA => "G-RIGHT-A",
            GuardId::GDownA => "G-DOWN-A",
            GuardId::GBlueA => "G-BLUE-A",
            GuardId::GRightB => "G-RIGHT-B",
            GuardId::GDownB => "G-DOWN-B",
            GuardId::GUpB => "G-UP-B",
            GuardId::GBlueB => "G-BLUE-B",
            GuardId::GDownU => "G-DOWN-U",
            GuardId::GBlueU => "G-BLUE-U",
            GuardId::GWait => "G-WAIT",
            GuardId::BRight => "B-RIGHT",
            GuardId::BLeft => "B-LEFT",
            GuardId::BDown => "B-DOWN",
            GuardId::BRevert => "B-REVERT",
            GuardId::BWait => "B-WAIT",
            GuardId::RFixed => "R-FIXED",
        }
    }
}

impl fmt::Display for GuardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GuardId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        GuardId::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown guard {s:?}"))
    }
}

/// View-family label of a guard: `G1`..`G6` for green, `B1`..`B4` for blue,
/// `none` for the waiting and fixed guards.
pub fn guard_family(g: GuardId) -> &'static str {
    match g {
        GuardId::GLeft => "G1",
        GuardId::GDownA | GuardId::GDownB | GuardId::GDownU => "G2",
        GuardId::GRightA | GuardId::GRightB => "G3",
        GuardId::GUp | GuardId::GUpB => "G4",
        GuardId::GBlueA | GuardId::GBlueB | GuardId::GBlueU => "G5",
        GuardId::GRed => "G6",
        GuardId::BRight => "B1",
        GuardId::BLeft => "B2",
        GuardId::BDown => "B3",
        GuardId::BRevert => "B4",
        GuardId::GWait | GuardId::BWait | GuardId::RFixed => "none",
    }
}

/// Output of the compute phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decision {
    pub guard: GuardId,
    pub action: Action,
}

impl Decision {
    const fn new(guard: GuardId, action: Action) -> Self {
        Self { guard, action }
    }
}

/// A compute-phase rule set. The shipped protocol is [`MisRules`]; other
/// implementations exist to inject faults into the engine and checker.
pub trait Rules: Sync {
    fn decide(&self, view: &View) -> Result<Decision, ViewError>;
}

/// The maximum-independent-set formation protocol.
#[derive(Debug, Clone, Copy, Default)]
pub struct MisRules;

impl Rules for MisRules {
    fn decide(&self, view: &View) -> Result<Decision, ViewError> {
        decide(view)
    }
}

impl<F> Rules for F
where
    F: Fn(&View) -> Result<Decision, ViewError> + Sync,
{
    fn decide(&self, view: &View) -> Result<Decision, ViewError> {
        self(view)
    }
}

/// Evaluates the guard table for one robot.
pub fn decide(view: &View) -> Result<Decision, ViewError> {
    view.validate()?;
    Ok(match view.here {
        CellView::Occupied(Color::Green) => decide_green(view),
        CellView::Occupied(Color::Blue) => decide_blue(view),
        _ => Decision::new(GuardId::RFixed, Action::Noop),
    })
}

use Color::{Blue, Green, Red};

fn missing_or_vacant(c: CellView) -> bool {
    c.missing() || c.vacant()
}

fn missing_or_red(c: CellView) -> bool {
    c.missing() || c.is(Red)
}

/// Green whose existing west and north neighbours are red: it cannot move up
/// or left any more.
fn anchored(v: &View) -> bool {
    (v.u1.missing() && v.l1.is(Red))
        || (v.l1.missing() && v.u1.is(Red))
        || (v.l1.is(Red) && v.u1.is(Red))
}

/// A right move into the east column needs `ne` vacant, red, or absent, so no
/// downward mover can arrive at the same node.
fn right_clear(v: &View) -> bool {
    v.r1.vacant() && (v.r2.exists() || v.ne.missing() || v.ne.vacant() || v.ne.is(Red))
}

/// Conditions shared by both upward guards.
fn up_clear(v: &View) -> bool {
    v.u1.vacant()
        && missing_or_vacant(v.u2)
        && missing_or_vacant(v.ne)
        && (missing_or_vacant(v.nw) || v.nw.is(Red))
        && !(v.u2.missing() && v.nw.is(Red))
}

/// The forward path (right, or down on the east boundary) is blocked.
fn blocked_forward(v: &View) -> bool {
    (v.r1.exists() && v.r1.occupied()) || (v.r1.missing() && (v.d1.missing() || v.d1.occupied()))
}

/// Left two hops are free (or the wall).
fn left_gap(v: &View) -> bool {
    v.l1.vacant() && missing_or_vacant(v.l2)
}

fn decide_green(v: &View) -> Decision {
    use Action::*;
    use Direction::*;
    use GuardId::*;

    let red_slot = missing_or_vacant(v.l1)
        && missing_or_vacant(v.u1)
        && missing_or_red(v.l2)
        && missing_or_red(v.u2)
        && missing_or_red(v.nw)
        && !(v.l1.exists() && v.l2.missing() && v.nw.missing())
        && !(v.u1.exists() && v.u2.missing() && v.nw.missing());
    if red_slot {
        return Decision::new(GRed, SetColor(Red));
    }

    if left_gap(v) && !(v.l2.missing() && v.nw.is(Red)) {
        return Decision::new(GLeft, Move(Left));
    }

    let left_ctx = v.l1.missing()
        || v.l1.is(Red)
        || (v.l1.vacant() && (v.l2.is(Red) || (v.l2.missing() && v.nw.is(Red))));
    if up_clear(v) && left_ctx {
        return Decision::new(GUp, Move(Up));
    }

    // Close up beside a red on the left when the way up is blocked, unless
    // the node beyond is already walled in from the north.
    if v.l1.vacant() && v.l2.is(Red) && !v.nw.is(Red) {
        return Decision::new(GLeft, Move(Left));
    }

    if anchored(v) {
        if right_clear(v) {
            return Decision::new(GRightA, Move(Right));
        }
        if v.r1.missing() && v.d1.vacant() {
            return Decision::new(GDownA, Move(Down));
        }
        if (v.r1.exists() && v.r1.occupied())
            || (v.r1.missing() && v.d1.exists() && v.d1.occupied())
        {
            return Decision::new(GBlueA, SetColor(Blue));
        }
    }

    if v.l1.is(Blue) {
        if right_clear(v) {
            return Decision::new(GRightB, Move(Right));
        }
        if v.r1.missing() && v.d1.vacant() {
            return Decision::new(GDownB, Move(Down));
        }
        if blocked_forward(v) {
            if up_clear(v) {
                return Decision::new(GUpB, Move(Up));
            }
            let north_settled = v.u1.missing()
                || v.u1.is(Red)
                || (v.u1.vacant() && (v.u2.is(Red) || (v.u2.missing() && v.nw.is(Red))));
            if north_settled && !(v.r1.missing() && v.d1.missing()) {
                return Decision::new(GBlueB, SetColor(Blue));
            }
        }
    }

    // G-LEFT has already been ruled out here.
    if v.r1.missing() && v.u1.is(Blue) {
        if v.d1.vacant() {
            return Decision::new(GDownU, Move(Down));
        }
        if v.d1.is(Green) {
            return Decision::new(GBlueU, SetColor(Blue));
        }
    }

    Decision::new(GWait, Noop)
}

fn decide_blue(v: &View) -> Decision {
    use Action::*;
    use Direction::*;
    use GuardId::*;

    if right_clear(v) {
        return Decision::new(BRight, SetColorAndMove(Green, Right));
    }
    if v.r1.missing() {
        if left_gap(v) {
            return Decision::new(BLeft, SetColorAndMove(Green, Left));
        }
        if (v.l1.occupied() || v.l2.occupied()) && v.d1.vacant() {
            return Decision::new(BDown, SetColorAndMove(Green, Down));
        }
        if (v.u1.vacant() && !v.l1.is(Blue)) || (v.u1.is(Red) && v.l1.vacant()) || v.u1.is(Green) {
            return Decision::new(BRevert, SetColor(Green));
        }
    }
    Decision::new(BWait, Noop)
}
