//! Runtime checks of the protocol's safety claims: collision freedom, fixed
//! red robots, legal light transitions, the row ordering of colors, and the
//! final independent set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Configuration, RobotId};
use crate::grid::{is_maximum_independent, Color, Coord};
use crate::rules::Action;
use crate::sim::{is_final, StepError, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("configuration is not final")]
    NotFinal,
    #[error("event does not match configurations: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    /// A robot moved onto a node that was occupied at the start of the round.
    CollisionType1,
    /// Two or more robots moved onto the same vacant node.
    CollisionType2,
    RedMoved,
    RedRecolored,
    IllegalTransition,
    IllegalMove,
    /// A red robot off the parity set. Stronger than independence; specific to
    /// this guard table.
    RedOffTarget,
    RedAdjacent,
    RowOrder,
    DistinctnessBroken,
    FinalNotMis,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub round: u64,
    pub robots: Vec<RobotId>,
    pub coords: Vec<Coord>,
    pub description: String,
}

impl Violation {
    fn new(
        kind: ViolationKind,
        robots: Vec<RobotId>,
        coords: Vec<Coord>,
        description: String,
    ) -> Self {
        Self {
            kind,
            round: 0,
            robots,
            coords,
            description,
        }
    }

    /// The rules failed to produce an action at all.
    pub(crate) fn engine_error(round: u64, err: &StepError) -> Self {
        Self {
            kind: ViolationKind::IllegalTransition,
            round,
            robots: Vec::new(),
            coords: Vec::new(),
            description: format!("engine error: {err}"),
        }
    }
}

/// Type-1 and Type-2 collisions of one round.
pub fn collisions(pre: &Configuration, event: &TraceEvent) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut arrivals: BTreeMap<Coord, Vec<RobotId>> = BTreeMap::new();
    for m in event.moves.iter().filter(|m| m.from != m.to) {
        arrivals.entry(m.to).or_default().push(m.id);
        if let Some((other, _)) = pre.robot_at(m.to) {
            out.push(Violation::new(
                ViolationKind::CollisionType1,
                vec![m.id, other],
                vec![m.to],
                format!("{} moved onto {} held by {}", m.id, m.to, other),
            ));
        }
    }
    for (at, ids) in arrivals {
        if ids.len() > 1 {
            let names: Vec<String> = ids.iter().map(ToString::to_string).collect();
            out.push(Violation::new(
                ViolationKind::CollisionType2,
                ids,
                vec![at],
                format!("{} all moved onto {}", names.join(", "), at),
            ));
        }
    }
    out
}

/// Checks one round: collisions, red permanence, light transitions and move
/// shapes.
pub fn check_step(
    pre: &Configuration,
    event: &TraceEvent,
    post: &Configuration,
) -> Result<Vec<Violation>, MonitorError> {
    if pre.dims() != post.dims() || pre.len() != post.len() {
        return Err(MonitorError::Mismatch("robot sets differ".into()));
    }
    let activated: BTreeSet<RobotId> = event.activated.iter().copied().collect();
    let recorded: BTreeSet<RobotId> = event.moves.iter().map(|m| m.id).collect();
    if activated != recorded {
        return Err(MonitorError::Mismatch(
            "records do not cover the activation set".into(),
        ));
    }
    for (id, before) in pre.robots() {
        let after = post
            .robot(*id)
            .ok_or_else(|| MonitorError::Mismatch(format!("{id} vanished")))?;
        if !activated.contains(id) && after != before {
            return Err(MonitorError::Mismatch(format!("inactive {id} changed")));
        }
    }

    let mut out = collisions(pre, event);
    for m in &event.moves {
        let before = pre
            .robot(m.id)
            .ok_or_else(|| MonitorError::Mismatch(format!("{} unknown", m.id)))?;
        let after = post.robot(m.id).expect("checked above");
        if m.from != before.pos || m.to != after.pos || m.color != after.color {
            return Err(MonitorError::Mismatch(format!(
                "record for {} disagrees with states",
                m.id
            )));
        }
        if before.color == Color::Red {
            if m.to != m.from {
                out.push(Violation::new(
                    ViolationKind::RedMoved,
                    vec![m.id],
                    vec![m.from, m.to],
                    format!("red {} moved {} -> {}", m.id, m.from, m.to),
                ));
            }
            if after.color != Color::Red {
                out.push(Violation::new(
                    ViolationKind::RedRecolored,
                    vec![m.id],
                    vec![m.from],
                    format!("red {} recolored {}", m.id, after.color),
                ));
            }
            continue;
        }
        let legal_color = match (before.color, after.color, m.action) {
            (a, b, _) if a == b => {
                !matches!(m.action, Action::SetColor(_) | Action::SetColorAndMove(..))
            }
            (Color::Green, Color::Blue | Color::Red, Action::SetColor(_)) => true,
            (Color::Blue, Color::Green, Action::SetColor(_) | Action::SetColorAndMove(..)) => true,
            _ => false,
        };
        if !legal_color {
            out.push(Violation::new(
                ViolationKind::IllegalTransition,
                vec![m.id],
                vec![m.from],
                format!(
                    "{} went {} -> {} via {}",
                    m.id, before.color, after.color, m.action
                ),
            ));
        }
        let legal_move = match m.action.direction() {
            None => m.to == m.from,
            Some(dir) => {
                let (di, dj) = dir.delta();
                pre.dims().offset(m.from, di, dj) == Some(m.to)
            }
        };
        if !legal_move {
            out.push(Violation::new(
                ViolationKind::IllegalMove,
                vec![m.id],
                vec![m.from, m.to],
                format!("{} {} from {} ended at {}", m.id, m.action, m.from, m.to),
            ));
        }
    }
    Ok(out)
}

/// State invariants: distinct positions, reds on the parity set and pairwise
/// non-adjacent, and per-row color order red < blue < green.
pub fn check_state(config: &Configuration) -> Vec<Violation> {
    let dims = config.dims();
    let mut out = Vec::new();
    let mut at: BTreeMap<Coord, Vec<RobotId>> = BTreeMap::new();
    for (id, r) in config.robots() {
        at.entry(r.pos).or_default().push(*id);
    }
    for (c, ids) in &at {
        if ids.len() > 1 {
            out.push(Violation::new(
                ViolationKind::DistinctnessBroken,
                ids.clone(),
                vec![*c],
                format!("{} robots share {}", ids.len(), c),
            ));
        }
    }

    let occ = config.occupancy();
    for (id, r) in config
        .robots()
        .iter()
        .filter(|(_, r)| r.color == Color::Red)
    {
        if !r.pos.on_target() {
            out.push(Violation::new(
                ViolationKind::RedOffTarget,
                vec![*id],
                vec![r.pos],
                format!("red {} at {} is off the parity set", id, r.pos),
            ));
        }
        for (di, dj) in [(0, 1), (1, 0)] {
            if let Some(nb) = dims.offset(r.pos, di, dj) {
                if occ.get(nb) == Some(Color::Red) {
                    let other = at[&nb][0];
                    out.push(Violation::new(
                        ViolationKind::RedAdjacent,
                        vec![*id, other],
                        vec![r.pos, nb],
                        format!("reds at {} and {} are adjacent", r.pos, nb),
                    ));
                }
            }
        }
    }

    out.extend(row_order(config, false));
    out
}

/// Blue-before-green comparisons that involve a blue in the east column.
///
/// A blue sequence may bend down the east boundary, so such a blue can sit to
/// the right of greens in its row without breaking the ordering of the row's
/// own sequence. These are reported separately and are not violations.
pub fn row_order_warnings(config: &Configuration) -> Vec<Violation> {
    row_order(config, true)
}

/// Per row: rightmost red < leftmost blue, rightmost blue < leftmost green,
/// rightmost red < leftmost green. Blues in the east column take part only in
/// the red comparison unless `east_leg` is set, in which case only the
/// east-column blue-before-green comparison is made.
fn row_order(config: &Configuration, east_leg: bool) -> Vec<Violation> {
    let dims = config.dims();
    let east = dims.cols();
    #[derive(Default, Clone, Copy)]
    struct Span {
        min: Option<u32>,
        max: Option<u32>,
    }
    impl Span {
        fn add(&mut self, j: u32) {
            self.min = Some(self.min.map_or(j, |v| v.min(j)));
            self.max = Some(self.max.map_or(j, |v| v.max(j)));
        }
    }
    // Columns: green, blue off the east column, blue in the east column, red.
    let mut spans = vec![[Span::default(); 4]; dims.rows() as usize];
    for r in config.robots().values() {
        let slot = match r.color {
            Color::Green => 0,
            Color::Blue if r.pos.j == east => 2,
            Color::Blue => 1,
            Color::Red => 3,
        };
        spans[(r.pos.i - 1) as usize][slot].add(r.pos.j);
    }
    let names = ["green", "blue", "blue", "red"];
    let pairs: &[(usize, usize)] = if east_leg {
        &[(2, 0)]
    } else {
        &[(3, 1), (3, 2), (1, 0), (3, 0)]
    };
    let mut out = Vec::new();
    for (k, row) in spans.iter().enumerate() {
        let i = k as u32 + 1;
        for &(left, right) in pairs {
            if let (Some(lmax), Some(rmin)) = (row[left].max, row[right].min) {
                if lmax > rmin {
                    out.push(Violation::new(
                        ViolationKind::RowOrder,
                        Vec::new(),
                        vec![Coord::new(i, lmax), Coord::new(i, rmin)],
                        format!(
                            "row {i}: {} at column {lmax} right of {} at column {rmin}",
                            names[left], names[right]
                        ),
                    ));
                }
            }
        }
    }
    out
}

/// The red set of a final configuration must be a maximum independent set.
pub fn check_final(config: &Configuration) -> Result<Vec<Violation>, MonitorError> {
    if !is_final(config) {
        return Err(MonitorError::NotFinal);
    }
    let reds = config.nodes_with(Color::Red);
    let ok =
        reds.len() == config.len() && is_maximum_independent(config.dims(), &reds).unwrap_or(false);
    if ok {
        return Ok(Vec::new());
    }
    Ok(vec![Violation::new(
        ViolationKind::FinalNotMis,
        config.ids().collect(),
        reds.into_iter().collect(),
        "red positions do not form a maximum independent set".into(),
    )])
}
