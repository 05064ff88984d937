//! Hand-derived FullSync executions on the 2x2 grid.
//!
//! Corner pair, robots 0 at (1,2) and 1 at (2,1), everyone active each round:
//!
//! 1. Robot 0 sees (1,1) vacant with the wall beyond it and no north-west
//!    node, so it cannot turn red (a left neighbour with no l2 and no nw) and
//!    moves left: G-LEFT. Robot 1 has the wall on its left and (1,1) vacant
//!    above, but its north-east node (1,2) is occupied, so it cannot go up;
//!    it is not anchored (nothing red around it) and has a right neighbour
//!    column, so it waits: G-WAIT.
//! 2. Robot 0 at (1,1) has walls to the left and above: G-RED. Robot 1 now
//!    has a green above it and still waits: G-WAIT.
//! 3. Robot 0 is fixed: R-FIXED. Robot 1 has the wall on its left and a red
//!    above, so it is anchored; (2,2) is vacant and its north-east (1,2) is
//!    vacant: G-RIGHT-A to (2,2).
//! 4. Robot 1 at (2,2) sees l1, u1 vacant, l2 and u2 absent, and a red
//!    north-west: G-RED. All red after 4 rounds.
//!
//! Target preset, robots 0 at (1,1) and 1 at (2,2):
//!
//! 1. Robot 0 turns red at the corner: G-RED. Robot 1 sees a green at (1,1)
//!    north-west, which blocks red, and a free left gap: G-LEFT to (2,1).
//! 2. Robot 0 fixed. Robot 1 at (2,1) is anchored under the red and
//!    (2,2), (1,2) are vacant: G-RIGHT-A back to (2,2).
//! 3. Robot 1 turns red with a red north-west: G-RED. All red after 3 rounds.

use misgrid::io::TraceLine;
use misgrid::placement::target_preset;
use misgrid::sim::{run, RunOptions};
use misgrid::{Configuration, Outcome, SchedulerSpec};

use super::{dims, fnv1a64, greens};

/// (guard, from, to, color after) of one robot in one round.
pub type Record = (&'static str, [u32; 2], [u32; 2], &'static str);

pub struct Expected {
    pub rounds: u64,
    /// Per round, in robot id order.
    pub moves: Vec<Vec<Record>>,
    /// Canonical encoding after each round.
    pub states: Vec<&'static str>,
}

pub fn corner_pair() -> (Configuration, Expected) {
    let config = greens(2, 2, &[(1, 2), (2, 1)]);
    let expected = Expected {
        rounds: 4,
        moves: vec![
            vec![
                ("G-LEFT", [1, 2], [1, 1], "green"),
                ("G-WAIT", [2, 1], [2, 1], "green"),
            ],
            vec![
                ("G-RED", [1, 1], [1, 1], "red"),
                ("G-WAIT", [2, 1], [2, 1], "green"),
            ],
            vec![
                ("R-FIXED", [1, 1], [1, 1], "red"),
                ("G-RIGHT-A", [2, 1], [2, 2], "green"),
            ],
            vec![
                ("R-FIXED", [1, 1], [1, 1], "red"),
                ("G-RED", [2, 2], [2, 2], "red"),
            ],
        ],
        states: vec![
            "2,2|1,1,G;2,1,G",
            "2,2|1,1,R;2,1,G",
            "2,2|1,1,R;2,2,G",
            "2,2|1,1,R;2,2,R",
        ],
    };
    (config, expected)
}

pub fn target_pair() -> (Configuration, Expected) {
    let config = target_preset(dims(2, 2));
    let expected = Expected {
        rounds: 3,
        moves: vec![
            vec![
                ("G-RED", [1, 1], [1, 1], "red"),
                ("G-LEFT", [2, 2], [2, 1], "green"),
            ],
            vec![
                ("R-FIXED", [1, 1], [1, 1], "red"),
                ("G-RIGHT-A", [2, 1], [2, 2], "green"),
            ],
            vec![
                ("R-FIXED", [1, 1], [1, 1], "red"),
                ("G-RED", [2, 2], [2, 2], "red"),
            ],
        ],
        states: vec!["2,2|1,1,R;2,1,G", "2,2|1,1,R;2,2,G", "2,2|1,1,R;2,2,R"],
    };
    (config, expected)
}

/// Runs FullSync and compares against the hand derivation.
pub fn check(config: &Configuration, expected: &Expected) -> Result<(), String> {
    let r = run(config, &SchedulerSpec::FullSync, &RunOptions::new(100));
    if r.outcome
        != (Outcome::Completed {
            rounds: expected.rounds,
        })
    {
        return Err(format!(
            "outcome {:?}, expected Completed({})",
            r.outcome, expected.rounds
        ));
    }
    if r.trace.len() != expected.moves.len() {
        return Err(format!("{} rounds recorded", r.trace.len()));
    }
    for (k, (event, want)) in r.trace.iter().zip(&expected.moves).enumerate() {
        let line = TraceLine::from(event);
        let got: Vec<(String, [u32; 2], [u32; 2], String)> = line
            .moves
            .iter()
            .map(|m| {
                (
                    m.guard.to_string(),
                    [m.from.i, m.from.j],
                    [m.to.i, m.to.j],
                    m.color.to_string(),
                )
            })
            .collect();
        let want: Vec<(String, [u32; 2], [u32; 2], String)> = want
            .iter()
            .map(|&(g, f, t, c)| (g.to_string(), f, t, c.to_string()))
            .collect();
        if got != want {
            return Err(format!("round {}: got {got:?}, expected {want:?}", k + 1));
        }
        let state = expected.states[k];
        if event.digest.to_string() != fnv1a64(state) {
            return Err(format!(
                "round {}: digest {} is not that of {state}",
                k + 1,
                event.digest
            ));
        }
    }
    Ok(())
}
