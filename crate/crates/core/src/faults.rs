//! Deliberately broken rule sets for exercising the checkers.

use crate::grid::Color;
use crate::rules::{Action, Decision, Direction, GuardId, MisRules, Rules};
use crate::view::{View, ViewError};

/// A green robot moves left into any vacant node, else up into any vacant
/// node, else follows the shipped rules. Collides on a 2x2 grid.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl Rules for Greedy {
    fn decide(&self, view: &View) -> Result<Decision, ViewError> {
        view.validate()?;
        if view.own_color() == Some(Color::Green) {
            if view.l1.vacant() {
                return Ok(Decision {
                    guard: GuardId::GLeft,
                    action: Action::Move(Direction::Left),
                });
            }
            if view.u1.vacant() {
                return Ok(Decision {
                    guard: GuardId::GUp,
                    action: Action::Move(Direction::Up),
                });
            }
        }
        MisRules.decide(view)
    }
}
