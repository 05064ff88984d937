//! Semi-synchronous round execution.
//!
//! In a round every activated robot looks at the pre-round configuration, all
//! of them compute, and all actions are applied at once. The engine executes
//! whatever the rules emit; collisions are detected and reported, never
//! silently resolved.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Configuration, Digest, Robot, RobotId};
use crate::grid::{Color, Coord, GridDims};
use crate::monitors::{self, Violation};
use crate::rules::{guard_family, Action, Decision, GuardId, MisRules, Rules};
use crate::view::ViewError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("activation set is empty")]
    EmptyActivation,
    #[error("activated robot {0} does not exist")]
    UnknownRobot(RobotId),
    #[error(transparent)]
    View(#[from] ViewError),
    #[error("collision in round {round}: {}", describe(.violations))]
    Collision {
        round: u64,
        violations: Vec<Violation>,
    },
}

fn describe(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.description.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Nonempty set of robots activated in one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<RobotId>", into = "Vec<RobotId>")]
pub struct ActivationSet(BTreeSet<RobotId>);

impl ActivationSet {
    pub fn new(ids: impl IntoIterator<Item = RobotId>) -> Result<Self, StepError> {
        let set: BTreeSet<RobotId> = ids.into_iter().collect();
        if set.is_empty() {
            return Err(StepError::EmptyActivation);
        }
        Ok(Self(set))
    }

    pub fn all(config: &Configuration) -> Result<Self, StepError> {
        Self::new(config.ids())
    }

    pub fn ids(&self) -> &BTreeSet<RobotId> {
        &self.0
    }

    pub fn contains(&self, id: RobotId) -> bool {
        self.0.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<RobotId>> for ActivationSet {
    type Error = StepError;
    fn try_from(v: Vec<RobotId>) -> Result<Self, StepError> {
        Self::new(v)
    }
}

impl From<ActivationSet> for Vec<RobotId> {
    fn from(a: ActivationSet) -> Self {
        a.0.into_iter().collect()
    }
}

/// Activation strategy. Every variant is fair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SchedulerSpec {
    /// Every robot in every round.
    FullSync,
    /// Each robot independently with probability `p`; an empty draw is
    /// redrawn.
    RandomFair { p: f64, seed: u64 },
    /// Robots sorted by id, activated in consecutive blocks of `k`.
    RoundRobin { k: usize },
    /// One robot per round, cycling through `order`. Ids missing from `order`
    /// are appended in id order so that every robot is eventually activated.
    SingletonSweep { order: Vec<RobotId> },
    /// The given sets for rounds `1..=script.len()`, then full activation.
    Scripted { script: Vec<ActivationSet> },
}

impl SchedulerSpec {
    pub fn random_fair(p: f64, seed: u64) -> Result<Self, String> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(format!("activation probability {p} not in (0, 1]"));
        }
        Ok(SchedulerSpec::RandomFair { p, seed })
    }

    pub fn round_robin(k: usize) -> Result<Self, String> {
        if k == 0 {
            return Err("round-robin block size must be at least 1".into());
        }
        Ok(SchedulerSpec::RoundRobin { k })
    }
}

/// Activation set for 1-based `round`. Deterministic in `(spec, round, ids)`.
pub fn next_activation(spec: &SchedulerSpec, round: u64, config: &Configuration) -> ActivationSet {
    let ids: Vec<RobotId> = config.ids().collect();
    assert!(!ids.is_empty(), "scheduling requires at least one robot");
    let full = || ActivationSet(ids.iter().copied().collect());
    let r = round.saturating_sub(1);
    match spec {
        SchedulerSpec::FullSync => full(),
        SchedulerSpec::RandomFair { p, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(round);
            loop {
                let set: BTreeSet<RobotId> =
                    ids.iter().copied().filter(|_| rng.gen_bool(*p)).collect();
                if !set.is_empty() {
                    return ActivationSet(set);
                }
            }
        }
        SchedulerSpec::RoundRobin { k } => {
            let k = (*k).max(1);
            let blocks = ids.len().div_ceil(k) as u64;
            let b = (r % blocks) as usize;
            ActivationSet(ids.iter().skip(b * k).take(k).copied().collect())
        }
        SchedulerSpec::SingletonSweep { order } => {
            let mut seq: Vec<RobotId> = Vec::with_capacity(ids.len());
            for id in order.iter().chain(ids.iter()) {
                if config.robot(*id).is_some() && !seq.contains(id) {
                    seq.push(*id);
                }
            }
            let id = seq[(r % seq.len() as u64) as usize];
            ActivationSet([id].into_iter().collect())
        }
        SchedulerSpec::Scripted { script } => match script.get(r as usize) {
            Some(set) => {
                let live: BTreeSet<RobotId> = set
                    .ids()
                    .iter()
                    .copied()
                    .filter(|id| config.robot(*id).is_some())
                    .collect();
                if live.is_empty() {
                    full()
                } else {
                    ActivationSet(live)
                }
            }
            None => full(),
        },
    }
}

/// What one activated robot did in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub id: RobotId,
    pub guard: GuardId,
    pub action: Action,
    pub from: Coord,
    pub to: Coord,
    pub color: Color,
}

impl MoveRecord {
    pub fn family(&self) -> &'static str {
        guard_family(self.guard)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub round: u64,
    pub activated: Vec<RobotId>,
    pub moves: Vec<MoveRecord>,
    pub digest: Digest,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Completed {
        rounds: u64,
    },
    RoundCapExceeded {
        cap: u64,
    },
    InvariantViolation {
        round: u64,
        violations: Vec<Violation>,
    },
    QuiescentNonFinal {
        round: u64,
    },
}

impl Outcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, Outcome::Completed { .. })
    }
}

/// True iff every robot is red.
pub fn is_final(config: &Configuration) -> bool {
    config.robots().values().all(|r| r.color == Color::Red)
}

/// Decisions of the given robots against `config`, in id order.
pub fn compute<R: Rules + ?Sized>(
    rules: &R,
    config: &Configuration,
    ids: impl IntoIterator<Item = RobotId>,
) -> Result<Vec<(RobotId, Decision)>, StepError> {
    let occ = config.occupancy();
    ids.into_iter()
        .map(|id| {
            let robot = config.robot(id).ok_or(StepError::UnknownRobot(id))?;
            let view = occ.view_at(robot.pos)?;
            Ok((id, rules.decide(&view)?))
        })
        .collect()
}

/// Applies one round without collision checking. The post-configuration may
/// place two robots on one node when the rules are faulty.
pub fn apply_round<R: Rules + ?Sized>(
    rules: &R,
    config: &Configuration,
    act: &ActivationSet,
    round: u64,
) -> Result<(Configuration, TraceEvent), StepError> {
    if act.is_empty() {
        return Err(StepError::EmptyActivation);
    }
    let decisions = compute(rules, config, act.ids().iter().copied())?;
    Ok(apply_decisions(config, &decisions, round))
}

/// Applies precomputed decisions simultaneously. Every robot in `decisions`
/// counts as activated.
pub fn apply_decisions(
    config: &Configuration,
    decisions: &[(RobotId, Decision)],
    round: u64,
) -> (Configuration, TraceEvent) {
    let dims = config.dims();
    let mut robots: BTreeMap<RobotId, Robot> = config.robots().clone();
    let mut moves = Vec::with_capacity(decisions.len());
    for &(id, d) in decisions {
        let before = config.robots()[&id];
        let to = match d.action.direction() {
            Some(dir) => {
                let (di, dj) = dir.delta();
                // An off-grid move leaves the robot in place; the monitors
                // report it as an illegal move.
                dims.offset(before.pos, di, dj).unwrap_or(before.pos)
            }
            None => before.pos,
        };
        let color = d.action.color_after(before.color);
        robots.insert(id, Robot { pos: to, color });
        moves.push(MoveRecord {
            id,
            guard: d.guard,
            action: d.action,
            from: before.pos,
            to,
            color,
        });
    }
    let post = Configuration::unchecked(dims, robots);
    let event = TraceEvent {
        round,
        activated: decisions.iter().map(|(id, _)| *id).collect(),
        moves,
        digest: post.digest(),
    };
    (post, event)
}

/// One semi-synchronous round of the shipped protocol. Collisions are errors.
pub fn step(
    config: &Configuration,
    act: &ActivationSet,
) -> Result<(Configuration, TraceEvent), StepError> {
    step_with(&MisRules, config, act, 1)
}

pub fn step_with<R: Rules + ?Sized>(
    rules: &R,
    config: &Configuration,
    act: &ActivationSet,
    round: u64,
) -> Result<(Configuration, TraceEvent), StepError> {
    let (post, event) = apply_round(rules, config, act, round)?;
    let collisions = monitors::collisions(config, &event);
    if !collisions.is_empty() {
        return Err(StepError::Collision {
            round,
            violations: collisions,
        });
    }
    Ok((post, event))
}

/// Default round cap `50*m*n*(m+n)`.
pub fn default_cap(dims: GridDims) -> u64 {
    let (m, n) = (dims.rows() as u64, dims.cols() as u64);
    50 * m * n * (m + n)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub cap: u64,
    pub monitors: bool,
}

impl RunOptions {
    pub fn new(cap: u64) -> Self {
        Self {
            cap,
            monitors: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: Vec<TraceEvent>,
    pub outcome: Outcome,
    pub final_config: Configuration,
}

impl RunResult {
    pub fn moves(&self) -> usize {
        self.trace
            .iter()
            .flat_map(|e| &e.moves)
            .filter(|m| m.from != m.to)
            .count()
    }

    pub fn color_changes(&self) -> usize {
        self.trace
            .iter()
            .flat_map(|e| &e.moves)
            .filter(|m| matches!(m.action, Action::SetColor(_) | Action::SetColorAndMove(..)))
            .count()
    }
}

/// Runs the shipped protocol until completion, the round cap, a violation, or
/// quiescence.
pub fn run(config: &Configuration, spec: &SchedulerSpec, opts: &RunOptions) -> RunResult {
    run_with(&MisRules, config, spec, opts, |_| {})
}

/// [`run`] with explicit rules and a sink receiving events in round order.
pub fn run_with<R, F>(
    rules: &R,
    config: &Configuration,
    spec: &SchedulerSpec,
    opts: &RunOptions,
    mut sink: F,
) -> RunResult
where
    R: Rules + ?Sized,
    F: FnMut(&TraceEvent),
{
    let mut current = config.clone();
    let mut trace = Vec::new();
    let mut round = 0u64;
    let finish = |trace, outcome, current| RunResult {
        trace,
        outcome,
        final_config: current,
    };
    if opts.monitors {
        let vs = monitors::check_state(&current);
        if !vs.is_empty() {
            return finish(
                trace,
                Outcome::InvariantViolation {
                    round: 0,
                    violations: vs,
                },
                current,
            );
        }
    }
    loop {
        if is_final(&current) {
            if opts.monitors {
                let vs = monitors::check_final(&current).unwrap_or_default();
                if !vs.is_empty() {
                    let outcome = Outcome::InvariantViolation {
                        round,
                        violations: vs,
                    };
                    return finish(trace, outcome, current);
                }
            }
            return finish(trace, Outcome::Completed { rounds: round }, current);
        }
        if round >= opts.cap {
            return finish(trace, Outcome::RoundCapExceeded { cap: opts.cap }, current);
        }
        // Quiescence probe: a hypothetical full round that changes nothing.
        match compute(rules, &current, current.ids().collect::<Vec<_>>()) {
            Ok(ds) if ds.iter().all(|(_, d)| d.action == Action::Noop) => {
                return finish(trace, Outcome::QuiescentNonFinal { round }, current);
            }
            Ok(_) => {}
            Err(e) => {
                let v = Violation::engine_error(round + 1, &e);
                let outcome = Outcome::InvariantViolation {
                    round: round + 1,
                    violations: vec![v],
                };
                return finish(trace, outcome, current);
            }
        }
        round += 1;
        let act = next_activation(spec, round, &current);
        let (post, event) = match apply_round(rules, &current, &act, round) {
            Ok(x) => x,
            Err(e) => {
                let v = Violation::engine_error(round, &e);
                let outcome = Outcome::InvariantViolation {
                    round,
                    violations: vec![v],
                };
                return finish(trace, outcome, current);
            }
        };
        let mut violations = monitors::collisions(&current, &event);
        if opts.monitors {
            violations = monitors::check_step(&current, &event, &post)
                .expect("engine output is consistent with its own records");
            violations.extend(monitors::check_state(&post));
        }
        sink(&event);
        trace.push(event);
        if !violations.is_empty() {
            for v in &mut violations {
                v.round = round;
            }
            return finish(
                trace,
                Outcome::InvariantViolation { round, violations },
                post,
            );
        }
        current = post;
    }
}
