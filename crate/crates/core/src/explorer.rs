//! Explicit-state exploration of every schedule from every initial placement.
//!
//! States are anonymous occupancy grids. From each state the explorer applies
//! every nonempty activation subset (or, above a robot-count threshold, a
//! seeded sample of subsets), checks every transition and every state, and
//! keeps one predecessor per state so any state can be replayed.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Configuration, Digest, Occupancy, RobotId};
use crate::grid::{Color, Coord, GridDims};
use crate::monitors::{self, Violation, ViolationKind};
use crate::rules::{Action, Decision, Rules};
use crate::sim::{apply_decisions, compute, is_final, ActivationSet, StepError};

pub use crate::config::canonical_digest;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("{count} initial placements exceed the budget of {limit}")]
    InitialBudget { count: u128, limit: u128 },
    #[error("{robots} robots exceed the full-branching limit of {limit}; sampling not allowed")]
    SamplingRequired { robots: usize, limit: usize },
    #[error("grid {0} too large for exploration (at most 64 nodes)")]
    GridTooLarge(GridDims),
    #[error("exploration was truncated at {0} states")]
    Truncated(usize),
    #[error("no explored state has digest {0}")]
    UnknownDigest(Digest),
    #[error("initial configuration is on a {found} grid, expected {expected}")]
    DimsMismatch { expected: GridDims, found: GridDims },
    #[error("initial configuration places two robots on one node")]
    InvalidInitial,
}

/// Default number of initial placements [`enumerate_initials`] will produce.
pub const INITIAL_LIMIT: u128 = 2_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Every placement of `ceil(m*n/2)` green robots on distinct nodes, each
/// exactly once, in lexicographic row-major order.
pub fn enumerate_initials(
    dims: GridDims,
) -> Result<impl Iterator<Item = Configuration>, ExploreError> {
    enumerate_initials_within(dims, INITIAL_LIMIT)
}

pub fn enumerate_initials_within(
    dims: GridDims,
    limit: u128,
) -> Result<impl Iterator<Item = Configuration>, ExploreError> {
    let p = dims.node_count() as usize;
    let k = dims.mis_size();
    let count = binomial(p as u128, k as u128);
    if count > limit {
        return Err(ExploreError::InitialBudget { count, limit });
    }
    Ok((0..p).combinations(k).map(move |nodes| {
        Configuration::green(dims, nodes.into_iter().map(|x| dims.coord_at(x)))
            .expect("combinations are distinct and in range")
    }))
}

/// Packed occupancy: two bits per cell, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Key(u128);

impl Key {
    fn of(occ: &Occupancy) -> Key {
        let dims = occ.dims();
        let mut k = 0u128;
        for (c, col) in occ.occupied() {
            let code = match col {
                Color::Green => 1u128,
                Color::Blue => 2,
                Color::Red => 3,
            };
            k |= code << (2 * dims.index(c));
        }
        Key(k)
    }

    fn occupancy(self, dims: GridDims) -> Occupancy {
        let mut occ = Occupancy::empty(dims);
        for idx in 0..dims.node_count() as usize {
            let col = match (self.0 >> (2 * idx)) & 3 {
                0 => None,
                1 => Some(Color::Green),
                2 => Some(Color::Blue),
                _ => Some(Color::Red),
            };
            occ.set(dims.coord_at(idx), col);
        }
        occ
    }

    fn config(self, dims: GridDims) -> Configuration {
        self.occupancy(dims).to_config()
    }
}

#[derive(Debug, Clone)]
pub struct ExploreOptions {
    /// Robot count up to which all `2^k - 1` activation subsets are expanded.
    pub subset_budget: usize,
    /// Above `subset_budget`, expand singletons, the full set, and this many
    /// seeded random subsets instead.
    pub sampled_subsets: usize,
    pub allow_sampled: bool,
    pub seed: u64,
    /// Stop after this many distinct states; the result is then truncated.
    pub max_states: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    /// Violation records kept in the report (all are counted).
    pub max_recorded_violations: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        Self {
            subset_budget: 6,
            sampled_subsets: 32,
            allow_sampled: false,
            seed: 0,
            max_states: 20_000_000,
            jobs: None,
            max_recorded_violations: 1000,
        }
    }
}

/// A violation together with the state and activation that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub state: Digest,
    pub activated: Vec<Coord>,
    /// `"reconstruction"` for checks specific to this guard table,
    /// `"protocol"` for the protocol's own claims.
    pub scope: String,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub rows: u32,
    pub cols: u32,
    pub initial_count: usize,
    pub reachable_states: usize,
    pub transitions: u64,
    pub final_states: usize,
    pub violation_count: usize,
    pub violation_summary: BTreeMap<ViolationKind, usize>,
    pub violations: Vec<ViolationRecord>,
    pub quiescent_non_final: Vec<Digest>,
    /// States with an east-column blue right of a green in its row; allowed.
    pub east_leg_row_order_states: usize,
    pub final_reachable: bool,
    pub counterexample: Option<Digest>,
    pub peak_frontier: usize,
    pub wall_time_ms: u128,
    pub sampled: bool,
    pub truncated: bool,
}

impl ExplorationReport {
    /// Zero violations, zero deadlocks, completion reachable everywhere, and
    /// the state space closed.
    pub fn passed(&self) -> bool {
        self.violation_count == 0
            && self.quiescent_non_final.is_empty()
            && self.final_reachable
            && !self.truncated
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violation_summary.get(&kind).copied().unwrap_or(0)
    }
}

/// Reachable-state graph with one stored predecessor per non-initial state.
#[derive(Debug, Clone)]
pub struct StateGraph {
    dims: GridDims,
    keys: Vec<Key>,
    index: HashMap<Key, u32>,
    /// `(predecessor, activation mask over the predecessor's row-major robots)`.
    pred: Vec<Option<(u32, u64)>>,
    succ: Vec<Vec<u32>>,
    truncated: bool,
}

impl StateGraph {
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn configs(&self) -> impl Iterator<Item = Configuration> + '_ {
        self.keys.iter().map(|k| k.config(self.dims))
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        config.dims() == self.dims && self.index.contains_key(&Key::of(&config.occupancy()))
    }

    fn find(&self, digest: Digest) -> Option<u32> {
        self.keys
            .iter()
            .position(|k| k.config(self.dims).digest() == digest)
            .map(|i| i as u32)
    }

    /// Schedule from an initial placement to the state with `digest`.
    pub fn witness(&self, digest: Digest) -> Result<Witness, ExploreError> {
        let mut at = self
            .find(digest)
            .ok_or(ExploreError::UnknownDigest(digest))?;
        let mut steps = Vec::new();
        while let Some((p, mask)) = self.pred[at as usize] {
            let pre = self.keys[p as usize].occupancy(self.dims);
            let coords: Vec<Coord> = pre
                .occupied()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, (c, _))| c)
                .collect();
            steps.push(coords);
            at = p;
        }
        steps.reverse();
        Ok(Witness {
            initial: self.keys[at as usize].config(self.dims),
            steps,
            target: digest,
        })
    }

    /// Adds a state with no successors, reachable from state `from`. Fault
    /// injection for the liveness check.
    #[doc(hidden)]
    pub fn inject_absorbing(&mut self, from: &Configuration, dead: &Configuration) {
        let k = Key::of(&dead.occupancy());
        let id = self.keys.len() as u32;
        self.keys.push(k);
        self.index.insert(k, id);
        self.pred.push(None);
        self.succ.push(Vec::new());
        let f = self.index[&Key::of(&from.occupancy())];
        self.pred[id as usize] = Some((f, 1));
        self.succ[f as usize].push(id);
    }
}

/// Initial placement plus the activated positions of each round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub initial: Configuration,
    pub steps: Vec<Vec<Coord>>,
    pub target: Digest,
}

impl Witness {
    /// Replays the schedule through the round engine and returns the reached
    /// configuration.
    pub fn replay<R: Rules + ?Sized>(&self, rules: &R) -> Result<Configuration, StepError> {
        let mut config = self.initial.clone();
        for (round, coords) in self.steps.iter().enumerate() {
            let ids: Vec<RobotId> = coords
                .iter()
                .filter_map(|c| config.robot_at(*c).map(|(id, _)| id))
                .collect();
            let act = ActivationSet::new(ids)?;
            let decisions = compute(rules, &config, act.ids().iter().copied())?;
            config = apply_decisions(&config, &decisions, round as u64 + 1).0;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Digest>,
}

/// Every reachable state has a path to an all-red state. Because a fair
/// scheduler may always activate everyone, a path through the subset graph is
/// a schedule the adversary cannot rule out.
pub fn verify_final_reachability(graph: &StateGraph) -> Result<Verdict, ExploreError> {
    let good = completing(graph)?;
    let bad = good.iter().position(|g| !g);
    Ok(Verdict {
        holds: bad.is_none(),
        counterexample: bad.map(|s| graph.keys[s].config(graph.dims).digest()),
    })
}

/// All reachable states from which no all-red state is reachable.
pub fn non_completing_states(graph: &StateGraph) -> Result<Vec<Configuration>, ExploreError> {
    let good = completing(graph)?;
    Ok(good
        .iter()
        .enumerate()
        .filter(|(_, g)| !**g)
        .map(|(s, _)| graph.keys[s].config(graph.dims))
        .collect())
}

/// Backward closure from the all-red states.
fn completing(graph: &StateGraph) -> Result<Vec<bool>, ExploreError> {
    if graph.truncated {
        return Err(ExploreError::Truncated(graph.len()));
    }
    let n = graph.len();
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (s, outs) in graph.succ.iter().enumerate() {
        for &t in outs {
            rev[t as usize].push(s as u32);
        }
    }
    let mut good = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    for (s, k) in graph.keys.iter().enumerate() {
        if is_final(&k.config(graph.dims)) {
            good[s] = true;
            stack.push(s as u32);
        }
    }
    while let Some(t) = stack.pop() {
        for &s in &rev[t as usize] {
            if !good[s as usize] {
                good[s as usize] = true;
                stack.push(s);
            }
        }
    }
    Ok(good)
}

/// Result of [`explore`]: the report and the graph it summarizes.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub report: ExplorationReport,
    pub graph: StateGraph,
}

struct Expansion {
    transitions: u64,
    succ: Vec<(Key, u64)>,
    violations: Vec<(Vec<Coord>, Violation)>,
    quiescent: bool,
    is_final: bool,
}

fn activation_masks(k: usize, opts: &ExploreOptions, key: Key) -> Vec<u64> {
    if k == 0 {
        return Vec::new();
    }
    if k <= opts.subset_budget {
        return (1..(1u64 << k)).collect();
    }
    let full = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut masks: Vec<u64> = (0..k).map(|b| 1u64 << b).collect();
    masks.push(full);
    let mut rng = ChaCha8Rng::seed_from_u64(
        opts.seed ^ (key.0 as u64) ^ ((key.0 >> 64) as u64).rotate_left(17),
    );
    for _ in 0..opts.sampled_subsets {
        let m = rng.gen::<u64>() & full;
        if m != 0 {
            masks.push(m);
        }
    }
    masks.sort_unstable();
    masks.dedup();
    masks
}

fn expand<R: Rules + ?Sized>(
    rules: &R,
    dims: GridDims,
    key: Key,
    opts: &ExploreOptions,
) -> Expansion {
    let config = key.config(dims);
    let ids: Vec<RobotId> = config.ids().collect();
    let mut out = Expansion {
        transitions: 0,
        succ: Vec::new(),
        violations: Vec::new(),
        quiescent: false,
        is_final: is_final(&config),
    };
    let decisions: Vec<(RobotId, Decision)> = match compute(rules, &config, ids.iter().copied()) {
        Ok(d) => d,
        Err(e) => {
            out.violations
                .push((Vec::new(), Violation::engine_error(0, &e)));
            return out;
        }
    };
    if !out.is_final && decisions.iter().all(|(_, d)| d.action == Action::Noop) {
        out.quiescent = true;
    }
    for mask in activation_masks(ids.len(), opts, key) {
        out.transitions += 1;
        let chosen: Vec<(RobotId, Decision)> = decisions
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, d)| *d)
            .collect();
        if chosen.iter().all(|(_, d)| d.action == Action::Noop) {
            // Self-loop.
            continue;
        }
        let (post, event) = apply_decisions(&config, &chosen, 1);
        let activated = || -> Vec<Coord> {
            chosen
                .iter()
                .map(|(id, _)| config.robot(*id).unwrap().pos)
                .collect()
        };
        let step_violations = monitors::check_step(&config, &event, &post)
            .expect("engine output is consistent with its own records");
        let state_violations = monitors::check_state(&post);
        let broken = state_violations
            .iter()
            .any(|v| v.kind == ViolationKind::DistinctnessBroken);
        for v in step_violations.into_iter().chain(state_violations) {
            out.violations.push((activated(), v));
        }
        if !broken {
            out.succ.push((Key::of(&post.occupancy()), mask));
        }
    }
    out
}

/// Breadth-first closure of the activation-subset transition relation from
/// the given initial configurations.
pub fn explore<R: Rules + ?Sized>(
    rules: &R,
    dims: GridDims,
    initials: impl IntoIterator<Item = Configuration>,
    opts: &ExploreOptions,
) -> Result<Exploration, ExploreError> {
    if dims.node_count() > 64 {
        return Err(ExploreError::GridTooLarge(dims));
    }
    let started = Instant::now();
    let mut graph = StateGraph {
        dims,
        keys: Vec::new(),
        index: HashMap::new(),
        pred: Vec::new(),
        succ: Vec::new(),
        truncated: false,
    };
    let mut report = ExplorationReport {
        rows: dims.rows(),
        cols: dims.cols(),
        initial_count: 0,
        reachable_states: 0,
        transitions: 0,
        final_states: 0,
        violation_count: 0,
        violation_summary: BTreeMap::new(),
        violations: Vec::new(),
        quiescent_non_final: Vec::new(),
        east_leg_row_order_states: 0,
        final_reachable: false,
        counterexample: None,
        peak_frontier: 0,
        wall_time_ms: 0,
        sampled: false,
        truncated: false,
    };

    let record =
        |report: &mut ExplorationReport, state: Digest, activated: Vec<Coord>, v: Violation| {
            report.violation_count += 1;
            *report.violation_summary.entry(v.kind).or_default() += 1;
            if report.violations.len() < opts.max_recorded_violations {
                let scope = if v.kind == ViolationKind::RedOffTarget {
                    "reconstruction"
                } else {
                    "protocol"
                };
                report.violations.push(ViolationRecord {
                    state,
                    activated,
                    scope: scope.into(),
                    violation: v,
                });
            }
        };

    let mut frontier: Vec<u32> = Vec::new();
    for init in initials {
        if init.dims() != dims {
            return Err(ExploreError::DimsMismatch {
                expected: dims,
                found: init.dims(),
            });
        }
        report.initial_count += 1;
        let vs = monitors::check_state(&init);
        if vs
            .iter()
            .any(|v| v.kind == ViolationKind::DistinctnessBroken)
        {
            return Err(ExploreError::InvalidInitial);
        }
        if init.len() > opts.subset_budget {
            if !opts.allow_sampled {
                return Err(ExploreError::SamplingRequired {
                    robots: init.len(),
                    limit: opts.subset_budget,
                });
            }
            report.sampled = true;
        }
        let key = Key::of(&init.occupancy());
        if graph.index.contains_key(&key) {
            continue;
        }
        for v in vs {
            record(&mut report, init.digest(), Vec::new(), v);
        }
        let id = graph.keys.len() as u32;
        graph.keys.push(key);
        graph.index.insert(key, id);
        graph.pred.push(None);
        graph.succ.push(Vec::new());
        frontier.push(id);
    }

    let pool = opts.jobs.map(|j| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .expect("thread pool")
    });

    while !frontier.is_empty() {
        report.peak_frontier = report.peak_frontier.max(frontier.len());
        let keys: Vec<Key> = frontier.iter().map(|&s| graph.keys[s as usize]).collect();
        let work = || -> Vec<Expansion> {
            keys.par_iter()
                .map(|&k| expand(rules, dims, k, opts))
                .collect()
        };
        let expansions = match &pool {
            Some(p) => p.install(work),
            None => work(),
        };
        let mut next = Vec::new();
        for (&s, exp) in frontier.iter().zip(expansions) {
            report.transitions += exp.transitions;
            let digest = || graph.keys[s as usize].config(dims).digest();
            if exp.is_final {
                report.final_states += 1;
                match monitors::check_final(&graph.keys[s as usize].config(dims)) {
                    Ok(vs) => {
                        for v in vs {
                            record(&mut report, digest(), Vec::new(), v);
                        }
                    }
                    Err(_) => unreachable!("final state checked as final"),
                }
            }
            if exp.quiescent {
                report.quiescent_non_final.push(digest());
            }
            for (activated, v) in exp.violations {
                record(&mut report, digest(), activated, v);
            }
            let mut outs = Vec::with_capacity(exp.succ.len());
            for (key, mask) in exp.succ {
                let t = match graph.index.get(&key) {
                    Some(&t) => t,
                    None => {
                        if graph.keys.len() >= opts.max_states {
                            graph.truncated = true;
                            continue;
                        }
                        let t = graph.keys.len() as u32;
                        graph.keys.push(key);
                        graph.index.insert(key, t);
                        graph.pred.push(Some((s, mask)));
                        graph.succ.push(Vec::new());
                        let post = key.config(dims);
                        if !monitors::row_order_warnings(&post).is_empty() {
                            report.east_leg_row_order_states += 1;
                        }
                        next.push(t);
                        t
                    }
                };
                outs.push(t);
            }
            outs.sort_unstable();
            outs.dedup();
            graph.succ[s as usize] = outs;
        }
        frontier = next;
    }

    report.reachable_states = graph.len();
    report.truncated = graph.truncated;
    if !graph.truncated {
        let verdict = verify_final_reachability(&graph)?;
        report.final_reachable = verdict.holds;
        report.counterexample = verdict.counterexample;
    }
    report.wall_time_ms = started.elapsed().as_millis();
    Ok(Exploration { report, graph })
}
