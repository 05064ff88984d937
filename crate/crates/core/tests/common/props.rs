//! Engine properties as proptest runners, so that both the property test
//! target and the acceptance suite can drive them with a chosen case count.

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use misgrid::io::{self, read_trace, replay_digests, trace_to_string};
use misgrid::monitors;
use misgrid::placement::random_placement;
use misgrid::rules::GuardId;
use misgrid::sim::{run, step, RunOptions};
use misgrid::view::WINDOW;
use misgrid::{
    decide, extract_view, Action, ActivationSet, CellView, Color, Configuration, Coord, Direction,
    GridDims, MisRules, Robot, RobotId, SchedulerSpec, View,
};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn finish(
    name: &str,
    r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>,
) -> Result<(), String> {
    r.map_err(|e| format!("{name}: {e}"))
}

fn cell_value() -> impl Strategy<Value = Option<Color>> {
    prop_oneof![
        4 => Just(None),
        2 => Just(Some(Color::Green)),
        1 => Just(Some(Color::Blue)),
        1 => Just(Some(Color::Red)),
    ]
}

/// An arbitrary occupancy on a grid of up to 6x6, with at least one robot.
fn arbitrary_config() -> impl Strategy<Value = Configuration> {
    (2u32..=6, 2u32..=6)
        .prop_flat_map(|(m, n)| {
            let cells = proptest::collection::vec(cell_value(), (m * n) as usize);
            (Just(m), Just(n), cells, 0..(m * n) as usize)
        })
        .prop_map(|(m, n, mut cells, forced)| {
            if cells.iter().all(Option::is_none) {
                cells[forced] = Some(Color::Green);
            }
            let d = GridDims::new(m, n).unwrap();
            let placements = cells
                .iter()
                .enumerate()
                .filter_map(|(k, c)| c.map(|color| (d.coord_at(k), color)));
            Configuration::new(d, placements).unwrap()
        })
}

/// An arbitrary configuration and one of its robots.
fn observed() -> impl Strategy<Value = (Configuration, Coord)> {
    arbitrary_config().prop_flat_map(|c| {
        let nodes: Vec<Coord> = c.robots().values().map(|r| r.pos).collect();
        (Just(c), proptest::sample::select(nodes))
    })
}

/// A configuration reached from a random placement after a random number of
/// random rounds.
fn reachable() -> impl Strategy<Value = Configuration> {
    (
        2u32..=6,
        2u32..=6,
        any::<u64>(),
        any::<u64>(),
        0u64..120,
        1u32..=10,
    )
        .prop_map(|(m, n, placement, sched, rounds, p)| {
            let d = GridDims::new(m, n).unwrap();
            let initial = random_placement(d, placement);
            let spec = SchedulerSpec::random_fair(p as f64 / 10.0, sched).unwrap();
            run(
                &initial,
                &spec,
                &RunOptions {
                    cap: rounds,
                    monitors: false,
                },
            )
            .final_config
        })
}

fn subset(config: &Configuration, mask: u64) -> ActivationSet {
    let ids: Vec<RobotId> = config.ids().collect();
    let mut chosen: Vec<RobotId> = ids
        .iter()
        .enumerate()
        .filter(|(k, _)| mask >> (k % 64) & 1 == 1)
        .map(|(_, id)| *id)
        .collect();
    if chosen.is_empty() {
        chosen.push(ids[(mask % ids.len() as u64) as usize]);
    }
    ActivationSet::new(chosen).unwrap()
}

/// Equal views give equal decisions, every well-formed view gets one, and
/// nothing outside the 13-node window matters.
pub fn decide_purity(cases: u32) -> Result<(), String> {
    let strategy = (observed(), proptest::collection::vec(cell_value(), 36));
    let r = runner(cases).run(&strategy, |((config, at), noise)| {
        let v = extract_view(&config, at).unwrap();
        let d = decide(&v).map_err(|e| TestCaseError::fail(format!("{e} on {v:?}")))?;
        prop_assert_eq!(decide(&View::from_cells(v.cells())).unwrap(), d);
        prop_assert_eq!(decide(&v).unwrap(), d);
        // Rewrite every node outside the window at random.
        let dims = config.dims();
        let window: Vec<Coord> = WINDOW
            .iter()
            .filter_map(|&(di, dj)| dims.offset(at, di, dj))
            .collect();
        let placements = dims.coords().enumerate().filter_map(|(k, c)| {
            let color = if window.contains(&c) {
                config.robot_at(c).map(|(_, r)| r.color)
            } else {
                noise[k % noise.len()]
            };
            color.map(|col| (c, col))
        });
        let other = Configuration::new(dims, placements).unwrap();
        let w = extract_view(&other, at).unwrap();
        prop_assert_eq!(w, v);
        prop_assert_eq!(decide(&w).unwrap(), d);
        Ok(())
    });
    finish("decide purity", r)
}

fn missing_or_vacant(c: CellView) -> bool {
    c.missing() || c.vacant()
}

/// Every move targets a vacant cell and respects the collision clauses:
/// Left needs l2 absent, vacant or red; Up needs u2 and ne absent or vacant
/// and nw absent, vacant or red; Right into the east column needs ne absent,
/// vacant or red; Down only on the east boundary. Red robots never act.
pub fn move_legality(cases: u32) -> Result<(), String> {
    let r = runner(cases).run(&observed(), |(config, at)| {
        let v = extract_view(&config, at).unwrap();
        let d = decide(&v).unwrap();
        if v.here == CellView::Occupied(Color::Red) {
            prop_assert_eq!(d.action, Action::Noop);
        }
        if let Some(dir) = d.action.direction() {
            prop_assert!(
                dir.neighbour(&v).vacant(),
                "{:?} into non-vacant cell: {:?}",
                dir,
                v
            );
            match dir {
                Direction::Left => {
                    prop_assert!(
                        missing_or_vacant(v.l2) || v.l2.is(Color::Red),
                        "left: {:?}",
                        v
                    )
                }
                Direction::Up => {
                    prop_assert!(missing_or_vacant(v.u2), "up u2: {:?}", v);
                    prop_assert!(missing_or_vacant(v.ne), "up ne: {:?}", v);
                    prop_assert!(
                        missing_or_vacant(v.nw) || v.nw.is(Color::Red),
                        "up nw: {:?}",
                        v
                    );
                }
                Direction::Right => {
                    if v.r2.missing() {
                        prop_assert!(
                            missing_or_vacant(v.ne) || v.ne.is(Color::Red),
                            "right: {:?}",
                            v
                        );
                    }
                }
                Direction::Down => {
                    prop_assert!(v.r1.missing(), "down off the east boundary: {:?}", v)
                }
            }
        }
        Ok(())
    });
    finish("move legality", r)
}

/// With reds only on the parity set, a green turns red only on the parity
/// set.
pub fn red_on_target(cases: u32) -> Result<(), String> {
    let strategy = arbitrary_config().prop_map(|c| {
        let robots: BTreeMap<RobotId, Robot> = c
            .robots()
            .iter()
            .map(|(&id, &r)| {
                let color = if r.color == Color::Red && !r.pos.on_target() {
                    Color::Green
                } else {
                    r.color
                };
                (id, Robot { pos: r.pos, color })
            })
            .collect();
        Configuration::with_ids(c.dims(), robots).unwrap()
    });
    let r = runner(cases).run(&strategy, |config| {
        for r in config.robots().values() {
            let d = decide(&extract_view(&config, r.pos).unwrap()).unwrap();
            if d.guard == GuardId::GRed {
                prop_assert!(
                    r.pos.on_target(),
                    "red at {} in {}",
                    r.pos,
                    config.canonical_encoding()
                );
            }
        }
        Ok(())
    });
    finish("red on target", r)
}

/// From reachable states, a round keeps the robot count, keeps positions
/// distinct, leaves reds untouched, and trips no monitor.
pub fn step_preservation(cases: u32) -> Result<(), String> {
    let r = runner(cases).run(&(reachable(), any::<u64>()), |(config, mask)| {
        let act = subset(&config, mask);
        let (post, event) = step(&config, &act).map_err(|e| {
            TestCaseError::fail(format!("{e} from {}", config.canonical_encoding()))
        })?;
        prop_assert_eq!(post.len(), config.len());
        prop_assert!(Configuration::with_ids(post.dims(), post.robots().clone()).is_ok());
        for (id, r) in config.robots() {
            if r.color == Color::Red {
                prop_assert_eq!(post.robot(*id), Some(r));
            }
        }
        let mut vs = monitors::check_step(&config, &event, &post).unwrap();
        vs.extend(monitors::check_state(&post));
        prop_assert!(
            vs.is_empty(),
            "{:?} from {}",
            vs,
            config.canonical_encoding()
        );
        Ok(())
    });
    finish("step preservation", r)
}

/// Renaming robots before a round and renaming back afterwards changes
/// nothing.
pub fn anonymity(cases: u32) -> Result<(), String> {
    let strategy = (reachable(), any::<u64>(), any::<u64>());
    let r = runner(cases).run(&strategy, |(config, mask, shift)| {
        let act = subset(&config, mask);
        let k = config.len() as u64;
        // A rotation of the ids plus a large offset.
        let rename = |id: RobotId| RobotId(((id.0 as u64 + shift) % k) as u32 * 7 + 1000);
        let renamed: BTreeMap<RobotId, Robot> = config
            .robots()
            .iter()
            .map(|(&id, &r)| (rename(id), r))
            .collect();
        let renamed = Configuration::with_ids(config.dims(), renamed).unwrap();
        let renamed_act = ActivationSet::new(act.ids().iter().map(|&id| rename(id))).unwrap();
        let (a, ea) = step(&config, &act).unwrap();
        let (b, eb) = step(&renamed, &renamed_act).unwrap();
        prop_assert_eq!(ea.digest, eb.digest);
        prop_assert_eq!(a.digest(), b.digest());
        for (id, r) in a.robots() {
            prop_assert_eq!(b.robot(rename(*id)), Some(r));
        }
        Ok(())
    });
    finish("anonymity", r)
}

/// Same inputs, same run.
pub fn seeded_determinism(cases: u32) -> Result<(), String> {
    let strategy = (2u32..=5, 2u32..=5, any::<u64>(), any::<u64>(), 1u32..=10);
    let r = runner(cases).run(&strategy, |(m, n, placement, sched, p)| {
        let d = GridDims::new(m, n).unwrap();
        let spec = SchedulerSpec::random_fair(p as f64 / 10.0, sched).unwrap();
        let opts = RunOptions::new(misgrid::sim::default_cap(d));
        let a = run(&random_placement(d, placement), &spec, &opts);
        let b = run(&random_placement(d, placement), &spec, &opts);
        prop_assert_eq!(&a.outcome, &b.outcome);
        prop_assert_eq!(&a.trace, &b.trace);
        prop_assert!(a.outcome.is_completed(), "{:?}", a.outcome);
        Ok(())
    });
    finish("seeded determinism", r)
}

/// A written trace reads back, and replaying its activation sets from the
/// initial configuration reproduces every digest.
pub fn trace_round_trip(cases: u32) -> Result<(), String> {
    let strategy = (2u32..=5, 2u32..=5, any::<u64>(), any::<u64>(), 1u32..=10);
    let r = runner(cases).run(&strategy, |(m, n, placement, sched, p)| {
        let d = GridDims::new(m, n).unwrap();
        let initial = random_placement(d, placement);
        let spec = SchedulerSpec::random_fair(p as f64 / 10.0, sched).unwrap();
        let result = run(
            &initial,
            &spec,
            &RunOptions::new(misgrid::sim::default_cap(d)),
        );
        let text = trace_to_string(&result.trace);
        prop_assert_eq!(text.lines().count(), result.trace.len());
        let lines = read_trace(text.as_bytes()).unwrap();
        let replayed = replay_digests(&MisRules, &initial, &lines).unwrap();
        let recorded: Vec<_> = lines.iter().map(|l| l.digest).collect();
        prop_assert_eq!(replayed, recorded);
        prop_assert_eq!(
            lines.last().map(|l| l.digest),
            result.trace.last().map(|e| e.digest)
        );
        prop_assert_eq!(
            io::final_reds(&lines),
            result.final_config.nodes_with(Color::Red)
        );
        Ok(())
    });
    finish("trace round trip", r)
}

/// Every property with its name, for the acceptance suite.
pub type Property = fn(u32) -> Result<(), String>;

pub fn all() -> Vec<(&'static str, Property)> {
    vec![
        ("decide purity and totality", decide_purity),
        ("move legality and collision clauses", move_legality),
        ("red only on the parity set", red_on_target),
        ("count, distinctness, red permanence", step_preservation),
        ("anonymity", anonymity),
        ("seeded determinism", seeded_determinism),
        ("trace round trip", trace_round_trip),
    ]
}
