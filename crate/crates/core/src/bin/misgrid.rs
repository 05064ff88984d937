//! `misgrid`: simulate runs, explore small grids exhaustively, and check
//! independent sets.
//!
//! Exit codes: `simulate` 0 completed, 1 violation or deadlock, 2 round cap;
//! `explore` 0 pass, 1 fail, 2 budget; `verify-mis` 0 maximum, 1 not.
//! Usage and input errors exit 3 everywhere.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use misgrid::explorer::{self, ExploreError, ExploreOptions};
use misgrid::faults::Greedy;
use misgrid::io::{self, RunConfigFile, TraceWriter};
use misgrid::placement::{self, Corner};
use misgrid::sim::{default_cap, run_with, Outcome, RunOptions, SchedulerSpec};
use misgrid::{
    brute_force_max_independent_size, is_maximum_independent, Configuration, Coord, GridDims,
    MisRules, Rules,
};

const USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "misgrid",
    version,
    about = "Luminous robots forming a maximum independent set on a grid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol from one initial placement.
    Simulate(SimulateArgs),
    /// Explore every reachable state under every activation subset.
    Explore(ExploreArgs),
    /// Check that a node set is a maximum independent set.
    VerifyMis(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementName {
    Random,
    PackedNe,
    PackedSe,
    PackedSw,
    PackedNw,
    Target,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerName {
    Fullsync,
    Random,
    Roundrobin,
    Sweep,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    rows: Option<u32>,
    #[arg(long)]
    cols: Option<u32>,
    #[arg(long, value_enum, conflicts_with = "config")]
    placement: Option<PlacementName>,
    /// Run configuration JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scheduler: Option<SchedulerName>,
    /// Seed for the random placement and the random scheduler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Activation probability of the random scheduler.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Block size of the round-robin scheduler.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Defaults to 50*m*n*(m+n).
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Write the trace as JSON Lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write one frame per round; SVG when the name ends in `.svg`.
    #[arg(long)]
    frames: Option<PathBuf>,
    #[arg(long)]
    no_monitors: bool,
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long)]
    rows: u32,
    #[arg(long)]
    cols: u32,
    /// Start from every placement of ceil(m*n/2) green robots (default).
    #[arg(long, conflicts_with = "initial")]
    all_initials: bool,
    /// Start from the placement in a run configuration file.
    #[arg(long)]
    initial: Option<PathBuf>,
    /// Largest robot count explored with every activation subset.
    #[arg(long, default_value_t = 6)]
    subset_budget: usize,
    /// Explore larger robot counts with sampled activation subsets.
    #[arg(long)]
    allow_sampled: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the exploration report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    rows: u32,
    #[arg(long)]
    cols: u32,
    /// Nodes as "i,j;i,j;...".
    #[arg(
        long,
        conflicts_with = "from_final",
        required_unless_present = "from_final"
    )]
    nodes: Option<String>,
    /// Take the red nodes at the end of a trace file.
    #[arg(long)]
    from_final: Option<PathBuf>,
    /// Also report the brute-force maximum (at most 20 nodes).
    #[arg(long)]
    oracle: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Explore(a) => explore(a),
        Command::VerifyMis(a) => verify_mis(a),
    };
    ExitCode::from(code.unwrap_or_else(|msg| {
        eprintln!("error: {msg}");
        USAGE
    }))
}

fn dims(rows: Option<u32>, cols: Option<u32>) -> Result<GridDims, String> {
    match (rows, cols) {
        (Some(m), Some(n)) => GridDims::new(m, n).map_err(|e| e.to_string()),
        _ => Err("--rows and --cols are required".into()),
    }
}

fn place(dims: GridDims, name: PlacementName, seed: u64) -> Configuration {
    match name {
        PlacementName::Random => placement::random_placement(dims, seed),
        PlacementName::PackedNe => placement::packed_corner(dims, Corner::NE),
        PlacementName::PackedSe => placement::packed_corner(dims, Corner::SE),
        PlacementName::PackedSw => placement::packed_corner(dims, Corner::SW),
        PlacementName::PackedNw => placement::packed_corner(dims, Corner::NW),
        PlacementName::Target => placement::target_preset(dims),
    }
}

fn scheduler(name: SchedulerName, a: &SimulateArgs) -> Result<SchedulerSpec, String> {
    match name {
        SchedulerName::Fullsync => Ok(SchedulerSpec::FullSync),
        SchedulerName::Random => SchedulerSpec::random_fair(a.p, a.seed),
        SchedulerName::Roundrobin => SchedulerSpec::round_robin(a.k),
        SchedulerName::Sweep => Ok(SchedulerSpec::SingletonSweep { order: Vec::new() }),
    }
}

fn outcome_text(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Completed { rounds } => format!("Completed in {rounds} rounds"),
        Outcome::RoundCapExceeded { cap } => format!("Round cap of {cap} exceeded"),
        Outcome::InvariantViolation { round, violations } => {
            format!(
                "Invariant violation in round {round} ({} found)",
                violations.len()
            )
        }
        Outcome::QuiescentNonFinal { round } => {
            format!("Quiescent without finishing after round {round}")
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<u8, String> {
    let mut file = None;
    let initial = match &a.config {
        Some(path) => {
            let f = RunConfigFile::load(path).map_err(|e| e.to_string())?;
            let config = f.configuration().map_err(|e| e.to_string())?;
            let d = config.dims();
            if a.rows.is_some_and(|m| m != d.rows()) || a.cols.is_some_and(|n| n != d.cols()) {
                return Err(format!(
                    "--rows/--cols disagree with the {d} grid in the config file"
                ));
            }
            file = Some(f);
            config
        }
        None => {
            let d = dims(a.rows, a.cols)?;
            place(d, a.placement.unwrap_or(PlacementName::Random), a.seed)
        }
    };
    let spec = match (a.scheduler, &file) {
        (Some(name), _) => scheduler(name, &a)?,
        (None, Some(f)) => f.scheduler().map_err(|e| e.to_string())?,
        (None, None) => SchedulerSpec::FullSync,
    };
    let cap = a
        .max_rounds
        .or(file.as_ref().and_then(|f| f.max_rounds))
        .unwrap_or_else(|| default_cap(initial.dims()));
    let monitors = !a.no_monitors && file.as_ref().is_none_or(|f| f.monitors);
    let trace_path = a
        .trace
        .clone()
        .or(file.as_ref().and_then(|f| f.trace.clone()));
    let frames_path = a
        .frames
        .clone()
        .or(file.as_ref().and_then(|f| f.frames.clone()));

    let mut writer = match &trace_path {
        Some(p) => Some(TraceWriter::create(p).map_err(|e| e.to_string())?),
        None => None,
    };
    let mut write_error = None;
    let opts = RunOptions { cap, monitors };
    let result = run_with(&MisRules, &initial, &spec, &opts, |event| {
        if let Some(w) = writer.as_mut() {
            if let Err(e) = w.write(event) {
                write_error.get_or_insert(e.to_string());
            }
        }
    });
    if let Some(w) = writer {
        w.finish().map_err(|e| e.to_string())?;
    }
    if let Some(e) = write_error {
        return Err(e);
    }
    if let Some(p) = &frames_path {
        io::write_frames(p, &io::frames(&initial, &result.trace)).map_err(|e| e.to_string())?;
    }

    let violations = match &result.outcome {
        Outcome::InvariantViolation { violations, .. } => violations.as_slice(),
        _ => &[],
    };
    println!("grid: {}", initial.dims());
    println!("robots: {}", initial.len());
    println!("{}", outcome_text(&result.outcome));
    println!("rounds: {}", result.trace.len());
    println!("moves: {}", result.moves());
    println!("color changes: {}", result.color_changes());
    println!("violations: {}", violations.len());
    for v in violations {
        println!("  {} in round {}: {}", v.kind, v.round, v.description);
    }
    println!("final digest: {}", result.final_config.digest());
    println!("{}", io::render_ascii(&result.final_config));
    Ok(match result.outcome {
        Outcome::Completed { .. } => 0,
        Outcome::RoundCapExceeded { .. } => 2,
        Outcome::InvariantViolation { .. } | Outcome::QuiescentNonFinal { .. } => 1,
    })
}

fn explore(a: ExploreArgs) -> Result<u8, String> {
    let d = dims(Some(a.rows), Some(a.cols))?;
    let mut opts = ExploreOptions {
        subset_budget: a.subset_budget,
        allow_sampled: a.allow_sampled,
        seed: a.seed,
        jobs: a.jobs,
        ..ExploreOptions::default()
    };
    if let Some(s) = a.max_states {
        opts.max_states = s;
    }
    let initials: Vec<Configuration> = match &a.initial {
        Some(path) => {
            let f = RunConfigFile::load(path).map_err(|e| e.to_string())?;
            vec![f.configuration().map_err(|e| e.to_string())?]
        }
        None => match explorer::enumerate_initials(d) {
            Ok(it) => it.collect(),
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(2);
            }
        },
    };
    let rules: &dyn Rules = if a.inject_fault { &Greedy } else { &MisRules };
    let exploration = match explorer::explore(rules, d, initials, &opts) {
        Ok(x) => x,
        Err(e @ (ExploreError::DimsMismatch { .. } | ExploreError::InvalidInitial)) => {
            return Err(e.to_string())
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(2);
        }
    };
    let r = &exploration.report;
    if let Some(p) = &a.report {
        io::write_report(p, r).map_err(|e| e.to_string())?;
    }
    println!("grid: {d}");
    println!("initials: {}", r.initial_count);
    println!("reachable states: {}", r.reachable_states);
    println!("transitions: {}", r.transitions);
    println!("final states: {}", r.final_states);
    println!("violations: {}", r.violation_count);
    for (kind, n) in &r.violation_summary {
        println!("  {kind}: {n}");
    }
    println!("quiescent non-final: {}", r.quiescent_non_final.len());
    println!(
        "east-leg row-order states (allowed): {}",
        r.east_leg_row_order_states
    );
    println!("final reachable: {}", r.final_reachable);
    if r.sampled {
        println!(
            "sampled: activation subsets were sampled above {} robots",
            opts.subset_budget
        );
    }
    println!("time: {} ms", r.wall_time_ms);
    if r.truncated {
        println!("FAIL: truncated at {} states", r.reachable_states);
        return Ok(2);
    }
    if r.passed() {
        println!("PASS");
        return Ok(0);
    }
    let bad = r
        .violations
        .first()
        .map(|v| v.state)
        .or_else(|| r.quiescent_non_final.first().copied())
        .or(r.counterexample);
    match bad {
        Some(digest) => {
            println!("FAIL: counterexample {digest}");
            if let Ok(w) = exploration.graph.witness(digest) {
                println!("  initial: {}", w.initial.canonical_encoding());
                for (k, step) in w.steps.iter().enumerate() {
                    let cs: Vec<String> = step.iter().map(Coord::to_string).collect();
                    println!("  round {}: activate {}", k + 1, cs.join(" "));
                }
            }
        }
        None => println!("FAIL"),
    }
    Ok(1)
}

fn verify_mis(a: VerifyArgs) -> Result<u8, String> {
    let d = dims(Some(a.rows), Some(a.cols))?;
    let nodes = match (&a.nodes, &a.from_final) {
        (Some(text), _) => io::parse_nodes(text).map_err(|e| e.to_string())?,
        (None, Some(path)) => final_nodes(path)?,
        (None, None) => return Err("one of --nodes or --from-final is required".into()),
    };
    let ok = is_maximum_independent(d, &nodes).map_err(|e| e.to_string())?;
    println!("grid: {d}");
    println!("nodes: {}", nodes.len());
    println!("required size: {}", d.mis_size());
    if d.node_count() <= 20 {
        let best = brute_force_max_independent_size(d).map_err(|e| e.to_string())?;
        if best != d.mis_size() {
            println!(
                "brute-force maximum {best} disagrees with ceil(m*n/2) = {}",
                d.mis_size()
            );
            return Ok(1);
        }
        if a.oracle {
            println!("brute-force maximum: {best}");
        }
    } else if a.oracle {
        println!(
            "brute-force maximum: skipped ({} nodes > 20)",
            d.node_count()
        );
    }
    println!("maximum independent set: {}", if ok { "yes" } else { "no" });
    Ok(if ok { 0 } else { 1 })
}

fn final_nodes(path: &Path) -> Result<BTreeSet<Coord>, String> {
    let lines = io::load_trace(path).map_err(|e| e.to_string())?;
    Ok(io::final_reds(&lines))
}
