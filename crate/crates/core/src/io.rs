//! File formats: run configuration JSON, trace JSON Lines, exploration
//! reports, ASCII frames and a single-file SVG strip.
//!
//! A trace line looks like
//!
//! ```text
//! {"round":1,"activated":[0,1],"moves":[{"id":0,"guard":"G-LEFT","family":"G1","from":[1,2],"to":[1,1],"color":"green"}, ...],"digest":"..."}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, Configuration, Digest, Robot, RobotId};
use crate::explorer::ExplorationReport;
use crate::grid::{Color, Coord, GridDims, GridError};
use crate::rules::{guard_family, GuardId, Rules};
use crate::sim::{apply_round, ActivationSet, SchedulerSpec, StepError, TraceEvent};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("trace line {line}: {source}")]
    TraceLine {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid scheduler: {0}")]
    Scheduler(String),
    #[error("cannot parse node list: {0}")]
    Nodes(String),
}

fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.into(),
        source,
    })
}

fn create_file(path: &Path) -> Result<io::BufWriter<fs::File>, IoError> {
    fs::File::create(path)
        .map(io::BufWriter::new)
        .map_err(|source| IoError::File {
            path: path.into(),
            source,
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotEntry {
    pub r: u32,
    pub c: u32,
    #[serde(default = "green")]
    pub color: Color,
}

fn green() -> Color {
    Color::Green
}

/// Scheduler section of a run file. `type` is one of `fullsync`, `random`,
/// `roundrobin`, `sweep`, `scripted`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulerEntry {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<u32>>,
}

impl Default for SchedulerEntry {
    fn default() -> Self {
        Self {
            kind: "fullsync".into(),
            seed: None,
            p: None,
            k: None,
            script: None,
            order: None,
        }
    }
}

impl SchedulerEntry {
    pub fn to_spec(&self) -> Result<SchedulerSpec, IoError> {
        let ids = |v: &[u32]| v.iter().map(|&k| RobotId(k)).collect::<Vec<_>>();
        let spec = match self.kind.as_str() {
            "fullsync" => SchedulerSpec::FullSync,
            "random" => SchedulerSpec::random_fair(self.p.unwrap_or(0.5), self.seed.unwrap_or(0))
                .map_err(IoError::Scheduler)?,
            "roundrobin" => {
                SchedulerSpec::round_robin(self.k.unwrap_or(1)).map_err(IoError::Scheduler)?
            }
            "sweep" => SchedulerSpec::SingletonSweep {
                order: ids(self.order.as_deref().unwrap_or_default()),
            },
            "scripted" => {
                let script = self
                    .script
                    .as_deref()
                    .unwrap_or_default()
                    .iter()
                    .map(|s| ActivationSet::new(ids(s)))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| IoError::Scheduler(e.to_string()))?;
                SchedulerSpec::Scripted { script }
            }
            other => return Err(IoError::Scheduler(format!("unknown type {other:?}"))),
        };
        Ok(spec)
    }
}

/// Input file for `simulate --config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RunConfigFile {
    pub rows: u32,
    pub cols: u32,
    pub robots: Vec<RobotEntry>,
    #[serde(default)]
    pub scheduler: SchedulerEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u64>,
    #[serde(default = "yes")]
    pub monitors: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::parse(&read_file(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_config(config: &Configuration) -> Self {
        Self {
            rows: config.dims().rows(),
            cols: config.dims().cols(),
            robots: config
                .robots()
                .values()
                .map(|r| RobotEntry {
                    r: r.pos.i,
                    c: r.pos.j,
                    color: r.color,
                })
                .collect(),
            scheduler: SchedulerEntry::default(),
            max_rounds: None,
            monitors: true,
            trace: None,
            frames: None,
        }
    }

    /// Robots are numbered in file order.
    pub fn configuration(&self) -> Result<Configuration, IoError> {
        let dims = GridDims::new(self.rows, self.cols)?;
        let placements = self.robots.iter().map(|r| (Coord::new(r.r, r.c), r.color));
        Ok(Configuration::new(dims, placements)?)
    }

    pub fn scheduler(&self) -> Result<SchedulerSpec, IoError> {
        self.scheduler.to_spec()
    }
}

/// One robot's entry in a trace line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMove {
    pub id: RobotId,
    pub guard: GuardId,
    pub family: String,
    pub from: Coord,
    pub to: Coord,
    pub color: Color,
}

/// One round as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceLine {
    pub round: u64,
    pub activated: Vec<RobotId>,
    pub moves: Vec<TraceMove>,
    pub digest: Digest,
}

impl From<&TraceEvent> for TraceLine {
    fn from(e: &TraceEvent) -> Self {
        Self {
            round: e.round,
            activated: e.activated.clone(),
            moves: e
                .moves
                .iter()
                .map(|m| TraceMove {
                    id: m.id,
                    guard: m.guard,
                    family: guard_family(m.guard).into(),
                    from: m.from,
                    to: m.to,
                    color: m.color,
                })
                .collect(),
            digest: e.digest,
        }
    }
}

/// Appends trace lines to a writer, one JSON object per line.
pub struct TraceWriter<W: Write> {
    out: W,
}

impl TraceWriter<io::BufWriter<fs::File>> {
    pub fn create(path: &Path) -> Result<Self, IoError> {
        Ok(Self::new(create_file(path)?))
    }
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, event: &TraceEvent) -> Result<(), IoError> {
        serde_json::to_writer(&mut self.out, &TraceLine::from(event))?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, IoError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn trace_to_string(events: &[TraceEvent]) -> String {
    let mut w = TraceWriter::new(Vec::new());
    for e in events {
        w.write(e).expect("writing to memory");
    }
    String::from_utf8(w.finish().expect("writing to memory")).expect("JSON is UTF-8")
}

/// Parses JSON Lines; blank lines are skipped.
pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceLine>, IoError> {
    let mut lines = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str(&line).map_err(|source| IoError::TraceLine {
            line: k + 1,
            source,
        })?;
        lines.push(parsed);
    }
    Ok(lines)
}

pub fn load_trace(path: &Path) -> Result<Vec<TraceLine>, IoError> {
    read_trace(read_file(path)?.as_bytes())
}

/// Replays the recorded activation sets from `initial` and returns the digest
/// reached after each round.
pub fn replay_digests<R: Rules + ?Sized>(
    rules: &R,
    initial: &Configuration,
    lines: &[TraceLine],
) -> Result<Vec<Digest>, StepError> {
    let mut config = initial.clone();
    let mut out = Vec::with_capacity(lines.len());
    for line in lines {
        let act = ActivationSet::new(line.activated.iter().copied())?;
        let (post, event) = apply_round(rules, &config, &act, line.round)?;
        out.push(event.digest);
        config = post;
    }
    Ok(out)
}

/// Red nodes at the end of a trace, taken from each robot's last record.
pub fn final_reds(lines: &[TraceLine]) -> BTreeSet<Coord> {
    let mut last: BTreeMap<RobotId, &TraceMove> = BTreeMap::new();
    for m in lines.iter().flat_map(|l| &l.moves) {
        last.insert(m.id, m);
    }
    last.values()
        .filter(|m| m.color == Color::Red)
        .map(|m| m.to)
        .collect()
}

/// Parses `"i,j;i,j;..."`. Whitespace and a trailing `;` are allowed.
pub fn parse_nodes(text: &str) -> Result<BTreeSet<Coord>, IoError> {
    let mut out = BTreeSet::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (i, j) = part
            .split_once(',')
            .ok_or_else(|| IoError::Nodes(format!("{part:?} is not i,j")))?;
        let num = |s: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| IoError::Nodes(format!("{s:?} is not a row or column number")))
        };
        out.insert(Coord::new(num(i)?, num(j)?));
    }
    Ok(out)
}

pub fn write_report(path: &Path, report: &ExplorationReport) -> Result<(), IoError> {
    let mut out = create_file(path)?;
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// `m` lines of `n` characters, `.` for a vacant node.
pub fn render_ascii(config: &Configuration) -> String {
    let occ = config.occupancy();
    let dims = config.dims();
    let rows: Vec<String> = (1..=dims.rows())
        .map(|i| {
            (1..=dims.cols())
                .map(|j| occ.get(Coord::new(i, j)).map_or('.', Color::letter))
                .collect()
        })
        .collect();
    rows.join("\n")
}

/// The configuration after each recorded round, starting with `initial`.
pub fn frames(initial: &Configuration, events: &[TraceEvent]) -> Vec<Configuration> {
    let mut out = vec![initial.clone()];
    let mut robots: BTreeMap<RobotId, Robot> = initial.robots().clone();
    for e in events {
        for m in &e.moves {
            robots.insert(
                m.id,
                Robot {
                    pos: m.to,
                    color: m.color,
                },
            );
        }
        out.push(Configuration::unchecked(initial.dims(), robots.clone()));
    }
    out
}

/// ASCII frames separated by blank lines, each headed `round N`.
pub fn render_frames(frames: &[Configuration]) -> String {
    let mut s = String::new();
    for (round, f) in frames.iter().enumerate() {
        if round > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "round {round}");
        s.push_str(&render_ascii(f));
        s.push('\n');
    }
    s
}

const CELL: u32 = 20;
const GAP: u32 = 16;
const PER_ROW: u32 = 8;

fn fill(color: Color) -> &'static str {
    match color {
        Color::Green => "#2e9b45",
        Color::Blue => "#2f5fd0",
        Color::Red => "#d0342c",
    }
}

/// All frames in one SVG, laid out left to right and wrapped every eight.
pub fn render_svg(frames: &[Configuration]) -> String {
    let Some(first) = frames.first() else {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"0\" height=\"0\"/>\n".into();
    };
    let dims = first.dims();
    let fw = dims.cols() * CELL;
    let fh = dims.rows() * CELL + GAP;
    let count = frames.len() as u32;
    let across = count.min(PER_ROW);
    let down = count.div_ceil(PER_ROW);
    let width = across * (fw + GAP) + GAP;
    let height = down * (fh + GAP) + GAP;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"monospace\" font-size=\"11\">"
    );
    for (k, f) in frames.iter().enumerate() {
        let k = k as u32;
        let x0 = GAP + (k % PER_ROW) * (fw + GAP);
        let y0 = GAP + (k / PER_ROW) * (fh + GAP);
        let _ = writeln!(s, "<g transform=\"translate({x0},{y0})\">");
        let _ = writeln!(s, "<text x=\"0\" y=\"11\">round {k}</text>");
        for c in dims.coords() {
            let x = (c.j - 1) * CELL;
            let y = GAP + (c.i - 1) * CELL;
            let _ = writeln!(
                s,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"white\" stroke=\"#999\"/>"
            );
        }
        for r in f.robots().values() {
            let cx = (r.pos.j - 1) * CELL + CELL / 2;
            let cy = GAP + (r.pos.i - 1) * CELL + CELL / 2;
            let _ = writeln!(
                s,
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{}\" fill=\"{}\"/>",
                CELL / 2 - 3,
                fill(r.color)
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Writes frames as SVG when the path ends in `.svg`, as ASCII otherwise.
pub fn write_frames(path: &Path, frames: &[Configuration]) -> Result<(), IoError> {
    let svg = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("svg"));
    let text = if svg {
        render_svg(frames)
    } else {
        render_frames(frames)
    };
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.into(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run, RunOptions};

    fn dims(m: u32, n: u32) -> GridDims {
        GridDims::new(m, n).unwrap()
    }

    #[test]
    fn ascii_examples() {
        let d = dims(2, 2);
        let fin = Configuration::new(
            d,
            [
                (Coord::new(1, 1), Color::Red),
                (Coord::new(2, 2), Color::Red),
            ],
        )
        .unwrap();
        assert_eq!(render_ascii(&fin), "R.\n.R");
        let one = Configuration::green(d, [Coord::new(1, 2)]).unwrap();
        assert_eq!(render_ascii(&one), ".G\n..");
    }

    #[test]
    fn run_file_decodes() {
        let text = r#"{"rows":2,"cols":2,"robots":[{"r":1,"c":2},{"r":2,"c":1,"color":"green"}],
            "scheduler":{"type":"random","seed":7,"p":0.25},"maxRounds":10,"monitors":false}"#;
        let f = RunConfigFile::parse(text).unwrap();
        let c = f.configuration().unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.robot(RobotId(0)).unwrap().pos, Coord::new(1, 2));
        assert_eq!(
            f.scheduler().unwrap(),
            SchedulerSpec::RandomFair { p: 0.25, seed: 7 }
        );
        assert_eq!(f.max_rounds, Some(10));
        assert!(!f.monitors);
    }

    #[test]
    fn run_file_rejects_unknown_fields() {
        let top = r#"{"rows":2,"cols":2,"robots":[],"speed":3}"#;
        assert!(matches!(RunConfigFile::parse(top), Err(IoError::Json(_))));
        let sched = r#"{"rows":2,"cols":2,"robots":[],"scheduler":{"type":"fullsync","q":1}}"#;
        assert!(matches!(RunConfigFile::parse(sched), Err(IoError::Json(_))));
    }

    #[test]
    fn run_file_rejects_invalid_content() {
        let dup = r#"{"rows":2,"cols":2,"robots":[{"r":1,"c":1},{"r":1,"c":1}]}"#;
        assert!(matches!(
            RunConfigFile::parse(dup).unwrap().configuration(),
            Err(IoError::Config(ConfigError::DuplicatePosition(_)))
        ));
        let off = r#"{"rows":2,"cols":2,"robots":[{"r":3,"c":1}]}"#;
        assert!(RunConfigFile::parse(off).unwrap().configuration().is_err());
        let small = r#"{"rows":1,"cols":2,"robots":[]}"#;
        assert!(RunConfigFile::parse(small)
            .unwrap()
            .configuration()
            .is_err());
        let bad = r#"{"rows":2,"cols":2,"robots":[],"scheduler":{"type":"random","p":0}}"#;
        assert!(RunConfigFile::parse(bad).unwrap().scheduler().is_err());
        let unknown = r#"{"rows":2,"cols":2,"robots":[],"scheduler":{"type":"lazy"}}"#;
        assert!(RunConfigFile::parse(unknown).unwrap().scheduler().is_err());
    }

    #[test]
    fn run_file_round_trips() {
        let c = Configuration::green(dims(3, 3), [Coord::new(1, 2), Coord::new(3, 3)]).unwrap();
        let f = RunConfigFile::from_config(&c);
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(
            RunConfigFile::parse(&text)
                .unwrap()
                .configuration()
                .unwrap(),
            c
        );
    }

    #[test]
    fn trace_line_shape() {
        let c = Configuration::green(dims(2, 2), [Coord::new(1, 2), Coord::new(2, 1)]).unwrap();
        let r = run(&c, &SchedulerSpec::FullSync, &RunOptions::new(100));
        let text = trace_to_string(&r.trace);
        assert_eq!(text.lines().count(), r.trace.len());
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let keys: Vec<&str> = first
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        assert_eq!(keys, ["activated", "digest", "moves", "round"]);
        let m = &first["moves"][0];
        assert_eq!(m["guard"], "G-LEFT");
        assert_eq!(m["family"], "G1");
        assert_eq!(m["from"], serde_json::json!([1, 2]));
        assert_eq!(m["to"], serde_json::json!([1, 1]));
        assert_eq!(m["color"], "green");
        let digest = first["digest"].as_str().unwrap();
        assert_eq!(digest.len(), 16);
        assert!(digest
            .chars()
            .all(|ch| ch.is_ascii_hexdigit() && !ch.is_ascii_uppercase()));
    }

    #[test]
    fn trace_reads_back_and_replays() {
        let c = Configuration::green(
            dims(3, 3),
            [
                Coord::new(1, 2),
                Coord::new(2, 1),
                Coord::new(2, 3),
                Coord::new(3, 2),
                Coord::new(3, 3),
            ],
        )
        .unwrap();
        let r = run(
            &c,
            &SchedulerSpec::random_fair(0.5, 3).unwrap(),
            &RunOptions::new(1000),
        );
        assert!(r.outcome.is_completed());
        let lines = read_trace(trace_to_string(&r.trace).as_bytes()).unwrap();
        let expected: Vec<TraceLine> = r.trace.iter().map(TraceLine::from).collect();
        assert_eq!(lines, expected);
        let digests = replay_digests(&crate::MisRules, &c, &lines).unwrap();
        assert_eq!(digests, lines.iter().map(|l| l.digest).collect::<Vec<_>>());
        assert_eq!(final_reds(&lines), crate::reference_mis(c.dims()));
    }

    #[test]
    fn trace_reader_reports_line() {
        let err = read_trace("\n{\"round\":1}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IoError::TraceLine { line: 2, .. }));
    }

    #[test]
    fn frame_count_is_rounds_plus_one() {
        let c = crate::placement::target_preset(dims(2, 2));
        let r = run(&c, &SchedulerSpec::FullSync, &RunOptions::new(100));
        let fs = frames(&c, &r.trace);
        assert_eq!(fs.len(), r.trace.len() + 1);
        assert_eq!(fs.last().unwrap(), &r.final_config);
        let text = render_frames(&fs);
        assert_eq!(text.matches("round ").count(), fs.len());
        let svg = render_svg(&fs);
        assert_eq!(svg.matches("<g ").count(), fs.len());
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn node_lists() {
        let s = parse_nodes("1,1; 2,2;").unwrap();
        assert_eq!(
            s,
            [Coord::new(1, 1), Coord::new(2, 2)].into_iter().collect()
        );
        assert!(parse_nodes("").unwrap().is_empty());
        assert!(parse_nodes("1;2").is_err());
        assert!(parse_nodes("a,1").is_err());
    }
}
