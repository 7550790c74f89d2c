//! DIMACS max-flow files and one-line solver statistics.
//!
//! ```text
//! c a comment
//! p max 4 5
//! n 1 s
//! n 4 t
//! a 1 2 3
//! ```
//!
//! Vertex ids are 1-based on disk and 0-based in memory.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::RunStats;
use crate::error::FlowError;
use crate::network::{FlowNetwork, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number; for problems noticed at end of input, the line
    /// count plus one.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("unknown line type {0:?}")]
    UnknownLine(String),
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("invalid number {0:?}")]
    BadNumber(String),
    #[error("problem line must read `p max N M`")]
    BadProblem,
    #[error("missing problem line")]
    MissingProblem,
    #[error("second problem line")]
    DuplicateProblem,
    #[error("line before the problem line")]
    BeforeProblem,
    #[error("designator must be `s` or `t`, found {0:?}")]
    BadDesignator(String),
    #[error("source designated twice")]
    DuplicateSource,
    #[error("sink designated twice")]
    DuplicateSink,
    #[error("no source designator")]
    MissingSource,
    #[error("no sink designator")]
    MissingSink,
    #[error("vertex {vertex} outside 1..={n}")]
    VertexRange { vertex: u64, n: usize },
    #[error("negative capacity {0}")]
    NegativeCapacity(i64),
    #[error("problem line declares {declared} arcs, file has {found}")]
    ArcCount { declared: usize, found: usize },
    #[error(transparent)]
    Network(#[from] FlowError),
}

fn number<T: std::str::FromStr>(tok: &str) -> Result<T, ParseErrorKind> {
    tok.parse()
        .map_err(|_| ParseErrorKind::BadNumber(tok.to_string()))
}

fn fields(toks: &[&str], expected: usize) -> Result<(), ParseErrorKind> {
    if toks.len() == expected {
        Ok(())
    } else {
        Err(ParseErrorKind::FieldCount {
            expected,
            found: toks.len(),
        })
    }
}

/// Parses a DIMACS max-flow instance.
///
/// ```
/// let net = compactflow::io::parse_dimacs(b"p max 2 1\nn 1 s\nn 2 t\na 1 2 5\n")?;
/// assert_eq!((net.n(), net.m(), net.arc(0).capacity), (2, 1, 5));
/// # Ok::<(), compactflow::io::ParseError>(())
/// ```
pub fn parse_dimacs(input: &[u8]) -> Result<FlowNetwork, ParseError> {
    let text = std::str::from_utf8(input).map_err(|e| ParseError {
        line: input[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
        kind: ParseErrorKind::NotUtf8,
    })?;
    let mut problem: Option<(usize, usize)> = None;
    let mut source: Option<usize> = None;
    let mut sink: Option<usize> = None;
    let mut arcs: Vec<(usize, usize, i64)> = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let at = |kind| ParseError { line, kind };
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let Some(&tag) = toks.first() else { continue };
        let vertex = |tok: &str, n: usize| -> Result<usize, ParseErrorKind> {
            let v: u64 = number(tok)?;
            if v == 0 || v > n as u64 {
                return Err(ParseErrorKind::VertexRange { vertex: v, n });
            }
            Ok(v as usize - 1)
        };
        match tag {
            "c" => {}
            "p" => {
                if problem.is_some() {
                    return Err(at(ParseErrorKind::DuplicateProblem));
                }
                fields(&toks, 4).map_err(at)?;
                if toks[1] != "max" {
                    return Err(at(ParseErrorKind::BadProblem));
                }
                let n = number(toks[2]).map_err(at)?;
                let m = number(toks[3]).map_err(at)?;
                problem = Some((n, m));
            }
            "n" => {
                let (n, _) = problem.ok_or(at(ParseErrorKind::BeforeProblem))?;
                fields(&toks, 3).map_err(at)?;
                let v = vertex(toks[1], n).map_err(at)?;
                match toks[2] {
                    "s" if source.is_some() => return Err(at(ParseErrorKind::DuplicateSource)),
                    "s" => source = Some(v),
                    "t" if sink.is_some() => return Err(at(ParseErrorKind::DuplicateSink)),
                    "t" => sink = Some(v),
                    other => return Err(at(ParseErrorKind::BadDesignator(other.to_string()))),
                }
            }
            "a" => {
                let (n, _) = problem.ok_or(at(ParseErrorKind::BeforeProblem))?;
                fields(&toks, 4).map_err(at)?;
                let u = vertex(toks[1], n).map_err(at)?;
                let v = vertex(toks[2], n).map_err(at)?;
                let cap: i64 = number(toks[3]).map_err(at)?;
                if cap < 0 {
                    return Err(at(ParseErrorKind::NegativeCapacity(cap)));
                }
                if u == v {
                    return Err(at(ParseErrorKind::Network(FlowError::SelfLoop(u))));
                }
                arcs.push((u, v, cap));
            }
            other => return Err(at(ParseErrorKind::UnknownLine(other.to_string()))),
        }
    }
    let end = |kind| ParseError {
        line: last + 1,
        kind,
    };
    let (n, m) = problem.ok_or(end(ParseErrorKind::MissingProblem))?;
    let s = source.ok_or(end(ParseErrorKind::MissingSource))?;
    let t = sink.ok_or(end(ParseErrorKind::MissingSink))?;
    if arcs.len() != m {
        return Err(end(ParseErrorKind::ArcCount {
            declared: m,
            found: arcs.len(),
        }));
    }
    FlowNetwork::from_arcs(n, s, t, &arcs).map_err(|e| end(e.into()))
}

/// Writes `net` in the form [`parse_dimacs`] reads, arcs in order.
pub fn write_dimacs(net: &FlowNetwork) -> String {
    let mut out = String::with_capacity(16 * (net.m() + 3));
    let _ = writeln!(out, "p max {} {}", net.n(), net.m());
    let _ = writeln!(out, "n {} s", net.source().0 + 1);
    let _ = writeln!(out, "n {} t", net.sink().0 + 1);
    for a in net.arcs() {
        let _ = writeln!(out, "a {} {} {}", a.tail.0 + 1, a.head.0 + 1, a.capacity);
    }
    out
}

/// Per-arc flows in the `f U V AMOUNT` format, one line per arc in order.
pub fn write_flow(net: &FlowNetwork, flow: &[i64]) -> String {
    let mut out = String::new();
    for (a, f) in net.arcs().iter().zip(flow) {
        let _ = writeln!(out, "f {} {} {}", a.tail.0 + 1, a.head.0 + 1, f);
    }
    out
}

/// Reads a flow file written by [`write_flow`]. Each line must name the
/// endpoints of the arc at the same position.
pub fn parse_flow(net: &FlowNetwork, input: &[u8]) -> Result<Vec<i64>, ParseError> {
    let text = std::str::from_utf8(input).map_err(|_| ParseError {
        line: 1,
        kind: ParseErrorKind::NotUtf8,
    })?;
    let mut flow = Vec::with_capacity(net.m());
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let at = |kind| ParseError { line, kind };
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.first() {
            None | Some(&"c") => continue,
            Some(&"f") => {}
            Some(other) => return Err(at(ParseErrorKind::UnknownLine(other.to_string()))),
        }
        fields(&toks, 4).map_err(at)?;
        let u: u64 = number(toks[1]).map_err(at)?;
        let v: u64 = number(toks[2]).map_err(at)?;
        let amount: i64 = number(toks[3]).map_err(at)?;
        let Some(arc) = net.arcs().get(flow.len()) else {
            return Err(at(ParseErrorKind::ArcCount {
                declared: net.m(),
                found: flow.len() + 1,
            }));
        };
        if (u, v) != (arc.tail.0 as u64 + 1, arc.head.0 as u64 + 1) {
            return Err(at(ParseErrorKind::VertexRange {
                vertex: u,
                n: net.n(),
            }));
        }
        flow.push(amount);
    }
    if flow.len() != net.m() {
        return Err(ParseError {
            line: last + 1,
            kind: ParseErrorKind::ArcCount {
                declared: net.m(),
                found: flow.len(),
            },
        });
    }
    Ok(flow)
}

/// Keys of a stats line, in output order.
pub const STATS_KEYS: [&str; 11] = [
    "instance",
    "solver",
    "flow_value",
    "phases",
    "sat_pushes",
    "nonsat_high",
    "nonsat_low",
    "relabels",
    "compact_vertices",
    "dyntree_ops",
    "wall_us",
];

/// One solver run on one instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatsRecord {
    pub instance: String,
    pub solver: String,
    pub flow_value: i64,
    pub phases: u64,
    pub sat_pushes: u64,
    pub nonsat_high: u64,
    pub nonsat_low: u64,
    pub relabels: u64,
    pub compact_vertices: u64,
    pub dyntree_ops: u64,
    pub wall_us: u64,
}

impl StatsRecord {
    /// A record with only the value filled in, for solvers without counters.
    pub fn value_only(instance: &str, solver: &str, flow_value: i64, wall_us: u64) -> Self {
        StatsRecord {
            instance: instance.to_string(),
            solver: solver.to_string(),
            flow_value,
            wall_us,
            ..StatsRecord::default()
        }
    }

    pub fn from_run(instance: &str, solver: &str, flow_value: i64, run: &RunStats, wall_us: u64) -> Self {
        StatsRecord {
            instance: instance.to_string(),
            solver: solver.to_string(),
            flow_value,
            phases: run.phase_count() as u64,
            sat_pushes: run.saturating(),
            nonsat_high: run.nonsat_high(),
            nonsat_low: run.nonsat_low(),
            relabels: run.relabels(),
            compact_vertices: run.compact_vertices() as u64,
            dyntree_ops: run.dyntree_ops(),
            wall_us,
        }
    }
}

fn token(s: &str) -> String {
    if s.is_empty() {
        return "-".to_string();
    }
    s.chars()
        .map(|c| if c.is_whitespace() || c == '=' { '_' } else { c })
        .collect()
}

/// Formats a record as `key=value` pairs separated by single spaces, keys in
/// [`STATS_KEYS`] order. Whitespace and `=` inside names become `_`.
///
/// ```
/// use compactflow::io::{write_stats, StatsRecord};
///
/// let line = write_stats(&StatsRecord::value_only("diamond", "ek", 6, 0));
/// assert!(line.contains(" flow_value=6 "));
/// ```
pub fn write_stats(r: &StatsRecord) -> String {
    let values = [
        token(&r.instance),
        token(&r.solver),
        r.flow_value.to_string(),
        r.phases.to_string(),
        r.sat_pushes.to_string(),
        r.nonsat_high.to_string(),
        r.nonsat_low.to_string(),
        r.relabels.to_string(),
        r.compact_vertices.to_string(),
        r.dyntree_ops.to_string(),
        r.wall_us.to_string(),
    ];
    STATS_KEYS
        .iter()
        .zip(values)
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Splits a stats line back into `(key, value)` pairs.
pub fn parse_stats(line: &str) -> Vec<(&str, &str)> {
    line.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect()
}

/// Vertex id as written on disk.
pub fn disk_id(v: VertexId) -> usize {
    v.0 + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{Family, GeneratorSpec};

    const TWO: &str = "p max 2 1\nn 1 s\nn 2 t\na 1 2 5\n";

    fn err(text: &str) -> ParseError {
        parse_dimacs(text.as_bytes()).unwrap_err()
    }

    #[test]
    fn parses_two_vertex_example() {
        let net = parse_dimacs(TWO.as_bytes()).unwrap();
        assert_eq!(net, FlowNetwork::from_arcs(2, 0, 1, &[(0, 1, 5)]).unwrap());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "c hello\n\np max 2 1\nc mid\nn 1 s\nn 2 t\na 1 2 5\n";
        assert_eq!(parse_dimacs(text.as_bytes()).unwrap().m(), 1);
    }

    #[test]
    fn arc_count_mismatch() {
        let e = err("p max 2 2\nn 1 s\nn 2 t\na 1 2 5\n");
        assert_eq!(e.kind, ParseErrorKind::ArcCount { declared: 2, found: 1 });
        assert_eq!(e.line, 5);
    }

    #[test]
    fn negative_capacity() {
        let e = err("p max 2 1\nn 1 s\nn 2 t\na 1 2 -1\n");
        assert_eq!((e.line, e.kind), (4, ParseErrorKind::NegativeCapacity(-1)));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(err("n 1 s\n").kind, ParseErrorKind::BeforeProblem);
        assert_eq!(err("c only\n").kind, ParseErrorKind::MissingProblem);
        assert_eq!(
            err("p max 2 0\nn 1 s\nn 2 s\n").kind,
            ParseErrorKind::DuplicateSource
        );
        assert_eq!(
            err("p max 2 0\nn 1 t\nn 2 t\n").kind,
            ParseErrorKind::DuplicateSink
        );
        assert_eq!(err("p max 2 0\nn 1 s\n").kind, ParseErrorKind::MissingSink);
        assert_eq!(
            err("p max 2 0\np max 2 0\n").kind,
            ParseErrorKind::DuplicateProblem
        );
        assert_eq!(
            err("p min 2 0\n").kind,
            ParseErrorKind::BadProblem
        );
        assert_eq!(
            err("p max 2 1\nn 1 s\nn 2 t\na 1 3 5\n").kind,
            ParseErrorKind::VertexRange { vertex: 3, n: 2 }
        );
        assert_eq!(
            err("p max 2 0\nn 1 s\nn 1 t\n").kind,
            ParseErrorKind::Network(FlowError::SourceIsSink(0))
        );
        assert_eq!(err("x 1\n").kind, ParseErrorKind::UnknownLine("x".into()));
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let e = err("p max 2 1\nn 1 s\nn 2 t\na 1 2 5 9\n");
        assert_eq!(e.line, 4);
        assert_eq!(e.kind, ParseErrorKind::FieldCount { expected: 4, found: 5 });
        assert!(matches!(
            err("p max 2 1\nn 1 s\nn 2 t\na 1 2 5x\n").kind,
            ParseErrorKind::BadNumber(_)
        ));
    }

    #[test]
    fn round_trip_keeps_parallel_arcs() {
        let net = FlowNetwork::from_arcs(3, 0, 2, &[(0, 1, 4), (0, 1, 4), (1, 2, 1), (1, 0, 2)])
            .unwrap();
        let text = write_dimacs(&net);
        assert_eq!(parse_dimacs(text.as_bytes()).unwrap(), net);
        assert_eq!(write_dimacs(&parse_dimacs(TWO.as_bytes()).unwrap()), TWO);
    }

    #[test]
    fn round_trip_on_generated_instance() {
        let net = GeneratorSpec {
            family: Family::RandomSparse,
            n: 400,
            m: Some(1000),
            max_capacity: 1024,
            seed: 11,
        }
        .generate()
        .unwrap();
        let back = parse_dimacs(write_dimacs(&net).as_bytes()).unwrap();
        assert_eq!(back.arcs(), net.arcs());
    }

    #[test]
    fn flow_file_round_trip() {
        let net = parse_dimacs(TWO.as_bytes()).unwrap();
        let text = write_flow(&net, &[5]);
        assert_eq!(text, "f 1 2 5\n");
        assert_eq!(parse_flow(&net, text.as_bytes()).unwrap(), vec![5]);
        assert!(parse_flow(&net, b"f 2 1 5\n").is_err());
        assert!(parse_flow(&net, b"").is_err());
    }

    #[test]
    fn stats_lines() {
        let mut r = StatsRecord::value_only("diamond", "compact", 6, 0);
        let line = write_stats(&r);
        assert_eq!(
            line,
            "instance=diamond solver=compact flow_value=6 phases=0 sat_pushes=0 nonsat_high=0 \
             nonsat_low=0 relabels=0 compact_vertices=0 dyntree_ops=0 wall_us=0"
        );
        assert_eq!(write_stats(&r), line);
        r.instance = "a b=c".into();
        let written = write_stats(&r);
        let keys: Vec<&str> = parse_stats(&written).iter().map(|p| p.0).collect();
        assert_eq!(keys, STATS_KEYS);
        assert!(write_stats(&r).starts_with("instance=a_b_c "));
    }
}
