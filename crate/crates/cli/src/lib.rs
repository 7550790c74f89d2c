//! Command-line front end: solve, generate, benchmark and verify.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use compactflow::baselines::{ahuja_orlin, edmonds_karp, goldberg_tarjan, min_cut_check};
use compactflow::generate::{Family, GeneratorSpec};
use compactflow::io::{parse_dimacs, parse_flow, write_dimacs, write_flow, write_stats, StatsRecord};
use compactflow::{max_flow, verify_flow, FlowNetwork, ResidualState, RunStats};
use rayon::prelude::*;

/// Environment variable naming the default benchmark corpus directory.
pub const CORPUS_ENV: &str = "COMPACTFLOW_CORPUS";

#[derive(Debug, Parser)]
#[command(name = "compactflow", version, about = "Maximum flow by compact-network excess scaling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a DIMACS instance and print its value and statistics.
    Solve(SolveArgs),
    /// Generate a random instance in DIMACS format.
    Gen(GenArgs),
    /// Run solvers over every instance in a directory.
    Bench(BenchArgs),
    /// Check a flow file against an instance.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverName {
    /// Compact-network excess scaling.
    Compact,
    /// Shortest augmenting paths.
    Ek,
    /// FIFO push-relabel with global relabeling.
    Gt,
    /// Excess scaling.
    Ao,
}

impl SolverName {
    pub fn name(self) -> &'static str {
        match self {
            SolverName::Compact => "compact",
            SolverName::Ek => "ek",
            SolverName::Gt => "gt",
            SolverName::Ao => "ao",
        }
    }

    pub fn solver(self) -> Solver {
        let run: SolveFn = match self {
            SolverName::Compact => |net| {
                max_flow(net)
                    .map(|(value, state, stats)| Solution { value, state, stats: Some(stats) })
                    .map_err(|v| v.to_string())
            },
            SolverName::Ek => |net| {
                let (value, state) = edmonds_karp(net);
                Ok(Solution { value, state, stats: None })
            },
            SolverName::Gt => |net| {
                let (value, state) = goldberg_tarjan(net);
                Ok(Solution { value, state, stats: None })
            },
            SolverName::Ao => |net| {
                let (value, state, _) = ahuja_orlin(net);
                Ok(Solution { value, state, stats: None })
            },
        };
        Solver { name: self.name().to_string(), run }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// DIMACS instance.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "compact")]
    pub solver: SolverName,
    /// Verify the flow and the minimum cut, and compare against augmenting paths.
    #[arg(long)]
    pub check: bool,
    /// Print per-phase counters to stderr.
    #[arg(long)]
    pub trace: bool,
    /// Write per-arc flows here in `f U V AMOUNT` form.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value = "random-sparse")]
    pub family: Family,
    /// Vertex count; for grids, the number of lattice vertices.
    #[arg(long)]
    pub n: usize,
    /// Arc count; family default when omitted.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1024)]
    pub max_cap: i64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of instances, seeds `seed..seed+count`. Needs `--output` to be a directory when above one.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Output file, or directory when `--count` is above one. Standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of DIMACS instances.
    #[arg(env = CORPUS_ENV)]
    pub corpus: PathBuf,
    /// Solvers to run; repeat or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["compact", "ek"])]
    pub solver: Vec<SolverName>,
    /// Also verify every flow and its minimum cut.
    #[arg(long)]
    pub check: bool,
    /// Write the records here as well as to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// DIMACS instance.
    pub instance: PathBuf,
    /// Flow file with one `f U V AMOUNT` line per arc.
    pub flow: PathBuf,
}

/// Failure carrying the process exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub const USAGE: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const VERIFY: u8 = 3;

    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        CliError { code: Self::USAGE, error: error.into() }
    }

    pub fn parse(error: impl Into<anyhow::Error>) -> Self {
        CliError { code: Self::PARSE, error: error.into() }
    }

    pub fn verify(error: impl Into<anyhow::Error>) -> Self {
        CliError { code: Self::VERIFY, error: error.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e)
    }
}

/// A solver's answer.
#[derive(Debug, Clone)]
pub struct Solution {
    pub value: i64,
    pub state: ResidualState,
    /// Phase counters; only the compact solver has them.
    pub stats: Option<RunStats>,
}

pub type SolveFn = fn(&FlowNetwork) -> Result<Solution, String>;

/// A named solver entry point. Tests substitute their own.
#[derive(Debug, Clone)]
pub struct Solver {
    pub name: String,
    pub run: SolveFn,
}

pub fn run(cli: Cli, out: &mut dyn Write, diag: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(&args, out, diag),
        Command::Gen(args) => cmd_gen(&args, out),
        Command::Bench(args) => {
            let solvers: Vec<Solver> = args.solver.iter().map(|s| s.solver()).collect();
            let paths = corpus_files(&args.corpus)?;
            let report = bench(&paths, &solvers, args.check)?;
            let text = report.render();
            out.write_all(text.as_bytes())?;
            if let Some(path) = &args.output {
                fs::write(path, &text)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(CliError::usage)?;
            }
            Ok(())
        }
        Command::Verify(args) => cmd_verify(&args, out),
    }
}

pub fn read_instance(path: &Path) -> Result<FlowNetwork, CliError> {
    let bytes = fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::usage)?;
    parse_dimacs(&bytes).map_err(|e| CliError::parse(anyhow!("{}: {e}", path.display())))
}

fn instance_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned())
}

fn micros(start: Instant) -> u64 {
    start.elapsed().as_micros().try_into().unwrap_or(u64::MAX)
}

fn record(instance: &str, solver: &str, sol: &Solution, wall_us: u64) -> StatsRecord {
    match &sol.stats {
        Some(stats) => StatsRecord::from_run(instance, solver, sol.value, stats, wall_us),
        None => StatsRecord::value_only(instance, solver, sol.value, wall_us),
    }
}

/// Flow feasibility and a matching minimum cut.
pub fn certify(net: &FlowNetwork, state: &ResidualState) -> Result<i64, CliError> {
    let value = verify_flow(net, state).map_err(CliError::verify)?;
    let cut = min_cut_check(net, state).map_err(CliError::verify)?;
    if cut.capacity != value {
        return Err(CliError::verify(anyhow!("cut {} differs from value {value}", cut.capacity)));
    }
    Ok(value)
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, diag: &mut dyn Write) -> Result<(), CliError> {
    let net = read_instance(&args.input)?;
    let solver = args.solver.solver();
    let start = Instant::now();
    let sol = (solver.run)(&net).map_err(|e| CliError::verify(anyhow!(e)))?;
    let wall = micros(start);
    if args.trace {
        if let Some(stats) = &sol.stats {
            writeln!(diag, "initial_delta={} reduced={} n={} m={}", stats.initial_delta, stats.reduced, stats.n, stats.m)?;
            for p in &stats.phases {
                writeln!(
                    diag,
                    "phase={} delta={} active={} compact={} pseudoarcs={} sat={} high={} low={} relabels={} repairs={}",
                    p.index, p.delta, p.active_vertices, p.compact_vertices, p.pseudoarcs,
                    p.saturating, p.nonsat_high, p.nonsat_low, p.relabels, p.repair_rounds
                )?;
            }
        }
    }
    if args.check {
        let value = certify(&net, &sol.state)?;
        if value != sol.value {
            return Err(CliError::verify(anyhow!("reported {} but flow carries {value}", sol.value)));
        }
        if args.solver == SolverName::Compact {
            let (oracle, _) = edmonds_karp(&net);
            if oracle != sol.value {
                return Err(CliError::verify(anyhow!("value {} but augmenting paths find {oracle}", sol.value)));
            }
        }
    }
    if let Some(path) = &args.output {
        fs::write(path, write_flow(&net, &sol.state.flow))
            .with_context(|| format!("writing {}", path.display()))
            .map_err(CliError::usage)?;
    }
    writeln!(out, "value {}", sol.value)?;
    let rec = record(&instance_name(&args.input), solver.name.as_str(), &sol, wall);
    writeln!(out, "{}", write_stats(&rec))?;
    Ok(())
}

fn gen_spec(args: &GenArgs, seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        family: args.family,
        n: args.n,
        m: args.m,
        max_capacity: args.max_cap,
        seed,
    }
}

fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.count == 0 {
        return Err(CliError::usage(anyhow!("--count must be at least 1")));
    }
    if args.count == 1 {
        let net = gen_spec(args, args.seed).generate().map_err(CliError::usage)?;
        let text = write_dimacs(&net);
        return match &args.output {
            Some(path) => fs::write(path, text)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(CliError::usage),
            None => Ok(out.write_all(text.as_bytes())?),
        };
    }
    let dir = args
        .output
        .as_ref()
        .ok_or_else(|| CliError::usage(anyhow!("--count above 1 needs --output DIR")))?;
    fs::create_dir_all(dir)?;
    for seed in args.seed..args.seed + args.count {
        let net = gen_spec(args, seed).generate().map_err(CliError::usage)?;
        let path = dir.join(format!("{}-n{}-s{seed}.max", args.family, args.n));
        fs::write(&path, write_dimacs(&net))?;
        writeln!(out, "{}", path.display())?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let net = read_instance(&args.instance)?;
    let bytes = fs::read(&args.flow)
        .with_context(|| format!("reading {}", args.flow.display()))
        .map_err(CliError::usage)?;
    let flow = parse_flow(&net, &bytes)
        .map_err(|e| CliError::parse(anyhow!("{}: {e}", args.flow.display())))?;
    let state = ResidualState::from_flows(&net, flow).map_err(CliError::verify)?;
    let value = certify(&net, &state)?;
    writeln!(out, "ok value {value}")?;
    Ok(())
}

/// Instance files in `dir`, sorted by name. Hidden files are skipped.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("reading corpus {}", dir.display()))
        .map_err(CliError::usage)?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let hidden = path.file_name().is_some_and(|f| f.to_string_lossy().starts_with('.'));
        if path.is_file() && !hidden {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Largest measured ratios against the per-phase and per-run bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasuredConstants {
    /// `nonsat_high / (|V_C| · n)` per phase.
    pub high_per_compact_n: f64,
    /// Low-capacity pushes out of one active vertex, over `n`.
    pub low_per_n: f64,
    /// `Σ|V_C| / m` per run.
    pub compaction_per_m: f64,
    pub phases_per_sqrt_m_max: f64,
    pub phases_per_sqrt_m_mean: f64,
    pub runs: usize,
}

impl MeasuredConstants {
    fn observe(&mut self, net: &FlowNetwork, stats: &RunStats) {
        let n = stats.n as f64;
        for p in &stats.phases {
            let touched = p.vertices_touched(stats.n).max(1) as f64;
            self.high_per_compact_n = self.high_per_compact_n.max(p.nonsat_high as f64 / (touched * n));
            self.low_per_n = self.low_per_n.max(p.max_low_per_active as f64 / n);
        }
        let m = net.m().max(1) as f64;
        self.compaction_per_m = self.compaction_per_m.max(stats.compact_vertices() as f64 / m);
        let ratio = stats.phase_count() as f64 / m.sqrt();
        self.phases_per_sqrt_m_max = self.phases_per_sqrt_m_max.max(ratio);
        self.phases_per_sqrt_m_mean =
            (self.phases_per_sqrt_m_mean * self.runs as f64 + ratio) / (self.runs + 1) as f64;
        self.runs += 1;
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub instances: usize,
    /// Instance order, then solver order.
    pub records: Vec<StatsRecord>,
    pub constants: MeasuredConstants,
}

impl BenchReport {
    pub fn render(&self) -> String {
        let mut text = String::new();
        for r in &self.records {
            text.push_str(&write_stats(r));
            text.push('\n');
        }
        let c = &self.constants;
        text.push_str(&format!(
            "# summary instances={} records={} high_per_compact_n={:.4} low_per_n={:.4} \
             compaction_per_m={:.3} phases_per_sqrt_m_mean={:.3} phases_per_sqrt_m_max={:.3}\n",
            self.instances,
            self.records.len(),
            c.high_per_compact_n,
            c.low_per_n,
            c.compaction_per_m,
            c.phases_per_sqrt_m_mean,
            c.phases_per_sqrt_m_max
        ));
        text
    }
}

/// Runs every solver on every instance on the rayon pool. Any solver error,
/// value disagreement or (with `check`) failed certificate aborts with the
/// instance path.
pub fn bench(paths: &[PathBuf], solvers: &[Solver], check: bool) -> Result<BenchReport, CliError> {
    type Row = (FlowNetwork, Vec<(StatsRecord, Option<RunStats>)>);
    let rows: Vec<Result<Row, CliError>> = paths
        .par_iter()
        .map(|path| {
            let net = read_instance(path)?;
            let name = instance_name(path);
            let mut row = Vec::with_capacity(solvers.len());
            let mut first: Option<(i64, &str)> = None;
            for solver in solvers {
                let start = Instant::now();
                let sol = (solver.run)(&net).map_err(|e| {
                    CliError::verify(anyhow!("{}: solver {} failed: {e}", path.display(), solver.name))
                })?;
                let wall = micros(start);
                if check {
                    certify(&net, &sol.state).map_err(|e| {
                        CliError::verify(anyhow!("{}: solver {}: {e}", path.display(), solver.name))
                    })?;
                }
                match first {
                    Some((value, who)) if value != sol.value => {
                        return Err(CliError::verify(anyhow!(
                            "{}: {who} found {value} but {} found {}",
                            path.display(),
                            solver.name,
                            sol.value
                        )));
                    }
                    Some(_) => {}
                    None => first = Some((sol.value, solver.name.as_str())),
                }
                row.push((record(&name, &solver.name, &sol, wall), sol.stats));
            }
            Ok((net, row))
        })
        .collect();
    let mut report = BenchReport {
        instances: paths.len(),
        ..BenchReport::default()
    };
    for row in rows {
        let (net, records) = row?;
        for (rec, stats) in records {
            if let Some(stats) = &stats {
                report.constants.observe(&net, stats);
            }
            report.records.push(rec);
        }
    }
    Ok(report)
}
