//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use compactflow::baselines::{decompose_flow, edmonds_karp, goldberg_tarjan, min_cut_check};
use compactflow::generate::{Family, GeneratorSpec};
use compactflow::io::{parse_dimacs, write_dimacs};
use compactflow::transform::{map_flow_back, to_bounded_degree};
use compactflow::{max_flow, verify_flow, FlowNetwork, InvariantViolation, ResidualState, RunStats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITE_SIZE: usize = 1200;
const TRANSFORM_SIZE: usize = 200;
const COMPACTION_FACTOR: usize = 20;

struct Instance {
    name: String,
    spec: GeneratorSpec,
    net: FlowNetwork,
}

struct Solved {
    value: i64,
    state: ResidualState,
    stats: RunStats,
}

struct Outcome {
    oracle: i64,
    push_relabel: i64,
    compact: Result<Solved, InvariantViolation>,
}

fn suite() -> Vec<Instance> {
    (0..SUITE_SIZE)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0000 + i as u64);
            let family = Family::ALL[i % 3];
            let n = rng.gen_range(5..=200);
            let m = match family {
                Family::RandomSparse => Some(rng.gen_range(n - 1..=3 * n)),
                _ => None,
            };
            let spec = GeneratorSpec {
                family,
                n,
                m,
                max_capacity: 1 << rng.gen_range(0..=10),
                seed: rng.gen(),
            };
            let net = spec.generate().expect("suite parameters are valid");
            Instance {
                name: format!("{family}-{i}"),
                spec,
                net,
            }
        })
        .collect()
}

/// Order-preserving parallel map over scoped threads.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = items.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

fn solve(inst: &Instance) -> Outcome {
    let (oracle, _) = edmonds_karp(&inst.net);
    let (push_relabel, _) = goldberg_tarjan(&inst.net);
    let compact = max_flow(&inst.net).map(|(value, state, stats)| Solved { value, state, stats });
    Outcome {
        oracle,
        push_relabel,
        compact,
    }
}

/// Runs failing with an invariant named in `rules` belong to this criterion.
fn engine_failures(insts: &[Instance], outs: &[Outcome], rules: &[&str]) -> Vec<String> {
    insts
        .iter()
        .zip(outs)
        .filter_map(|(inst, out)| match &out.compact {
            Err(v) if rules.contains(&v.rule) => Some(format!("{}: {v}", inst.name)),
            _ => None,
        })
        .collect()
}

fn solved<'a>(
    insts: &'a [Instance],
    outs: &'a [Outcome],
) -> impl Iterator<Item = (&'a Instance, &'a Solved)> {
    insts
        .iter()
        .zip(outs)
        .filter_map(|(i, o)| o.compact.as_ref().ok().map(|s| (i, s)))
}

fn verdict(failures: Vec<String>, summary: String) -> Result<String, String> {
    match failures.first() {
        None => Ok(summary),
        Some(first) => Err(format!("{} failures, first: {first}", failures.len())),
    }
}

fn oracle_equality(insts: &[Instance], outs: &[Outcome]) -> Result<String, String> {
    let mut failures = Vec::new();
    for (inst, out) in insts.iter().zip(outs) {
        assert!(inst.net.n() <= 202 && inst.net.m() <= 3 * inst.net.n());
        assert!(inst.net.max_capacity() <= 1024);
        match &out.compact {
            Err(v) => failures.push(format!("{}: {v}", inst.name)),
            Ok(s) if s.value != out.oracle || out.push_relabel != out.oracle => failures.push(format!(
                "{}: compact {} push-relabel {} augmenting {}",
                inst.name, s.value, out.push_relabel, out.oracle
            )),
            Ok(_) => {}
        }
    }
    verdict(failures, format!("{} instances agree with edmonds_karp", insts.len()))
}

fn certificates(insts: &[Instance], outs: &[Outcome]) -> Result<String, String> {
    let mut failures = Vec::new();
    let mut paths = 0;
    for (inst, s) in solved(insts, outs) {
        let net = &inst.net;
        let check = || -> Result<usize, String> {
            let value = verify_flow(net, &s.state).map_err(|e| e.to_string())?;
            let cut = min_cut_check(net, &s.state).map_err(|e| e.to_string())?;
            if value != s.value || cut.capacity != value {
                return Err(format!("value {value}, cut {}", cut.capacity));
            }
            let d = decompose_flow(net, &s.state).map_err(|e| e.to_string())?;
            if d.recompose(net.m()) != s.state.flow || d.value() != value || d.paths.len() > net.m() {
                return Err("decomposition does not recompose".into());
            }
            Ok(d.paths.len())
        };
        match check() {
            Ok(k) => paths += k,
            Err(e) => failures.push(format!("{}: {e}", inst.name)),
        }
    }
    verdict(
        failures,
        format!("flow, cut and decomposition verified ({paths} paths)"),
    )
}

fn transform_correctness() -> Result<String, String> {
    let mut insts = Vec::new();
    let mut seed = 0u64;
    while insts.len() < TRANSFORM_SIZE {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(0x7F00 + seed);
        let n = rng.gen_range(20..=200);
        let spec = GeneratorSpec {
            family: if seed.is_multiple_of(4) { Family::RandomSparse } else { Family::StarHeavy },
            n,
            m: Some(rng.gen_range(n..=3 * n)),
            max_capacity: 1 << rng.gen_range(0..=10),
            seed: rng.gen(),
        };
        let net = spec.generate().expect("valid parameters");
        let bound = net.degree_bound();
        if net.max_in_degree() > bound || net.max_out_degree() > bound {
            insts.push(net);
        }
    }
    let results = par_map(&insts, |net| -> Result<(), String> {
        let bound = net.degree_bound();
        let red = to_bounded_degree(net);
        let r = &red.reduced;
        if r.max_in_degree() > bound || r.max_out_degree() > bound {
            return Err(format!("reduced degree {} > {bound}", r.max_in_degree().max(r.max_out_degree())));
        }
        if r.n() > 4 * net.n() || r.m() > 4 * net.m() {
            return Err(format!("size {}x{} from {}x{}", r.n(), r.m(), net.n(), net.m()));
        }
        let (value, _) = edmonds_karp(net);
        let (reduced_value, state) = edmonds_karp(r);
        if value != reduced_value {
            return Err(format!("value {reduced_value} vs {value}"));
        }
        let back = map_flow_back(&red, &state).map_err(|e| e.to_string())?;
        match verify_flow(net, &back) {
            Ok(v) if v == value => Ok(()),
            Ok(v) => Err(format!("mapped flow has value {v}, expected {value}")),
            Err(e) => Err(e.to_string()),
        }
    });
    let failures: Vec<String> = results
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.err().map(|e| format!("transform instance {i}: {e}")))
        .collect();
    verdict(failures, format!("{TRANSFORM_SIZE} high-degree instances reduced"))
}

fn label_bounds(insts: &[Instance], outs: &[Outcome]) -> Result<String, String> {
    let mut failures = engine_failures(
        insts,
        outs,
        &["dh-bound", "dell-bound", "relabel-count", "relabel-progress", "label-validity"],
    );
    let mut worst: f64 = 0.0;
    for (inst, s) in solved(insts, outs) {
        let n = s.stats.n as u64;
        let relabels = s.stats.relabels();
        if relabels > 6 * n * n {
            failures.push(format!("{}: {relabels} relabels", inst.name));
        }
        worst = worst.max(relabels as f64 / (n * n) as f64);
    }
    verdict(failures, format!("worst relabels / n^2 = {worst:.3}"))
}

fn excess_dominator(insts: &[Instance], outs: &[Outcome]) -> Result<String, String> {
    let failures = engine_failures(
        insts,
        outs,
        &["excess-dominator", "active-drained", "pseudoarc-excess", "phase-start"],
    );
    let phases: usize = solved(insts, outs).map(|(_, s)| s.stats.phase_count()).sum();
    verdict(failures, format!("asserted after every push across {phases} phases"))
}

fn push_bounds(insts: &[Instance], outs: &[Outcome]) -> Result<String, String> {
    let mut failures = engine_failures(
        insts,
        outs,
        &["high-capacity-bound", "low-capacity-bound", "saturating-bound", "push-positive"],
    );
    let (mut high, mut low, mut sat) = (0.0f64, 0.0f64, 0.0f64);
    for (inst, s) in solved(insts, outs) {
        let n = s.stats.n as u64;
        let m = s.stats.m as u64;
        for p in &s.stats.phases {
            let touched = p.vertices_touched(s.stats.n) as u64;
            if p.nonsat_high > 16 * touched * n {
                failures.push(format!("{}: phase {} high {}", inst.name, p.index, p.nonsat_high));
            }
            if p.max_low_per_active > 6 * n - 1 {
                failures.push(format!("{}: phase {} low {}", inst.name, p.index, p.max_low_per_active));
            }
            high = high.max(p.nonsat_high as f64 / (touched * n).max(1) as f64);
            low = low.max(p.max_low_per_active as f64 / n as f64);
        }
        if s.stats.saturating() > 6 * m * n {
            failures.push(format!("{}: {} saturating", inst.name, s.stats.saturating()));
        }
        sat = sat.max(s.stats.saturating() as f64 / (m * n).max(1) as f64);
    }
    verdict(
        failures,
        format!("worst high/(|V_C| n) = {high:.3}, low/n = {low:.3}, saturating/(mn) = {sat:.4}"),
    )
}

fn compaction_size(insts: &[Instance], outs: &[Outcome]) -> Result<String, String> {
    let mut failures = engine_failures(insts, outs, &["favorable-persistence"]);
    let mut worst: f64 = 0.0;
    for (inst, s) in solved(insts, outs) {
        let total = s.stats.compact_vertices();
        let m = inst.net.m().max(1);
        if total > COMPACTION_FACTOR * m {
            failures.push(format!("{}: sum |V_C| = {total}, m = {m}", inst.name));
        }
        worst = worst.max(total as f64 / m as f64);
    }
    verdict(failures, format!("worst sum |V_C| / m = {worst:.2}"))
}

fn phase_count(insts: &[Instance], outs: &[Outcome]) -> Result<String, String> {
    let mut failures = engine_failures(insts, outs, &["phase-count", "dominator-halving"]);
    let (mut worst, mut mean, mut runs) = (0.0f64, 0.0f64, 0usize);
    for (inst, s) in solved(insts, outs) {
        if s.stats.phase_count() > s.stats.phase_bound() {
            failures.push(format!(
                "{}: {} phases, bound {}",
                inst.name,
                s.stats.phase_count(),
                s.stats.phase_bound()
            ));
        }
        let ratio = s.stats.phase_count() as f64 / (inst.net.m().max(1) as f64).sqrt();
        worst = worst.max(ratio);
        mean += ratio;
        runs += 1;
    }
    mean /= runs.max(1) as f64;
    verdict(
        failures,
        format!("phases / sqrt(m): mean {mean:.3}, max {worst:.3}"),
    )
}

fn dynamic_trees() -> Result<String, String> {
    let seeds: Vec<u64> = (0..100).collect();
    let reports = par_map(&seeds, |&seed| {
        let nodes = 2 + (seed as usize * 53 + 11) % 255;
        support::differential_sequence(0xD7_0000 + seed, nodes, 10_000)
    });
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for r in reports {
        match r {
            Err(e) => failures.push(e),
            Ok(r) if r.rotation_ratio() > support::ROTATION_C => {
                failures.push(format!("{} rotations in {} operations", r.rotations, r.operations))
            }
            Ok(r) => worst = worst.max(r.rotation_ratio()),
        }
    }
    verdict(
        failures,
        format!(
            "100 sequences of 10^4 operations match; worst rotations/(k log2 n) = {worst:.3}, C = {}",
            support::ROTATION_C
        ),
    )
}

fn io_round_trip(insts: &[Instance]) -> Result<String, String> {
    let mut failures = Vec::new();
    for inst in insts {
        let text = write_dimacs(&inst.net);
        match parse_dimacs(text.as_bytes()) {
            Ok(back) if back == inst.net && write_dimacs(&back) == text => {}
            Ok(_) => failures.push(format!("{}: round trip changed the file", inst.name)),
            Err(e) => failures.push(format!("{}: {e}", inst.name)),
        }
        let again = inst.spec.generate().map(|n| write_dimacs(&n));
        if again.as_ref() != Ok(&text) {
            failures.push(format!("{}: regeneration differs", inst.name));
        }
        let reseeded = GeneratorSpec {
            seed: inst.spec.seed ^ 1,
            ..inst.spec
        };
        // Unit-capacity grids have no random choices, so only capacity-rich
        // instances must depend on the seed.
        if inst.net.m() >= 20 && inst.spec.max_capacity >= 16 && reseeded.generate().map(|n| write_dimacs(&n)) == Ok(text) {
            failures.push(format!("{}: seed has no effect", inst.name));
        }
    }
    verdict(
        failures,
        format!("{} files byte-identical after round trip; generation deterministic", insts.len()),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let insts = suite();
    let outs = par_map(&insts, solve);
    type Check<'a> = Box<dyn Fn() -> Result<String, String> + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("oracle equality", Box::new(|| oracle_equality(&insts, &outs))),
        ("certificates", Box::new(|| certificates(&insts, &outs))),
        ("transform correctness", Box::new(transform_correctness)),
        ("label bounds", Box::new(|| label_bounds(&insts, &outs))),
        ("excess dominator", Box::new(|| excess_dominator(&insts, &outs))),
        ("push-count bounds", Box::new(|| push_bounds(&insts, &outs))),
        ("compaction size", Box::new(|| compaction_size(&insts, &outs))),
        ("phase count", Box::new(|| phase_count(&insts, &outs))),
        ("dynamic trees", Box::new(dynamic_trees)),
        ("dimacs and generator", Box::new(|| io_round_trip(&insts))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match result {
            Ok(summary) => println!("criterion {:>2} {name}: PASS ({summary})", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({reason})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
