//! Per-phase compact networks.
//!
//! A compact network keeps the active vertices, every vertex pair whose
//! compaction capacity lies in `[Δ/4, 2Δ]`, and pseudoarcs standing in for
//! residual paths through the rest of the graph. Pseudoarcs are built by
//! capacity transfer on a [`DynForest`]; every forest operation is appended
//! to an [`OperationLog`], and replaying that log at the end of the phase
//! turns pseudoarc flow back into flow on residual edges.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dyntree::DynForest;
use crate::error::{FlowError, InvariantViolation};
use crate::residual::ResidualGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PseudoKind {
    Abundant,
    Small,
}

/// A compact arc standing for one or more residual paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pseudoarc {
    pub tail: usize,
    pub head: usize,
    pub capacity: i64,
    pub kind: PseudoKind,
    /// Indices of the log's transfer entries merged into this arc.
    pub transfers: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogEntry {
    /// `child` was linked below `parent` through residual edge `edge`.
    Link { child: usize, parent: usize, edge: usize },
    /// The tree arc above `node` was cut.
    Cut { node: usize },
    /// `amount` moved from the path above `start` (rooted at `root`) onto
    /// `pseudoarc`.
    Transfer {
        start: usize,
        root: usize,
        pseudoarc: usize,
        amount: i64,
    },
}

/// Append-only record of forest operations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OperationLog {
    entries: Vec<LogEntry>,
}

impl OperationLog {
    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn push(&mut self, entry: LogEntry) -> usize {
        self.entries.push(entry);
        self.entries.len() - 1
    }
}

/// Builds pseudoarcs by capacity transfer over the residual edges a phase
/// leaves outside the compact network.
///
/// The working capacity of an edge is `avail`; while an edge is a tree arc
/// its capacity lives in the forest instead and is written back on cut.
#[derive(Debug)]
pub struct PseudoarcBuilder<'g> {
    g: &'g ResidualGraph,
    compact: Vec<bool>,
    excluded_vertex: Vec<bool>,
    excluded_edge: Vec<bool>,
    avail: Vec<i64>,
    forest: DynForest,
    parent_edge: Vec<usize>,
    children: Vec<Vec<usize>>,
    cursor: Vec<usize>,
    dead: Vec<bool>,
    log: OperationLog,
    pseudoarcs: Vec<Pseudoarc>,
    by_ends: HashMap<(usize, usize), usize>,
}

const NONE: usize = usize::MAX;

impl<'g> PseudoarcBuilder<'g> {
    /// `compact` marks path endpoints; `excluded_vertex` vertices (the active
    /// ones) and `excluded_edge` edges never appear on a path.
    pub fn new(
        g: &'g ResidualGraph,
        compact: Vec<bool>,
        excluded_vertex: Vec<bool>,
        excluded_edge: Vec<bool>,
    ) -> Self {
        let n = g.n();
        let avail = (0..g.edge_count()).map(|e| g.res(e)).collect();
        PseudoarcBuilder {
            g,
            compact,
            excluded_vertex,
            excluded_edge,
            avail,
            forest: DynForest::new(n),
            parent_edge: vec![NONE; n],
            children: vec![Vec::new(); n],
            cursor: vec![0; n],
            dead: vec![false; n],
            log: OperationLog::default(),
            pseudoarcs: Vec::new(),
            by_ends: HashMap::new(),
        }
    }

    /// Working capacity of an edge not currently in the forest.
    pub fn available(&self, e: usize) -> i64 {
        self.avail[e]
    }

    pub fn log(&self) -> &OperationLog {
        &self.log
    }

    pub fn pseudoarcs(&self) -> &[Pseudoarc] {
        &self.pseudoarcs
    }

    pub fn forest_operations(&self) -> u64 {
        self.forest.operations()
    }

    pub fn forest_rotations(&self) -> u64 {
        self.forest.rotations()
    }

    /// Vertices from `u` up to its tree root.
    pub fn path(&mut self, u: usize) -> Vec<usize> {
        let mut out = vec![u];
        let mut v = u;
        while let Some((p, _)) = self.forest.parent(v).expect("vertex in range") {
            out.push(p);
            v = p;
        }
        out
    }

    fn start_round(&mut self) {
        self.cursor.iter_mut().for_each(|c| *c = 0);
        self.dead.iter_mut().for_each(|d| *d = false);
    }

    fn next_edge(&mut self, v: usize, rho: i64) -> Option<usize> {
        let adj = self.g.adj(v);
        let mut i = self.cursor[v];
        while i < adj.len() {
            let e = adj[i];
            let w = self.g.head(e);
            let usable = !self.excluded_edge[e]
                && !self.excluded_vertex[w]
                && !self.dead[w]
                && self.avail[e] > rho;
            if !usable {
                if i == self.cursor[v] {
                    self.cursor[v] += 1;
                }
                i += 1;
                continue;
            }
            if self.forest.root(w).expect("vertex in range") == v {
                i += 1;
                continue;
            }
            return Some(e);
        }
        None
    }

    fn cut_logged(&mut self, x: usize) {
        let val = self.forest.cut(x).expect("cut target has a parent");
        self.avail[self.parent_edge[x]] = val;
        self.parent_edge[x] = NONE;
        self.log.push(LogEntry::Cut { node: x });
    }

    /// Grows the tree of `u` along edges of working capacity above `rho`
    /// until its root is a compact vertex other than `u`. Returns that root,
    /// or `None` when `u` itself has no usable out-edge left.
    pub fn feasible_path(&mut self, u: usize, rho: i64) -> Option<usize> {
        loop {
            let r = self.forest.root(u).expect("vertex in range");
            if r != u && self.compact[r] {
                return Some(r);
            }
            match self.next_edge(r, rho) {
                Some(e) => {
                    let w = self.g.head(e);
                    self.forest
                        .link(r, w, self.avail[e])
                        .expect("root linked into another tree");
                    self.avail[e] = 0;
                    self.parent_edge[r] = e;
                    self.children[w].push(r);
                    self.log.push(LogEntry::Link {
                        child: r,
                        parent: w,
                        edge: e,
                    });
                }
                None if r == u => return None,
                None => {
                    // a non-compact dead end: release everything hanging on it
                    self.dead[r] = true;
                    for c in std::mem::take(&mut self.children[r]) {
                        if matches!(self.forest.parent(c), Ok(Some((p, _))) if p == r) {
                            self.cut_logged(c);
                        }
                    }
                }
            }
        }
    }

    /// Moves the bottleneck of the path above `u` onto the pseudoarc
    /// `(u, root(u))`. Returns the pseudoarc index, or `None` when `u` is a
    /// root or the bottleneck is zero.
    pub fn transfer_capacity(&mut self, u: usize) -> Option<usize> {
        let (_, delta) = self.forest.find_min(u).ok()?;
        if delta == 0 {
            return None;
        }
        let root = self.forest.root(u).expect("vertex in range");
        self.forest
            .add_val(u, -delta)
            .expect("bottleneck keeps values non-negative");
        let p = *self.by_ends.entry((u, root)).or_insert_with(|| {
            self.pseudoarcs.push(Pseudoarc {
                tail: u,
                head: root,
                capacity: 0,
                kind: PseudoKind::Small,
                transfers: Vec::new(),
            });
            self.pseudoarcs.len() - 1
        });
        let entry = self.log.push(LogEntry::Transfer {
            start: u,
            root,
            pseudoarc: p,
            amount: delta,
        });
        self.pseudoarcs[p].capacity += delta;
        self.pseudoarcs[p].transfers.push(entry);
        Some(p)
    }

    /// Cuts every zero-valued arc on the path above `u`, nearest the root
    /// first.
    pub fn cut_all_saturated(&mut self, u: usize) {
        while let Ok((x, val)) = self.forest.find_min(u) {
            if val > 0 {
                break;
            }
            self.cut_logged(x);
        }
    }

    /// Runs path search, transfer and cut from each start in order until none
    /// of them has a usable path left.
    pub fn create_all_pseudoarcs(&mut self, starts: &[usize], rho: i64) {
        self.start_round();
        for &u in starts {
            while self.feasible_path(u, rho).is_some() {
                if self.transfer_capacity(u).is_none() {
                    self.cut_all_saturated(u);
                    continue;
                }
                self.cut_all_saturated(u);
            }
        }
    }

    /// Classifies merged pseudoarcs against `delta` and returns the log.
    pub fn finish(mut self, delta: i64) -> (Vec<Pseudoarc>, OperationLog, u64, u64) {
        for p in &mut self.pseudoarcs {
            p.kind = if p.capacity > delta {
                PseudoKind::Abundant
            } else {
                PseudoKind::Small
            };
        }
        let ops = self.forest.operations();
        let rot = self.forest.rotations();
        (self.pseudoarcs, self.log, ops, rot)
    }
}

/// One phase's compact network over a merged residual graph.
#[derive(Debug, Clone)]
pub struct CompactNetwork {
    pub delta: i64,
    /// Vertices with `Δ/2 < e(u) ≤ Δ` at phase start.
    pub active: Vec<bool>,
    /// `V_C`: active vertices, endpoints of kept pairs, source and sink.
    pub compact: Vec<bool>,
    /// Residual edges kept as they are, both directions of every kept pair.
    pub original_edges: Vec<usize>,
    /// Pairs kept because their compaction capacity is in `[Δ/4, 2Δ]`.
    pub classified_pairs: Vec<usize>,
    /// Subset of `classified_pairs` with `Δ/4 < γ ≤ Δ/2`.
    pub favorable_pairs: Vec<usize>,
    pub pseudoarcs: Vec<Pseudoarc>,
    pub log: OperationLog,
    pub dyntree_ops: u64,
    pub dyntree_rotations: u64,
}

impl CompactNetwork {
    pub fn vertex_count(&self) -> usize {
        self.compact.iter().filter(|&&c| c).count()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Text listing of the vertex sets and arcs, stable across runs.
    pub fn dump(&self, g: &ResidualGraph) -> String {
        let mut out = String::new();
        let list = |pred: &dyn Fn(usize) -> bool| -> String {
            (0..self.compact.len())
                .filter(|&v| pred(v))
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "delta {}", self.delta);
        let _ = writeln!(out, "V_A {}", list(&|v| self.active[v]));
        let _ = writeln!(out, "V_SC {}", list(&|v| self.compact[v] && !self.active[v]));
        for &e in &self.original_edges {
            let _ = writeln!(out, "A1 {} {} r={}", g.tail(e), g.head(e), g.res(e));
        }
        for p in &self.pseudoarcs {
            let _ = writeln!(
                out,
                "A2 {} {} cap={} {:?}",
                p.tail, p.head, p.capacity, p.kind
            );
        }
        out
    }
}

/// Whether `Δ/4 ≤ γ ≤ 2Δ`.
fn pair_is_kept(gamma: i64, delta: i64) -> bool {
    let (g, d) = (gamma as i128, delta as i128);
    4 * g >= d && g <= 2 * d
}

fn pair_is_favorable(gamma: i64, delta: i64) -> bool {
    let (g, d) = (gamma as i128, delta as i128);
    4 * g > d && 2 * g <= d
}

/// Builds the compact network of a phase.
///
/// `g` must be a merged residual graph. Pseudoarc starts are tried in
/// increasing `priority` order, ties by id.
pub fn build_compact(
    g: &ResidualGraph,
    excess: &[i64],
    delta: i64,
    source: usize,
    sink: usize,
    priority: &[usize],
) -> Result<CompactNetwork, FlowError> {
    if delta <= 0 {
        return Err(FlowError::NonPositiveDelta(delta));
    }
    let n = g.n();
    let active: Vec<bool> = (0..n)
        .map(|v| v != source && v != sink && 2 * (excess[v] as i128) > delta as i128)
        .collect();
    let mut compact = active.clone();
    compact[source] = true;
    compact[sink] = true;

    let pairs = g.edge_count() / 2;
    let mut kept_edge = vec![false; g.edge_count()];
    let mut original_edges = Vec::new();
    let mut classified_pairs = Vec::new();
    let mut favorable_pairs = Vec::new();
    for p in 0..pairs {
        let e = 2 * p;
        let (u, v) = (g.tail(e), g.head(e));
        let gamma = g.gamma(e);
        let classified = pair_is_kept(gamma, delta);
        if classified {
            classified_pairs.push(p);
            if pair_is_favorable(gamma, delta) {
                favorable_pairs.push(p);
            }
        }
        if classified || ((active[u] || active[v]) && gamma > 0) {
            kept_edge[e] = true;
            kept_edge[e + 1] = true;
            original_edges.extend([e, e + 1]);
            compact[u] = true;
            compact[v] = true;
        }
    }

    let mut starts: Vec<usize> = (0..n)
        .filter(|&v| compact[v] && !active[v] && v != source && v != sink)
        .collect();
    starts.sort_by_key(|&v| (priority[v], v));

    let mut builder = PseudoarcBuilder::new(g, compact.clone(), active.clone(), kept_edge);
    builder.create_all_pseudoarcs(&starts, delta);
    builder.create_all_pseudoarcs(&starts, 0);
    let (pseudoarcs, log, dyntree_ops, dyntree_rotations) = builder.finish(delta);

    Ok(CompactNetwork {
        delta,
        active,
        compact,
        original_edges,
        classified_pairs,
        favorable_pairs,
        pseudoarcs,
        log,
        dyntree_ops,
        dyntree_rotations,
    })
}

/// Forest cost of one replay.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RestoreStats {
    pub operations: u64,
    pub rotations: u64,
}

/// Replays `log` on a fresh forest, routing `pushed[p]` units of each
/// pseudoarc's flow along the residual paths it was built from, and applies
/// the result to `g`. Excesses are untouched: pseudoarc pushes already moved
/// excess between the endpoints.
pub fn restore_all_flows(
    g: &mut ResidualGraph,
    pseudoarcs: &[Pseudoarc],
    log: &OperationLog,
    pushed: &[i64],
) -> Result<RestoreStats, InvariantViolation> {
    if pushed.len() != pseudoarcs.len() {
        return Err(InvariantViolation::new(
            "replay-consistency",
            format!("{} flows for {} pseudoarcs", pushed.len(), pseudoarcs.len()),
        ));
    }
    // split each pseudoarc's flow over its transfers in order
    let mut routed = vec![0i64; log.len()];
    for (p, arc) in pseudoarcs.iter().enumerate() {
        if pushed[p] < 0 || pushed[p] > arc.capacity {
            return Err(InvariantViolation::new(
                "pseudoarc-capacity",
                format!("pseudoarc {p} carries {} of {}", pushed[p], arc.capacity),
            ));
        }
        let mut left = pushed[p];
        for &k in &arc.transfers {
            let LogEntry::Transfer { amount, .. } = log.entries[k] else {
                return Err(InvariantViolation::new(
                    "replay-consistency",
                    format!("entry {k} is not a transfer"),
                ));
            };
            let x = left.min(amount);
            routed[k] = x;
            left -= x;
        }
    }

    let n = g.n();
    let mut forest = DynForest::new(n);
    let mut parent_edge = vec![NONE; n];
    let diverged = |what: String| InvariantViolation::new("replay-consistency", what);
    let commit = |g: &mut ResidualGraph, e: usize, flow: i64| -> Result<(), InvariantViolation> {
        if flow > 0 {
            if flow > g.res(e) {
                return Err(InvariantViolation::new(
                    "capacity-transfer",
                    format!("edge {e} asked for {flow}, residual {}", g.res(e)),
                ));
            }
            g.push(e, flow);
        }
        Ok(())
    };
    for (k, entry) in log.entries.iter().enumerate() {
        match *entry {
            LogEntry::Link {
                child,
                parent,
                edge,
            } => {
                forest
                    .link(child, parent, 0)
                    .map_err(|err| diverged(format!("link {child}->{parent}: {err}")))?;
                parent_edge[child] = edge;
            }
            LogEntry::Cut { node } => {
                let flow = forest
                    .cut(node)
                    .map_err(|err| diverged(format!("cut {node}: {err}")))?;
                commit(g, parent_edge[node], flow)?;
                parent_edge[node] = NONE;
            }
            LogEntry::Transfer { start, root, .. } => {
                let found = forest
                    .root(start)
                    .map_err(|err| diverged(format!("root {start}: {err}")))?;
                if found != root {
                    return Err(diverged(format!(
                        "transfer from {start} expected root {root}, replay has {found}"
                    )));
                }
                if routed[k] > 0 {
                    forest
                        .add_val(start, routed[k])
                        .map_err(|err| diverged(format!("add at {start}: {err}")))?;
                }
            }
        }
    }
    for (v, &edge) in parent_edge.iter().enumerate() {
        if edge != NONE {
            let flow = forest.cut(v).map_err(|err| diverged(format!("cut {v}: {err}")))?;
            commit(g, edge, flow)?;
        }
    }
    Ok(RestoreStats {
        operations: forest.operations(),
        rotations: forest.rotations(),
    })
}
