//! The excess-scaling driver.
//!
//! Each phase builds a [`CompactNetwork`](crate::compact::CompactNetwork),
//! discharges it with dual labels `d = d_h + d_ell`, replays pseudoarc flow
//! onto the residual graph, and halves the excess dominator `Δ`. Bounds the
//! method is known to satisfy are checked as it runs; a failed check stops
//! the solve with an [`InvariantViolation`] naming the bound.

use std::collections::{BTreeSet, VecDeque};

use crate::baselines::reverse_bfs;
use crate::compact::{build_compact, restore_all_flows, CompactNetwork};
use crate::error::InvariantViolation;
use crate::network::{verify_flow, FlowNetwork, ResidualState};
use crate::residual::ResidualGraph;
use crate::transform::{map_flow_back, to_bounded_degree};

/// Distance labels. `d_h` is kept valid across residual compact arcs; `d_ell`
/// only ever grows within a phase and throttles low-capacity pushes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualLabels {
    pub d_h: Vec<usize>,
    pub d_ell: Vec<usize>,
}

impl DualLabels {
    #[inline]
    pub fn d(&self, u: usize) -> usize {
        self.d_h[u] + self.d_ell[u]
    }
}

/// Labels from residual distances: `d_h(u) = min(dist(u, s) + n, dist(u, t))`,
/// `2n - 1` when neither terminal is reachable, `d_h(s) = n`, `d_h(t) = 0`,
/// and `d_ell = 0`. `arcs` lists the residual arcs of the graph in question.
///
/// ```
/// use compactflow::engine::global_relabel;
///
/// // s=0 -> a=1 -> t=2
/// let labels = global_relabel(3, 0, 2, [(0, 1), (1, 2)]);
/// assert_eq!(labels.d_h, vec![3, 1, 0]);
/// ```
pub fn global_relabel(
    n: usize,
    source: usize,
    sink: usize,
    arcs: impl IntoIterator<Item = (usize, usize)>,
) -> DualLabels {
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v) in arcs {
        rev[v].push(u);
    }
    let bfs = |from: usize| {
        let mut dist = vec![usize::MAX; n];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &u in &rev[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    };
    let to_t = bfs(sink);
    let to_s = bfs(source);
    let d_h = (0..n)
        .map(|v| {
            if v == source {
                n
            } else {
                let via_s = to_s[v].saturating_add(n);
                to_t[v].min(via_s).min(2 * n - 1)
            }
        })
        .collect();
    DualLabels {
        d_h,
        d_ell: vec![0; n],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushKind {
    Saturating,
    /// Nonsaturating with `δ > Δ/2`.
    HighCapacity,
    /// Nonsaturating with `δ ≤ Δ/2`.
    LowCapacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PushOutcome {
    pub amount: i64,
    pub kind: PushKind,
}

/// `δ = min(e(u), r(u,v), Δ - e(v))` and its class. `room` is `Δ - e(v)`,
/// or `None` when `v` is a terminal.
///
/// ```
/// use compactflow::engine::{push_amount, PushKind};
///
/// let out = push_amount(6, 10, Some(8), 8);
/// assert_eq!((out.amount, out.kind), (6, PushKind::HighCapacity));
/// assert_eq!(push_amount(6, 4, Some(8), 8).kind, PushKind::Saturating);
/// assert_eq!(push_amount(6, 10, Some(1), 8).kind, PushKind::LowCapacity);
/// ```
pub fn push_amount(excess: i64, residual: i64, room: Option<i64>, delta: i64) -> PushOutcome {
    let amount = excess.min(residual).min(room.unwrap_or(i64::MAX));
    let kind = if amount == residual {
        PushKind::Saturating
    } else if 2 * (amount as i128) > delta as i128 {
        PushKind::HighCapacity
    } else {
        PushKind::LowCapacity
    };
    PushOutcome { amount, kind }
}

/// Counters for one scaling phase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseStats {
    pub index: usize,
    pub delta: i64,
    pub saturating: u64,
    pub nonsat_high: u64,
    pub nonsat_low: u64,
    pub relabels: u64,
    pub compact_vertices: usize,
    pub active_vertices: usize,
    pub pseudoarcs: usize,
    pub dyntree_ops: u64,
    pub dyntree_rotations: u64,
    /// Largest number of low-capacity pushes out of one active vertex.
    pub max_low_per_active: u64,
    /// `Σ e(u)` over internal vertices at phase start; `Φ` is this over `Δ`.
    pub excess_total: i64,
    pub phi_g_start: u64,
    pub phi_g_peak: u64,
    /// Vertices that ran out of labels in the compact round.
    pub stuck: usize,
    /// Rounds run on the full residual network to finish the phase.
    pub repair_rounds: usize,
}

impl PhaseStats {
    /// Vertices the phase worked on, counting a repair round as all of them.
    pub fn vertices_touched(&self, n: usize) -> usize {
        self.compact_vertices + self.repair_rounds * n
    }
}

/// Counters for a whole solve.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Size of the network actually solved (after any degree reduction).
    pub n: usize,
    pub m: usize,
    pub initial_delta: i64,
    pub reduced: bool,
    pub phases: Vec<PhaseStats>,
}

impl RunStats {
    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }

    pub fn saturating(&self) -> u64 {
        self.phases.iter().map(|p| p.saturating).sum()
    }

    pub fn nonsat_high(&self) -> u64 {
        self.phases.iter().map(|p| p.nonsat_high).sum()
    }

    pub fn nonsat_low(&self) -> u64 {
        self.phases.iter().map(|p| p.nonsat_low).sum()
    }

    pub fn relabels(&self) -> u64 {
        self.phases.iter().map(|p| p.relabels).sum()
    }

    pub fn compact_vertices(&self) -> usize {
        self.phases.iter().map(|p| p.vertices_touched(self.n)).sum()
    }

    pub fn dyntree_ops(&self) -> u64 {
        self.phases.iter().map(|p| p.dyntree_ops).sum()
    }

    pub fn repair_rounds(&self) -> usize {
        self.phases.iter().map(|p| p.repair_rounds).sum()
    }

    /// `⌈log₂ Δ₀⌉ + 1`, the most phases halving allows.
    pub fn phase_bound(&self) -> usize {
        ceil_log2(self.initial_delta) + 1
    }
}

fn ceil_log2(x: i64) -> usize {
    if x <= 1 {
        0
    } else {
        (64 - ((x - 1) as u64).leading_zeros()) as usize
    }
}

/// Least power of two `≥ x`, for `x ≥ 1`.
fn pow2_ceil(x: i64) -> i64 {
    (x as u64).next_power_of_two() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CArc {
    Edge(usize),
    Pseudo(usize),
}

/// The arcs one discharge round may use.
struct Round {
    active: Vec<bool>,
    adj: Vec<Vec<CArc>>,
    member: Vec<bool>,
    size: usize,
    pseudo_head: Vec<usize>,
    pseudo_rem: Vec<i64>,
    pseudo_pushed: Vec<i64>,
}

impl Round {
    /// Members are the compact vertices in `live`.
    fn from_compact(g: &ResidualGraph, cn: &CompactNetwork, live: &[bool]) -> Self {
        let n = g.n();
        let mut adj = vec![Vec::new(); n];
        for &e in &cn.original_edges {
            adj[g.tail(e)].push(CArc::Edge(e));
        }
        for (p, arc) in cn.pseudoarcs.iter().enumerate() {
            adj[arc.tail].push(CArc::Pseudo(p));
        }
        Round {
            active: cn.active.clone(),
            adj,
            member: cn.compact.iter().zip(live).map(|(&c, &l)| c && l).collect(),
            size: cn.vertex_count(),
            pseudo_head: cn.pseudoarcs.iter().map(|p| p.head).collect(),
            pseudo_rem: cn.pseudoarcs.iter().map(|p| p.capacity).collect(),
            pseudo_pushed: vec![0; cn.pseudoarcs.len()],
        }
    }

    fn full(g: &ResidualGraph, active: Vec<bool>) -> Self {
        let n = g.n();
        Round {
            active,
            adj: (0..n)
                .map(|v| g.adj(v).iter().map(|&e| CArc::Edge(e)).collect())
                .collect(),
            member: vec![true; n],
            size: n,
            pseudo_head: Vec::new(),
            pseudo_rem: Vec::new(),
            pseudo_pushed: Vec::new(),
        }
    }

    #[inline]
    fn head(&self, g: &ResidualGraph, a: CArc) -> usize {
        match a {
            CArc::Edge(e) => g.head(e),
            CArc::Pseudo(p) => self.pseudo_head[p],
        }
    }

    #[inline]
    fn res(&self, g: &ResidualGraph, a: CArc) -> i64 {
        match a {
            CArc::Edge(e) => g.res(e),
            CArc::Pseudo(p) => self.pseudo_rem[p],
        }
    }

    fn residual_arcs<'r>(
        &'r self,
        g: &'r ResidualGraph,
    ) -> impl Iterator<Item = (usize, usize)> + 'r {
        self.adj
            .iter()
            .enumerate()
            .filter(move |&(u, _)| self.member[u])
            .flat_map(move |(u, arcs)| {
                arcs.iter()
                    .filter(move |&&a| self.res(g, a) > 0 && self.member[self.head(g, a)])
                    .map(move |&a| (u, self.head(g, a)))
            })
    }
}

enum Step {
    /// Nothing left to do at this vertex for now.
    Drained,
    /// Return to the driver; `Some(v)` has just become dischargeable.
    Yield(Option<usize>),
    /// Labels exhausted within this round.
    Stuck,
}

/// Solver state between phases.
pub struct ScalingState<'a> {
    net: &'a FlowNetwork,
    g: ResidualGraph,
    excess: Vec<i64>,
    labels: DualLabels,
    delta: i64,
    n: usize,
    s: usize,
    t: usize,
    favorable_streak: Vec<u32>,
    stats: RunStats,
    // per-round scratch
    spent_at: Vec<usize>,
    low_pushes: Vec<u64>,
    queued: Vec<bool>,
    phi_g: u64,
}

fn violation(rule: &'static str, detail: impl Into<String>) -> InvariantViolation {
    InvariantViolation::new(rule, detail)
}

impl<'a> ScalingState<'a> {
    /// Saturates every arc leaving the source and sets `d_h(s) = n`.
    pub fn initialize(net: &'a FlowNetwork) -> Self {
        let n = net.n();
        let (s, t) = (net.source().0, net.sink().0);
        let mut g = ResidualGraph::merged(net, &ResidualState::zero(net));
        let mut excess = vec![0i64; n];
        for i in 0..g.adj(s).len() {
            let e = g.adj(s)[i];
            let r = g.res(e);
            if r > 0 {
                let v = g.head(e);
                g.push(e, r);
                excess[s] -= r;
                excess[v] += r;
            }
        }
        let mut d_h = vec![0; n];
        d_h[s] = n;
        let top = (0..n)
            .filter(|&v| v != s && v != t)
            .map(|v| excess[v])
            .max()
            .unwrap_or(0);
        let initial_delta = pow2_ceil(top.max(1));
        let pairs = g.edge_count() / 2;
        ScalingState {
            net,
            g,
            excess,
            labels: DualLabels {
                d_h,
                d_ell: vec![0; n],
            },
            delta: if top > 0 { initial_delta } else { 0 },
            n,
            s,
            t,
            favorable_streak: vec![0; pairs],
            stats: RunStats {
                n,
                m: net.m(),
                initial_delta,
                reduced: false,
                phases: Vec::new(),
            },
            spent_at: vec![usize::MAX; n],
            low_pushes: vec![0; n],
            queued: vec![false; n],
            phi_g: 0,
        }
    }

    /// Current excess dominator; 0 once every internal excess is 0.
    pub fn delta(&self) -> i64 {
        self.delta
    }

    pub fn excess(&self) -> &[i64] {
        &self.excess
    }

    pub fn labels(&self) -> &DualLabels {
        &self.labels
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn residual(&self) -> &ResidualGraph {
        &self.g
    }

    #[inline]
    fn internal(&self, v: usize) -> bool {
        v != self.s && v != self.t
    }

    #[inline]
    fn dischargeable(&self, round: &Round, v: usize) -> bool {
        self.internal(v)
            && round.member[v]
            && if round.active[v] {
                self.excess[v] > 0
            } else {
                2 * (self.excess[v] as i128) > self.delta as i128
            }
    }

    fn admissible(&self, round: &Round, u: usize, a: CArc) -> bool {
        if round.res(&self.g, a) <= 0 {
            return false;
        }
        let v = round.head(&self.g, a);
        if !round.member[v] || self.labels.d(u) <= self.labels.d(v) {
            return false;
        }
        // the reverse edge a push opens must keep d_h valid
        match a {
            CArc::Edge(_) => self.labels.d_h[v] <= self.labels.d_h[u] + 1,
            CArc::Pseudo(_) => true,
        }
    }

    fn edge_list(&self, round: &Round, u: usize) -> Result<Vec<CArc>, InvariantViolation> {
        let mut list: Vec<CArc> = round.adj[u]
            .iter()
            .copied()
            .filter(|&a| self.admissible(round, u, a))
            .collect();
        let key = |a: &CArc| {
            let v = round.head(&self.g, *a);
            (self.labels.d_h[v], v)
        };
        list.sort_by_key(key);
        if !list.windows(2).all(|w| key(&w[0]) <= key(&w[1])) {
            return Err(violation("edge-list-order", format!("vertex {u}")));
        }
        Ok(list)
    }

    fn phi_weight(&self, v: usize) -> u64 {
        if self.internal(v) && self.excess[v] > 0 {
            self.labels.d(v) as u64
        } else {
            0
        }
    }

    /// Raises `d(u)`: `d_h` to one above the lowest residual neighbour, and
    /// `d_ell` to that neighbour's when `d` would otherwise not clear it.
    /// Returns false when `u` has no residual arc or `d_h` would reach `2n`.
    fn relabel(
        &mut self,
        round: &Round,
        u: usize,
        stats: &mut PhaseStats,
    ) -> Result<bool, InvariantViolation> {
        let best = round.adj[u]
            .iter()
            .filter(|&&a| round.res(&self.g, a) > 0 && round.member[round.head(&self.g, a)])
            .map(|&a| {
                let v = round.head(&self.g, a);
                (self.labels.d_h[v], self.labels.d(v), v)
            })
            .min();
        let Some((dh_v, d_v, v)) = best else {
            return Ok(false);
        };
        let new_dh = self.labels.d_h[u].max(dh_v + 1);
        if new_dh >= 2 * self.n {
            return Ok(false);
        }
        let before = self.labels.d(u);
        self.labels.d_h[u] = new_dh;
        if self.labels.d(u) <= d_v {
            self.labels.d_ell[u] = self.labels.d_ell[v];
        }
        let after = self.labels.d(u);
        if after <= before {
            return Err(violation(
                "relabel-progress",
                format!("d({u}) stayed at {before}"),
            ));
        }
        if self.labels.d_ell[u] > 4 * self.n - 1 {
            return Err(violation(
                "dell-bound",
                format!("d_ell({u}) = {}", self.labels.d_ell[u]),
            ));
        }
        self.phi_g += (after - before) as u64;
        stats.phi_g_peak = stats.phi_g_peak.max(self.phi_g);
        stats.relabels += 1;
        let total = self.stats.relabels() + stats.relabels;
        if total > 6 * (self.n as u64).pow(2) {
            return Err(violation("relabel-count", format!("{total} relabels")));
        }
        Ok(true)
    }

    fn apply_push(&mut self, round: &mut Round, u: usize, a: CArc, amount: i64) -> usize {
        match a {
            CArc::Edge(e) => self.g.push(e, amount),
            CArc::Pseudo(p) => {
                round.pseudo_rem[p] -= amount;
                round.pseudo_pushed[p] += amount;
            }
        }
        let v = round.head(&self.g, a);
        self.excess[u] -= amount;
        self.excess[v] += amount;
        v
    }

    fn discharge(
        &mut self,
        round: &mut Round,
        u: usize,
        stats: &mut PhaseStats,
    ) -> Result<Step, InvariantViolation> {
        let n = self.n;
        let delta = self.delta;
        let list = self.edge_list(round, u)?;
        let mut pos = 0;
        loop {
            if !self.dischargeable(round, u) {
                return Ok(Step::Drained);
            }
            while pos < list.len() && !self.admissible(round, u, list[pos]) {
                pos += 1;
            }
            if pos == list.len() {
                return Ok(if self.relabel(round, u, stats)? {
                    Step::Yield(None)
                } else {
                    Step::Stuck
                });
            }
            let a = list[pos];
            let v = round.head(&self.g, a);
            let room = self.internal(v).then(|| delta - self.excess[v]);
            let out = push_amount(self.excess[u], round.res(&self.g, a), room, delta);
            if out.amount <= 0 {
                return Err(violation(
                    "push-positive",
                    format!("push {u}->{v} would move {}", out.amount),
                ));
            }
            let throttled = round.active[u]
                && 2 * (self.excess[u] as i128) <= delta as i128
                && self.labels.d_ell[u] < 4 * n - 1;
            let nonsat = out.kind != PushKind::Saturating;
            if throttled && nonsat && self.spent_at[u] == self.labels.d_ell[u] {
                self.labels.d_ell[u] += 1;
                self.phi_g += 1;
                stats.phi_g_peak = stats.phi_g_peak.max(self.phi_g);
                return Ok(Step::Yield(None));
            }

            let phi_before = self.phi_weight(u) + self.phi_weight(v);
            self.apply_push(round, u, a, out.amount);
            let phi_after = self.phi_weight(u) + self.phi_weight(v);
            self.phi_g = self.phi_g + phi_after - phi_before;
            stats.phi_g_peak = stats.phi_g_peak.max(self.phi_g);

            if self.internal(v) && self.excess[v] > delta {
                return Err(violation(
                    "excess-dominator",
                    format!("e({v}) = {} > Δ = {delta}", self.excess[v]),
                ));
            }
            match out.kind {
                PushKind::Saturating => stats.saturating += 1,
                PushKind::HighCapacity => stats.nonsat_high += 1,
                PushKind::LowCapacity => {
                    stats.nonsat_low += 1;
                    if round.active[u] {
                        self.low_pushes[u] += 1;
                    }
                }
            }
            if nonsat {
                let emptied = self.excess[u] == 0;
                if phi_after > phi_before || (emptied && phi_after >= phi_before) {
                    return Err(violation(
                        "potential-decrease",
                        format!("push {u}->{v} moved Φ_g from {phi_before} to {phi_after}"),
                    ));
                }
                if throttled {
                    self.spent_at[u] = self.labels.d_ell[u];
                }
            }
            if !self.queued[v] && self.dischargeable(round, v) {
                return Ok(Step::Yield(Some(v)));
            }
        }
    }

    fn check_validity(&self, round: &Round) -> Result<(), InvariantViolation> {
        for (u, v) in round.residual_arcs(&self.g) {
            if u == self.s {
                continue;
            }
            if self.labels.d_h[u] > self.labels.d_h[v] + 1 {
                return Err(violation(
                    "label-validity",
                    format!(
                        "d_h({u}) = {} > d_h({v}) + 1 = {}",
                        self.labels.d_h[u],
                        self.labels.d_h[v] + 1
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Discharges until no member vertex is dischargeable. Returns the
    /// vertices that ran out of labels.
    fn run_round(
        &mut self,
        round: &mut Round,
        stats: &mut PhaseStats,
    ) -> Result<Vec<usize>, InvariantViolation> {
        let n = self.n;
        let mut fresh = global_relabel(n, self.s, self.t, round.residual_arcs(&self.g));
        for v in 0..n {
            if !round.member[v] {
                fresh.d_h[v] = self.labels.d_h[v];
            }
        }
        self.labels = fresh;
        self.check_validity(round)?;
        self.spent_at.iter_mut().for_each(|x| *x = usize::MAX);
        self.low_pushes.iter_mut().for_each(|x| *x = 0);
        self.queued.iter_mut().for_each(|x| *x = false);
        self.phi_g = (0..n).map(|v| self.phi_weight(v)).sum();
        stats.phi_g_start = stats.phi_g_start.max(self.phi_g);
        stats.phi_g_peak = stats.phi_g_peak.max(self.phi_g);
        let high_before = stats.nonsat_high;

        let mut queue: BTreeSet<(usize, usize)> = BTreeSet::new();
        for v in 0..n {
            if self.dischargeable(round, v) {
                queue.insert((self.labels.d(v), v));
                self.queued[v] = true;
            }
        }
        let mut stuck = Vec::new();
        while let Some((_, u)) = queue.pop_first() {
            self.queued[u] = false;
            let step = self.discharge(round, u, stats)?;
            if self.labels.d_h[u] >= 2 * n {
                return Err(violation("dh-bound", format!("d_h({u}) = {}", self.labels.d_h[u])));
            }
            match step {
                Step::Stuck => {
                    round.member[u] = false;
                    stuck.push(u);
                }
                Step::Drained | Step::Yield(_) => {
                    if let Step::Yield(Some(v)) = step {
                        queue.insert((self.labels.d(v), v));
                        self.queued[v] = true;
                    }
                    if self.dischargeable(round, u) {
                        queue.insert((self.labels.d(u), u));
                        self.queued[u] = true;
                    }
                }
            }
        }
        self.check_validity(round)?;

        let high = stats.nonsat_high - high_before;
        let bound = 16 * round.size as u64 * n as u64;
        if high > bound {
            return Err(violation(
                "high-capacity-bound",
                format!("{high} high-capacity pushes, bound {bound}"),
            ));
        }
        let low_bound = (6 * n - 1) as u64;
        for v in 0..n {
            if round.active[v] {
                stats.max_low_per_active = stats.max_low_per_active.max(self.low_pushes[v]);
                if self.low_pushes[v] > low_bound {
                    return Err(violation(
                        "low-capacity-bound",
                        format!("{} low-capacity pushes from {v}", self.low_pushes[v]),
                    ));
                }
            }
        }
        Ok(stuck)
    }

    fn full_relabel(&mut self) {
        let arcs: Vec<(usize, usize)> = (0..self.g.edge_count())
            .filter(|&e| self.g.res(e) > 0)
            .map(|e| (self.g.tail(e), self.g.head(e)))
            .collect();
        self.labels = global_relabel(self.n, self.s, self.t, arcs);
    }

    fn contract_holds(&self, started_active: &[bool]) -> bool {
        (0..self.n).filter(|&v| self.internal(v)).all(|v| {
            (!started_active[v] || self.excess[v] == 0)
                && 2 * (self.excess[v] as i128) <= self.delta as i128
        })
    }

    /// Runs one scaling phase and moves to the next `Δ`.
    pub fn run_phase(&mut self) -> Result<PhaseStats, InvariantViolation> {
        let delta = self.delta;
        if delta <= 0 {
            return Err(violation("phase-start", "no phase left to run"));
        }
        let n = self.n;
        let mut stats = PhaseStats {
            index: self.stats.phases.len(),
            delta,
            excess_total: (0..n).filter(|&v| self.internal(v)).map(|v| self.excess[v]).sum(),
            ..PhaseStats::default()
        };
        if let Some(v) = (0..n).find(|&v| self.internal(v) && self.excess[v] > delta) {
            return Err(violation(
                "excess-dominator",
                format!("e({v}) = {} exceeds Δ = {delta} at phase start", self.excess[v]),
            ));
        }

        let cn = build_compact(&self.g, &self.excess, delta, self.s, self.t, &self.labels.d_h)
            .map_err(|err| violation("phase-start", err.to_string()))?;
        self.check_compact(&cn)?;
        stats.compact_vertices = cn.vertex_count();
        stats.active_vertices = cn.active_count();
        stats.pseudoarcs = cn.pseudoarcs.len();
        stats.dyntree_ops += cn.dyntree_ops;
        stats.dyntree_rotations += cn.dyntree_rotations;

        let res_start: Vec<i64> = (0..self.g.edge_count()).map(|e| self.g.res(e)).collect();
        let excess_start = self.excess.clone();

        // Compact rounds only push into vertices that can reach the sink
        // in the full residual network, so flow never heads back to the
        // source there; returning flow is left to the full-network round.
        let live: Vec<bool> = reverse_bfs(&self.g, self.t).iter().map(Option::is_some).collect();
        let mut round = Round::from_compact(&self.g, &cn, &live);
        let stuck = self.run_round(&mut round, &mut stats)?;
        stats.stuck = stuck.len();
        let restored = restore_all_flows(&mut self.g, &cn.pseudoarcs, &cn.log, &round.pseudo_pushed)?;
        stats.dyntree_ops += restored.operations;
        stats.dyntree_rotations += restored.rotations;
        self.check_bookkeeping(&res_start, &excess_start)?;

        if !self.contract_holds(&cn.active) {
            stats.repair_rounds += 1;
            let mut round = Round::full(&self.g, cn.active.clone());
            let stuck = self.run_round(&mut round, &mut stats)?;
            if let Some(&v) = stuck.first() {
                return Err(violation(
                    "dh-bound",
                    format!("vertex {v} ran out of labels on the full residual network"),
                ));
            }
            if !self.contract_holds(&cn.active) {
                return Err(violation(
                    "active-drained",
                    "excess left at a phase-start active vertex",
                ));
            }
        }
        self.full_relabel();

        let top = (0..n)
            .filter(|&v| self.internal(v))
            .map(|v| self.excess[v])
            .max()
            .unwrap_or(0);
        self.delta = if top == 0 {
            0
        } else {
            (delta / 2).min(pow2_ceil(top))
        };
        if 2 * self.delta > delta {
            return Err(violation(
                "dominator-halving",
                format!("Δ went from {delta} to {}", self.delta),
            ));
        }
        self.stats.phases.push(stats.clone());
        let sat = self.stats.saturating();
        let sat_bound = 6 * self.stats.m as u64 * n as u64;
        if sat > sat_bound {
            return Err(violation(
                "saturating-bound",
                format!("{sat} saturating pushes, bound {sat_bound}"),
            ));
        }
        if self.stats.phase_count() > self.stats.phase_bound() {
            return Err(violation(
                "phase-count",
                format!(
                    "{} phases, bound {}",
                    self.stats.phase_count(),
                    self.stats.phase_bound()
                ),
            ));
        }
        Ok(stats)
    }

    fn check_compact(&mut self, cn: &CompactNetwork) -> Result<(), InvariantViolation> {
        let mut favorable = vec![false; self.favorable_streak.len()];
        for &p in &cn.favorable_pairs {
            favorable[p] = true;
        }
        for (p, streak) in self.favorable_streak.iter_mut().enumerate() {
            *streak = if favorable[p] { *streak + 1 } else { 0 };
            if *streak > 3 {
                return Err(violation(
                    "favorable-persistence",
                    format!("pair {p} favorable in {} consecutive phases", *streak),
                ));
            }
        }
        let mut kept = vec![false; self.g.edge_count()];
        for &e in &cn.original_edges {
            kept[e] = true;
        }
        for u in (0..self.n).filter(|&u| cn.active[u]) {
            let residual_degree = self.g.adj(u).iter().filter(|&&e| self.g.gamma(e) > 0).count();
            let compact_degree = self.g.adj(u).iter().filter(|&&e| kept[e]).count();
            if residual_degree != compact_degree {
                return Err(violation(
                    "active-neighbourhood",
                    format!("vertex {u}: compact degree {compact_degree}, residual {residual_degree}"),
                ));
            }
        }
        for p in 0..self.g.edge_count() / 2 {
            let gamma = self.g.gamma(2 * p) as i128;
            let d = self.delta as i128;
            if 4 * gamma > d && gamma <= 2 * d && !(kept[2 * p] || kept[2 * p + 1]) {
                return Err(violation("arcs-in", format!("pair {p} missing")));
            }
        }
        Ok(())
    }

    /// Internal vertices must see exactly the excess change their incident
    /// residual edges account for once pseudoarc flow is restored.
    fn check_bookkeeping(
        &self,
        res_start: &[i64],
        excess_start: &[i64],
    ) -> Result<(), InvariantViolation> {
        for (v, &start) in excess_start.iter().enumerate() {
            let moved: i64 = self
                .g
                .adj(v)
                .iter()
                .map(|&e| self.g.res(e) - res_start[e])
                .sum();
            if self.excess[v] - start != moved {
                return Err(violation(
                    "pseudoarc-excess",
                    format!(
                        "vertex {v}: excess moved by {}, residual edges account for {moved}",
                        self.excess[v] - start
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Converts the final preflow to a flow on the network and checks it.
    pub fn finish(self) -> Result<(i64, ResidualState, RunStats), InvariantViolation> {
        if self.delta != 0 {
            return Err(violation("finish", "phases remain"));
        }
        let state = self.g.to_state(self.net);
        let value =
            verify_flow(self.net, &state).map_err(|v| violation("flow-feasibility", v.to_string()))?;
        if self.g.reachable_from(self.s)[self.t] {
            return Err(violation(
                "maximality",
                "the sink is reachable from the source in the final residual network",
            ));
        }
        Ok((value, state, self.stats))
    }
}

/// Runs the scaling phases on a network as given, without degree reduction.
pub fn solve_bounded(
    net: &FlowNetwork,
) -> Result<(i64, ResidualState, RunStats), InvariantViolation> {
    let mut state = ScalingState::initialize(net);
    while state.delta() > 0 {
        state.run_phase()?;
    }
    state.finish()
}

/// Maximum flow by compact-network excess scaling. Networks whose degree
/// exceeds `⌊m/n⌋ + 3` are first reduced with
/// [`to_bounded_degree`](crate::transform::to_bounded_degree), and the flow is
/// mapped back onto the original arcs.
pub fn max_flow(net: &FlowNetwork) -> Result<(i64, ResidualState, RunStats), InvariantViolation> {
    let bound = net.degree_bound();
    if net.max_in_degree() <= bound && net.max_out_degree() <= bound {
        return solve_bounded(net);
    }
    let red = to_bounded_degree(net);
    let (value, state, mut stats) = solve_bounded(&red.reduced)?;
    stats.reduced = true;
    let back =
        map_flow_back(&red, &state).map_err(|v| violation("flow-feasibility", v.to_string()))?;
    Ok((value, back, stats))
}
