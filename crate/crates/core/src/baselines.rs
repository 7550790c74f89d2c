//! Classical solvers and certificates used to cross-check the scaling
//! engine: shortest augmenting paths, FIFO push-relabel, classical excess
//! scaling, min-cut extraction, and flow decomposition.

use std::collections::VecDeque;

use crate::error::{CertificateError, Violation};
use crate::network::{verify_flow, verify_preflow, FlowNetwork, ResidualState, VertexId};
use crate::residual::ResidualGraph;

/// Edmonds–Karp: repeatedly augment along a shortest residual path.
pub fn edmonds_karp(net: &FlowNetwork) -> (i64, ResidualState) {
    let (s, t) = (net.source().0, net.sink().0);
    let mut g = ResidualGraph::per_arc(net, &ResidualState::zero(net));
    let mut value = 0;
    let mut pred = vec![usize::MAX; net.n()];
    loop {
        pred.iter_mut().for_each(|p| *p = usize::MAX);
        let mut queue = VecDeque::from([s]);
        let mut found = false;
        'bfs: while let Some(u) = queue.pop_front() {
            for &e in g.adj(u) {
                let v = g.head(e);
                if g.res(e) > 0 && v != s && pred[v] == usize::MAX {
                    pred[v] = e;
                    if v == t {
                        found = true;
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if !found {
            break;
        }
        let mut bottleneck = i64::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(g.res(pred[v]));
            v = g.tail(pred[v]);
        }
        let mut v = t;
        while v != s {
            let e = pred[v];
            g.push(e, bottleneck);
            v = g.tail(e);
        }
        value += bottleneck;
    }
    (value, g.to_state(net))
}

/// Exact distance-to-sink labels by reverse BFS; vertices that cannot reach
/// the sink get `n + distance to source`, and `2n - 1` if neither is reachable.
fn exact_labels(g: &ResidualGraph, s: usize, t: usize) -> Vec<usize> {
    let n = g.n();
    let to_t = reverse_bfs(g, t);
    let to_s = reverse_bfs(g, s);
    (0..n)
        .map(|v| {
            if v == s {
                n
            } else if let Some(d) = to_t[v] {
                d
            } else if let Some(d) = to_s[v] {
                n + d
            } else {
                2 * n - 1
            }
        })
        .collect()
}

/// Distances to `target` along residual edges.
pub(crate) fn reverse_bfs(g: &ResidualGraph, target: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    dist[target] = Some(0);
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &e in g.adj(v) {
            // e leaves v; its reverse enters v from head(e)
            let u = g.head(e);
            if g.res(e ^ 1) > 0 && dist[u].is_none() {
                dist[u] = Some(dv + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

fn saturate_source(g: &mut ResidualGraph, excess: &mut [i64], s: usize) {
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
}

/// Goldberg–Tarjan push-relabel with FIFO selection, exact labels, and a
/// global relabel every `n` relabels.
pub fn goldberg_tarjan(net: &FlowNetwork) -> (i64, ResidualState) {
    let n = net.n();
    let (s, t) = (net.source().0, net.sink().0);
    let mut g = ResidualGraph::per_arc(net, &ResidualState::zero(net));
    let mut excess = vec![0i64; n];
    saturate_source(&mut g, &mut excess, s);
    let mut label = exact_labels(&g, s, t);
    let mut current = vec![0usize; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| v != s && v != t && excess[v] > 0).collect();
    let mut queued = vec![false; n];
    for &v in &queue {
        queued[v] = true;
    }
    let mut since_global = 0usize;
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        while excess[u] > 0 {
            if current[u] == g.adj(u).len() {
                let mut lowest = usize::MAX;
                for &e in g.adj(u) {
                    if g.res(e) > 0 {
                        lowest = lowest.min(label[g.head(e)]);
                    }
                }
                label[u] = lowest + 1;
                current[u] = 0;
                since_global += 1;
                if since_global >= n {
                    since_global = 0;
                    label = exact_labels(&g, s, t);
                    current.iter_mut().for_each(|c| *c = 0);
                }
                continue;
            }
            let e = g.adj(u)[current[u]];
            let v = g.head(e);
            if g.res(e) > 0 && label[u] == label[v] + 1 {
                let delta = excess[u].min(g.res(e));
                g.push(e, delta);
                excess[u] -= delta;
                excess[v] += delta;
                if v != s && v != t && !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            } else {
                current[u] += 1;
            }
        }
    }
    let state = g.to_state(net);
    (state.value(net), state)
}

/// Classical Ahuja–Orlin excess scaling: within a phase, push from the
/// lowest-labelled vertex with excess above `delta/2`, never letting a
/// receiver exceed `delta`. Returns the number of scaling phases run.
pub fn ahuja_orlin(net: &FlowNetwork) -> (i64, ResidualState, usize) {
    let n = net.n();
    let (s, t) = (net.source().0, net.sink().0);
    let mut g = ResidualGraph::per_arc(net, &ResidualState::zero(net));
    let mut excess = vec![0i64; n];
    saturate_source(&mut g, &mut excess, s);
    let mut label = exact_labels(&g, s, t);
    let u_max = net.max_capacity();
    let mut delta: i64 = if u_max <= 1 {
        1
    } else {
        (u_max as u64).next_power_of_two() as i64
    };
    let mut phases = 0;
    let mut current = vec![0usize; n];
    // lowest-label selection via buckets
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 1];
    loop {
        phases += 1;
        for b in buckets.iter_mut() {
            b.clear();
        }
        let mut in_bucket = vec![false; n];
        let large = |ex: i64, d: i64| 2 * ex > d;
        for v in 0..n {
            if v != s && v != t && large(excess[v], delta) {
                buckets[label[v]].push(v);
                in_bucket[v] = true;
            }
        }
        let mut level = 0usize;
        while level < buckets.len() {
            let Some(u) = buckets[level].pop() else {
                level += 1;
                continue;
            };
            in_bucket[u] = false;
            if label[u] != level || !large(excess[u], delta) {
                continue;
            }
            // push or relabel once, then reinsert
            let mut pushed = false;
            while current[u] < g.adj(u).len() {
                let e = g.adj(u)[current[u]];
                let v = g.head(e);
                if g.res(e) > 0 && label[u] == label[v] + 1 {
                    let room = if v == s || v == t { i64::MAX } else { delta - excess[v] };
                    let amount = excess[u].min(g.res(e)).min(room);
                    debug_assert!(amount > 0);
                    g.push(e, amount);
                    excess[u] -= amount;
                    excess[v] += amount;
                    if v != s && v != t && large(excess[v], delta) && !in_bucket[v] {
                        buckets[label[v]].push(v);
                        in_bucket[v] = true;
                        level = level.min(label[v]);
                    }
                    pushed = true;
                    break;
                }
                current[u] += 1;
            }
            if !pushed {
                let mut lowest = usize::MAX;
                for &e in g.adj(u) {
                    if g.res(e) > 0 {
                        lowest = lowest.min(label[g.head(e)]);
                    }
                }
                label[u] = lowest + 1;
                current[u] = 0;
                if label[u] >= buckets.len() {
                    buckets.resize(label[u] + 1, Vec::new());
                }
            }
            if large(excess[u], delta) && !in_bucket[u] {
                buckets[label[u]].push(u);
                in_bucket[u] = true;
                level = level.min(label[u]);
            }
        }
        if delta == 1 {
            break;
        }
        delta /= 2;
    }
    let state = g.to_state(net);
    (state.value(net), state, phases)
}

/// A source side `S` of an `(S, T)` cut and the capacity crossing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutCertificate {
    pub source_side: Vec<VertexId>,
    pub capacity: i64,
}

/// Takes `S` = vertices reachable from the source in the residual network and
/// checks that it separates the sink and that its capacity equals the flow
/// value.
pub fn min_cut_check(
    net: &FlowNetwork,
    state: &ResidualState,
) -> Result<CutCertificate, CertificateError> {
    let value = verify_flow(net, state)?;
    let g = ResidualGraph::per_arc(net, state);
    let side = g.reachable_from(net.source().0);
    if side[net.sink().0] {
        return Err(CertificateError::NotMaximal(net.sink()));
    }
    let capacity: i64 = net
        .arcs()
        .iter()
        .filter(|a| side[a.tail.0] && !side[a.head.0])
        .map(|a| a.capacity)
        .sum();
    if capacity != value {
        return Err(CertificateError::CutMismatch {
            cut: capacity,
            value,
        });
    }
    Ok(CutCertificate {
        source_side: (0..net.n()).filter(|&v| side[v]).map(VertexId).collect(),
        capacity,
    })
}

/// Flow carried along one path (or cycle) of arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathFlow {
    pub vertices: Vec<VertexId>,
    pub arcs: Vec<usize>,
    pub amount: i64,
}

/// Result of [`decompose_flow`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decomposition {
    /// Source-to-sink paths.
    pub paths: Vec<PathFlow>,
    /// Source-to-vertex paths ending at a vertex that holds excess.
    pub excess_paths: Vec<PathFlow>,
    /// Closed cycles, first vertex repeated at the end.
    pub cycles: Vec<PathFlow>,
}

impl Decomposition {
    /// Re-sums every path and cycle into per-arc flows.
    pub fn recompose(&self, m: usize) -> Vec<i64> {
        let mut flow = vec![0i64; m];
        for p in self.paths.iter().chain(&self.excess_paths).chain(&self.cycles) {
            for &a in &p.arcs {
                flow[a] += p.amount;
            }
        }
        flow
    }

    pub fn value(&self) -> i64 {
        self.paths.iter().map(|p| p.amount).sum()
    }
}

/// Splits a preflow into source–sink paths, source–excess paths, and cycles.
/// Cycles are removed first so that the remaining walks are acyclic.
pub fn decompose_flow(net: &FlowNetwork, state: &ResidualState) -> Result<Decomposition, Violation> {
    verify_preflow(net, state)?;
    let (s, t) = (net.source().0, net.sink().0);
    let mut flow = state.flow.clone();
    let mut out = Decomposition {
        cycles: cancel_cycles(net, &mut flow),
        ..Decomposition::default()
    };

    // On the acyclic remainder, walk from s along positive-flow arcs; every
    // walk ends at t or at a vertex with positive excess.
    let mut excess_left = state.excess.clone();
    let mut cursor = vec![0usize; net.n()];
    loop {
        let mut arcs = Vec::new();
        let mut vertices = vec![VertexId(s)];
        let mut v = s;
        loop {
            if v != s && (v == t || excess_left[v] > 0) {
                break;
            }
            let outs = net.out_arcs(VertexId(v));
            while cursor[v] < outs.len() && flow[outs[cursor[v]]] == 0 {
                cursor[v] += 1;
            }
            if cursor[v] == outs.len() {
                break;
            }
            let a = outs[cursor[v]];
            arcs.push(a);
            v = net.arc(a).head.0;
            vertices.push(VertexId(v));
        }
        if arcs.is_empty() {
            break;
        }
        let mut amount = arcs.iter().map(|&a| flow[a]).min().unwrap();
        if v != t {
            amount = amount.min(excess_left[v]);
            excess_left[v] -= amount;
        }
        debug_assert!(amount > 0, "preflow walk ended at a vertex without excess");
        for &a in &arcs {
            flow[a] -= amount;
        }
        let p = PathFlow {
            vertices,
            arcs,
            amount,
        };
        if v == t {
            out.paths.push(p);
        } else {
            out.excess_paths.push(p);
        }
    }
    debug_assert!(flow.iter().all(|&f| f == 0));
    Ok(out)
}

fn cancel_cycles(net: &FlowNetwork, flow: &mut [i64]) -> Vec<PathFlow> {
    let n = net.n();
    let mut cycles = Vec::new();
    // 0 = unvisited, 1 = on stack, 2 = finished
    let mut state = vec![0u8; n];
    let mut cursor = vec![0usize; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, usize::MAX)];
        state[root] = 1;
        while let Some(&(v, _)) = stack.last() {
            let outs = net.out_arcs(VertexId(v));
            while cursor[v] < outs.len() && flow[outs[cursor[v]]] == 0 {
                cursor[v] += 1;
            }
            if cursor[v] == outs.len() {
                state[v] = 2;
                stack.pop();
                continue;
            }
            let a = outs[cursor[v]];
            let w = net.arc(a).head.0;
            match state[w] {
                0 => {
                    state[w] = 1;
                    stack.push((w, a));
                }
                1 => {
                    // cycle: from w's stack position to v, closed by a
                    let start = stack.iter().position(|&(x, _)| x == w).unwrap();
                    let mut arcs: Vec<usize> = stack[start + 1..].iter().map(|&(_, e)| e).collect();
                    arcs.push(a);
                    let amount = arcs.iter().map(|&e| flow[e]).min().unwrap();
                    for &e in &arcs {
                        flow[e] -= amount;
                    }
                    let mut vertices: Vec<VertexId> =
                        stack[start..].iter().map(|&(x, _)| VertexId(x)).collect();
                    vertices.push(VertexId(w));
                    cycles.push(PathFlow {
                        vertices,
                        arcs,
                        amount,
                    });
                    // unwind to w; popped vertices are revisited later
                    for &(x, _) in &stack[start + 1..] {
                        state[x] = 0;
                    }
                    stack.truncate(start + 1);
                }
                _ => cursor[v] += 1,
            }
        }
    }
    cycles
}
