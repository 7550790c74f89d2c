//! Paired-edge residual graph shared by the solvers.
//!
//! Edge `e` and `e ^ 1` are mutual reverses. Two layouts exist: one edge pair
//! per original arc, or one edge pair per joined vertex pair with parallel and
//! antiparallel arcs merged. The merged layout makes `r(u,v)` a single number
//! per direction, which is what capacity classification works with.

use std::collections::HashMap;

use crate::network::{FlowNetwork, ResidualState};

#[derive(Debug, Clone)]
struct PairArcs {
    forward: Vec<usize>,
    backward: Vec<usize>,
    capacity_forward: i64,
}

#[derive(Debug, Clone)]
enum Layout {
    PerArc,
    Merged(Vec<PairArcs>),
}

#[derive(Debug, Clone)]
pub struct ResidualGraph {
    n: usize,
    head: Vec<usize>,
    res: Vec<i64>,
    adj: Vec<Vec<usize>>,
    layout: Layout,
}

impl ResidualGraph {
    /// One edge pair per original arc, residuals taken from `state`.
    pub fn per_arc(net: &FlowNetwork, state: &ResidualState) -> Self {
        let n = net.n();
        let mut g = ResidualGraph::empty(n, Layout::PerArc);
        for (id, a) in net.arcs().iter().enumerate() {
            let f = state.flow[id];
            g.push_pair(a.tail.0, a.head.0, a.capacity - f, f);
        }
        g
    }

    /// One edge pair per joined vertex pair. The forward edge of each pair
    /// runs from the lower to the higher vertex id.
    pub fn merged(net: &FlowNetwork, state: &ResidualState) -> Self {
        let n = net.n();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pairs: Vec<PairArcs> = Vec::new();
        let mut ends: Vec<(usize, usize)> = Vec::new();
        for (id, a) in net.arcs().iter().enumerate() {
            let (u, v) = (a.tail.0, a.head.0);
            let key = (u.min(v), u.max(v));
            let p = *index.entry(key).or_insert_with(|| {
                pairs.push(PairArcs {
                    forward: Vec::new(),
                    backward: Vec::new(),
                    capacity_forward: 0,
                });
                ends.push(key);
                pairs.len() - 1
            });
            if u < v {
                pairs[p].forward.push(id);
                pairs[p].capacity_forward += a.capacity;
            } else {
                pairs[p].backward.push(id);
            }
        }
        let mut g = ResidualGraph::empty(n, Layout::PerArc);
        for (p, &(u, v)) in pairs.iter().zip(&ends) {
            let mut r_uv = 0;
            let mut r_vu = 0;
            for &a in &p.forward {
                r_uv += net.arc(a).capacity - state.flow[a];
                r_vu += state.flow[a];
            }
            for &a in &p.backward {
                r_vu += net.arc(a).capacity - state.flow[a];
                r_uv += state.flow[a];
            }
            g.push_pair(u, v, r_uv, r_vu);
        }
        g.layout = Layout::Merged(pairs);
        g
    }

    fn empty(n: usize, layout: Layout) -> Self {
        ResidualGraph {
            n,
            head: Vec::new(),
            res: Vec::new(),
            adj: vec![Vec::new(); n],
            layout,
        }
    }

    fn push_pair(&mut self, u: usize, v: usize, r_uv: i64, r_vu: i64) {
        let e = self.head.len();
        self.head.push(v);
        self.res.push(r_uv);
        self.head.push(u);
        self.res.push(r_vu);
        self.adj[u].push(e);
        self.adj[v].push(e + 1);
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.head.len()
    }

    #[inline]
    pub fn head(&self, e: usize) -> usize {
        self.head[e]
    }

    #[inline]
    pub fn tail(&self, e: usize) -> usize {
        self.head[e ^ 1]
    }

    #[inline]
    pub fn res(&self, e: usize) -> i64 {
        self.res[e]
    }

    #[inline]
    pub fn adj(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Moves `amount` units across edge `e`.
    #[inline]
    pub fn push(&mut self, e: usize, amount: i64) {
        debug_assert!(amount >= 0 && amount <= self.res[e]);
        self.res[e] -= amount;
        self.res[e ^ 1] += amount;
    }

    /// `r(e) + r(e^1)`, constant for the life of the graph.
    #[inline]
    pub fn gamma(&self, e: usize) -> i64 {
        self.res[e] + self.res[e ^ 1]
    }

    /// Vertices reachable from `from` along edges with positive residual.
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.head[e];
                if self.res[e] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Writes the residual back as per-arc flows. For merged pairs the net
    /// flow of a pair is laid onto its arcs in index order, which may cancel
    /// opposing flows but keeps every vertex balance unchanged.
    pub fn to_state(&self, net: &FlowNetwork) -> ResidualState {
        let mut flow = vec![0i64; net.m()];
        match &self.layout {
            Layout::PerArc => {
                for (id, f) in flow.iter_mut().enumerate() {
                    *f = self.res[2 * id + 1];
                }
            }
            Layout::Merged(pairs) => {
                for (p, pair) in pairs.iter().enumerate() {
                    let mut net_flow = pair.capacity_forward - self.res[2 * p];
                    let arcs = if net_flow >= 0 {
                        &pair.forward
                    } else {
                        net_flow = -net_flow;
                        &pair.backward
                    };
                    for &a in arcs {
                        let f = net_flow.min(net.arc(a).capacity);
                        flow[a] = f;
                        net_flow -= f;
                    }
                    debug_assert_eq!(net_flow, 0);
                }
            }
        }
        ResidualState::from_flows(net, flow).expect("flow vector sized from the network")
    }
}
