//! Flow networks, preflows, and the capacity classes used to decide which arcs
//! enter a compact network.
//!
//! All quantities are exact `i64`. Parallel arcs are kept distinct; queries
//! about a vertex pair aggregate over every arc joining the pair.

use std::fmt;

use crate::error::{FlowError, Violation};

/// Dense vertex index, `0 <= index < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for VertexId {
    fn from(index: usize) -> Self {
        VertexId(index)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
    pub capacity: i64,
}

/// Directed capacitated graph with a distinguished source and sink.
///
/// Built once with [`FlowNetwork::new`] and [`FlowNetwork::add_arc`], then
/// treated as immutable by every solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    n: usize,
    arcs: Vec<Arc>,
    source: VertexId,
    sink: VertexId,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize, source: VertexId, sink: VertexId) -> Result<Self, FlowError> {
        for v in [source, sink] {
            if v.0 >= n {
                return Err(FlowError::VertexOutOfRange { vertex: v.0, n });
            }
        }
        if source == sink {
            return Err(FlowError::SourceIsSink(source.0));
        }
        Ok(FlowNetwork {
            n,
            arcs: Vec::new(),
            source,
            sink,
            out_arcs: vec![Vec::new(); n],
            in_arcs: vec![Vec::new(); n],
        })
    }

    /// Convenience constructor from `(tail, head, capacity)` triples.
    pub fn from_arcs(
        n: usize,
        source: usize,
        sink: usize,
        arcs: &[(usize, usize, i64)],
    ) -> Result<Self, FlowError> {
        let mut net = FlowNetwork::new(n, VertexId(source), VertexId(sink))?;
        for &(u, v, c) in arcs {
            net.add_arc(VertexId(u), VertexId(v), c)?;
        }
        Ok(net)
    }

    /// Appends an arc and returns its index.
    pub fn add_arc(
        &mut self,
        tail: VertexId,
        head: VertexId,
        capacity: i64,
    ) -> Result<usize, FlowError> {
        self.check(tail)?;
        self.check(head)?;
        if tail == head {
            return Err(FlowError::SelfLoop(tail.0));
        }
        if capacity < 0 {
            return Err(FlowError::NegativeCapacity {
                tail: tail.0,
                head: head.0,
                capacity,
            });
        }
        let id = self.arcs.len();
        self.arcs.push(Arc {
            tail,
            head,
            capacity,
        });
        self.out_arcs[tail.0].push(id);
        self.in_arcs[head.0].push(id);
        Ok(id)
    }

    /// Overwrites an arc capacity in place; used to delete split bridges.
    pub(crate) fn set_capacity(&mut self, arc: usize, capacity: i64) {
        self.arcs[arc].capacity = capacity;
    }

    pub fn check(&self, v: VertexId) -> Result<(), FlowError> {
        if v.0 < self.n {
            Ok(())
        } else {
            Err(FlowError::VertexOutOfRange {
                vertex: v.0,
                n: self.n,
            })
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.arcs.len()
    }

    #[inline]
    pub fn source(&self) -> VertexId {
        self.source
    }

    #[inline]
    pub fn sink(&self) -> VertexId {
        self.sink
    }

    #[inline]
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    #[inline]
    pub fn arc(&self, id: usize) -> Arc {
        self.arcs[id]
    }

    pub fn out_arcs(&self, v: VertexId) -> &[usize] {
        &self.out_arcs[v.0]
    }

    pub fn in_arcs(&self, v: VertexId) -> &[usize] {
        &self.in_arcs[v.0]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_arcs[v.0].len()
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_arcs[v.0].len()
    }

    /// Largest arc capacity, 0 for an arcless network.
    pub fn max_capacity(&self) -> i64 {
        self.arcs.iter().map(|a| a.capacity).max().unwrap_or(0)
    }

    pub fn max_in_degree(&self) -> usize {
        self.in_arcs.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_out_degree(&self) -> usize {
        self.out_arcs.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The degree bound `floor(m / n) + 3` targeted by the degree reduction.
    pub fn degree_bound(&self) -> usize {
        self.m() / self.n.max(1) + 3
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        v == self.source.0 || v == self.sink.0
    }
}

/// A preflow on a particular [`FlowNetwork`]: flow per arc and excess per
/// vertex.
///
/// Flows are stored per arc, so an antiparallel pair may carry flow in both
/// directions; residual queries net them out. Excess is stored for every
/// vertex including the terminals (the source's excess is negative).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualState {
    pub flow: Vec<i64>,
    pub excess: Vec<i64>,
}

impl ResidualState {
    pub fn zero(net: &FlowNetwork) -> Self {
        ResidualState {
            flow: vec![0; net.m()],
            excess: vec![0; net.n()],
        }
    }

    /// Builds a state from per-arc flows, deriving excesses.
    pub fn from_flows(net: &FlowNetwork, flow: Vec<i64>) -> Result<Self, FlowError> {
        if flow.len() != net.m() {
            return Err(FlowError::FlowLength {
                got: flow.len(),
                expected: net.m(),
            });
        }
        let excess = recompute_excess(net, &flow);
        Ok(ResidualState { flow, excess })
    }

    /// Net amount that has reached the sink.
    pub fn value(&self, net: &FlowNetwork) -> i64 {
        self.excess[net.sink().0]
    }
}

fn recompute_excess(net: &FlowNetwork, flow: &[i64]) -> Vec<i64> {
    let mut excess = vec![0i64; net.n()];
    for (a, &f) in net.arcs().iter().zip(flow) {
        excess[a.tail.0] -= f;
        excess[a.head.0] += f;
    }
    excess
}

/// Residual capacity from `u` to `v`: unused capacity on arcs `u -> v` plus
/// cancellable flow on arcs `v -> u`. Zero when the pair is not joined.
pub fn residual_capacity(
    net: &FlowNetwork,
    state: &ResidualState,
    u: VertexId,
    v: VertexId,
) -> Result<i64, FlowError> {
    net.check(u)?;
    net.check(v)?;
    if u == v {
        return Err(FlowError::SameEndpoints(u.0));
    }
    let forward: i64 = net
        .out_arcs(u)
        .iter()
        .filter(|&&a| net.arc(a).head == v)
        .map(|&a| net.arc(a).capacity - state.flow[a])
        .sum();
    let backward: i64 = net
        .out_arcs(v)
        .iter()
        .filter(|&&a| net.arc(a).head == u)
        .map(|&a| state.flow[a])
        .sum();
    Ok(forward + backward)
}

/// Two-way residual capacity `r(u,v) + r(v,u)` between a pair. Pushes between
/// `u` and `v` never change it.
pub fn compaction_capacity(
    net: &FlowNetwork,
    state: &ResidualState,
    u: VertexId,
    v: VertexId,
) -> Result<i64, FlowError> {
    Ok(residual_capacity(net, state, u, v)? + residual_capacity(net, state, v, u)?)
}

/// Capacity class of a residual arc relative to the excess dominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcClass {
    /// `delta/4 < gamma <= delta/2`.
    Favorable,
    /// `delta/4 <= gamma <= 2*delta` and `r <= delta`, not favorable.
    Large,
    /// `r > delta`.
    Abundant,
    /// Everything else.
    Small,
}

impl ArcClass {
    /// Favorable and large arcs are carried into the compact network as
    /// original arcs.
    pub fn is_compact_original(self) -> bool {
        matches!(self, ArcClass::Favorable | ArcClass::Large)
    }
}

/// Classifies an arc with compaction capacity `gamma` and residual capacity
/// `r_uv` against `delta`. Thresholds are compared after scaling by four, so
/// no fractional part is ever dropped.
pub fn classify_arc(gamma: i64, r_uv: i64, delta: i64) -> Result<ArcClass, FlowError> {
    if delta <= 0 {
        return Err(FlowError::NonPositiveDelta(delta));
    }
    debug_assert!(gamma >= r_uv && r_uv >= 0);
    let (g4, d) = (gamma as i128 * 4, delta as i128);
    let class = if r_uv as i128 > d {
        ArcClass::Abundant
    } else if g4 > d && g4 <= 2 * d {
        ArcClass::Favorable
    } else if g4 >= d && g4 <= 8 * d {
        ArcClass::Large
    } else {
        ArcClass::Small
    };
    Ok(class)
}

/// Accepts iff every arc respects `0 <= f <= c`, the stored excesses match the
/// ones implied by the flows, and no internal vertex has negative excess.
pub fn verify_preflow(net: &FlowNetwork, state: &ResidualState) -> Result<(), Violation> {
    if state.flow.len() != net.m() || state.excess.len() != net.n() {
        return Err(Violation::Shape);
    }
    for (arc, (a, &f)) in net.arcs().iter().zip(&state.flow).enumerate() {
        if f < 0 {
            return Err(Violation::NegativeFlow { arc, flow: f });
        }
        if f > a.capacity {
            return Err(Violation::Capacity {
                arc,
                flow: f,
                capacity: a.capacity,
            });
        }
    }
    let recomputed = recompute_excess(net, &state.flow);
    for (vertex, (&stored, &recomputed)) in state.excess.iter().zip(&recomputed).enumerate() {
        if stored != recomputed {
            return Err(Violation::Bookkeeping {
                vertex,
                stored,
                recomputed,
            });
        }
    }
    for (vertex, &excess) in state.excess.iter().enumerate() {
        if !net.is_terminal(vertex) && excess < 0 {
            return Err(Violation::NegativeExcess { vertex, excess });
        }
    }
    Ok(())
}

/// Accepts iff the state is a preflow with zero excess off the terminals.
/// Returns the flow value, the net outflow of the source.
pub fn verify_flow(net: &FlowNetwork, state: &ResidualState) -> Result<i64, Violation> {
    verify_preflow(net, state)?;
    for (vertex, &excess) in state.excess.iter().enumerate() {
        if !net.is_terminal(vertex) && excess != 0 {
            return Err(Violation::Conservation { vertex, excess });
        }
    }
    Ok(-state.excess[net.source().0])
}
