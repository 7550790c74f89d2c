use thiserror::Error;

use crate::network::VertexId;

/// Misuse of the public API: bad ids, malformed networks, out-of-domain
/// parameters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("vertex {vertex} out of range for a network with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("negative capacity {capacity} on arc {tail}->{head}")]
    NegativeCapacity { tail: usize, head: usize, capacity: i64 },
    #[error("source and sink must be distinct (both {0})")]
    SourceIsSink(usize),
    #[error("query requires distinct endpoints (both {0})")]
    SameEndpoints(usize),
    #[error("excess dominator must be positive, got {0}")]
    NonPositiveDelta(i64),
    #[error("flow vector has {got} entries, network has {expected} arcs")]
    FlowLength { got: usize, expected: usize },
    #[error("split target {0} is the source or the sink")]
    TerminalSplit(usize),
}

/// A constraint broken by a flow or preflow, with the place it broke.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("arc {arc} carries {flow}, capacity is {capacity}")]
    Capacity { arc: usize, flow: i64, capacity: i64 },
    #[error("arc {arc} carries negative flow {flow}")]
    NegativeFlow { arc: usize, flow: i64 },
    #[error("stored excess {stored} at vertex {vertex} differs from recomputed {recomputed}")]
    Bookkeeping { vertex: usize, stored: i64, recomputed: i64 },
    #[error("vertex {vertex} has negative excess {excess}")]
    NegativeExcess { vertex: usize, excess: i64 },
    #[error("vertex {vertex} violates conservation with excess {excess}")]
    Conservation { vertex: usize, excess: i64 },
    #[error("state shape does not match the network")]
    Shape,
}

/// A bound or invariant the scaling engine is supposed to maintain did not
/// hold. `rule` names the property (for example `"active-drained"`).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invariant {rule} violated: {detail}")]
pub struct InvariantViolation {
    pub rule: &'static str,
    pub detail: String,
}

impl InvariantViolation {
    pub(crate) fn new(rule: &'static str, detail: impl Into<String>) -> Self {
        InvariantViolation {
            rule,
            detail: detail.into(),
        }
    }
}

/// The residual network still has an augmenting path, so the state is not a
/// maximum flow.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("sink {0} is reachable from the source in the residual network")]
    NotMaximal(VertexId),
    #[error("cut capacity {cut} differs from flow value {value}")]
    CutMismatch { cut: i64, value: i64 },
    #[error(transparent)]
    Infeasible(#[from] Violation),
}
