//! Maximum flow by excess scaling over per-phase compact networks.
//!
//! The solver in [`engine`] runs push-relabel on a small compact network each
//! scaling phase. Paths of high residual capacity are folded into pseudoarcs
//! with the link-cut forest in [`dyntree`], and the flow they carry is written
//! back onto the original arcs when the phase ends.
//!
//! ```
//! use compactflow::{FlowNetwork, max_flow};
//!
//! let net = FlowNetwork::from_arcs(4, 0, 3, &[(0, 1, 3), (0, 2, 3), (1, 3, 4), (2, 3, 4)])?;
//! let (value, _state, _stats) = max_flow(&net)?;
//! assert_eq!(value, 6);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod baselines;
pub mod compact;
pub mod dyntree;
pub mod engine;
pub mod generate;
pub mod io;
mod error;
pub mod network;
pub mod residual;
pub mod transform;

pub use error::{CertificateError, FlowError, InvariantViolation, Violation};
pub use network::{
    classify_arc, compaction_capacity, residual_capacity, verify_flow, verify_preflow, Arc,
    ArcClass, FlowNetwork, ResidualState, VertexId,
};
pub use engine::{max_flow, PhaseStats, RunStats};
