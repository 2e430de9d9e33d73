//! Spanning-forest measures on finite graphs and on finite quotients of the
//! line and the square lattice.
//!
//! The crate is organized in layers:
//!
//! * [`graph`] — undirected multigraphs with oriented-edge views, lattice
//!   presets, and quotients of infinite lattices by free translation actions
//!   (voltages, fundamental domains, subgraph lifts).
//! * [`flow`] — the antisymmetric edge-function space `l^2_-(E)`, star and
//!   cycle subspaces, true-cycle subspaces of quotients, and window-restricted
//!   projections of flow families.
//! * [`determinantal`] — projection kernels, exact enumeration of the induced
//!   subset distributions, exact sampling, and the wired/free spanning-forest
//!   measures.
//! * [`coupling`] — monotone couplings of subset distributions via max-flow
//!   feasibility, group averaging, and window lifts of coupled measures.

pub mod coupling;
pub mod determinantal;
pub mod flow;
pub mod graph;
mod numeric;

pub use graph::lattice::{Axis, BaseEdge, BaseVertex, LatticeSpec};
pub use graph::quotient::{
    BaseEdgeRef, BaseVertexRef, FundamentalDomain, GroupAction, LiftMode, QuotientGraph, Voltage,
};
pub use graph::{EdgeId, Graph, GraphError, OrientedEdge, VertexId};
