//! Uniformly sparse matrix multiplication in the supported low-bandwidth model.
//!
//! The crate has two halves. Preprocessing works on the known sparsity
//! structure only: it enumerates triangles, peels clustered layers off the
//! triangle set and prepares the small-component machinery. Runtime
//! processing pushes actual values through a round-synchronous simulator
//! in which every node sends and receives at most one message per round.

pub mod algorithms;
pub mod clustering;
pub mod instance;
pub mod oracle;
pub mod pattern;
pub mod semiring;
pub mod sim;
pub mod smallcomp;
pub mod triangle;

pub use instance::{InstanceError, SupportedMatrix, TriInstance};
pub use pattern::{validate_uniform_sparsity, PatternError, SparsePattern};
pub use semiring::{Semiring, Value, TROPICAL_INF};
pub use triangle::{
    enumerate_triangles, support_graph, triangles_in_cluster, Cluster, NodeId, Side, SupportGraph, Triangle,
    TriangleSet,
};
