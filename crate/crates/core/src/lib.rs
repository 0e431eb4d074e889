//! Dense subgraph discovery on weighted bipartite graphs.
//!
//! The central object is the *pruned growth process*: power iteration on the
//! adjacency matrix where every entry is rounded up to a power of two and small
//! entries are pruned after each multiplication. Level sets of the iterates are
//! paired up and the densest pair under `d(S,T) = e(S,T) / sqrt(|S| |T|)` is
//! reported.
//!
//! * [`local::local_density`] starts from one vertex; the edges it touches
//!   depend on `Δ` and the target size `K` but not on the size of the graph.
//! * [`global::global_density`] starts from the all-ones indicator of each side
//!   and gives an `O(log n)` approximation of the densest subgraph.
//! * [`oracle`] holds the exact and spectral reference computations used to
//!   check both.

pub mod global;
pub mod graph;
pub mod growth;
pub mod io;
pub mod local;
pub mod oracle;
pub mod verify;

pub use global::{global_density, global_guarantee_bound, GlobalSchedule};
pub use graph::{BipartiteGraph, DegreeStats, GraphBuilder, GraphError, Side, Subgraph, VertexId};
pub use growth::{GrowthError, GrowthTrace, LevelSets, LevelVector, SparseVector};
pub use local::{
    local_density, local_guarantee_bound, seed_scan, DensityError, DensityResult, LocalSchedule, ScanHit, ScanOutcome, Start, FoundAt,
};
pub use oracle::{exact_densest, good_seed_set, top_eigenvalue, EigenEstimate, GoodSeedReport};
pub use verify::{run_suite, PropertyOutcome, SuiteOptions, PROPERTIES};
