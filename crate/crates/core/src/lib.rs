//! Weighted common subgraph matching.
//!
//! Given graphs G (M vertices) and H (N vertices) and a size L ≤ M ≤ N,
//! find the L-to-L vertex correspondence whose induced subgraphs differ the
//! least, as measured by a structural term on the adjacency matrices plus
//! an optional label cost. The combinatorial problem over partial
//! permutation matrices is relaxed to their convex hull and solved with a
//! convex-to-concave continuation whose inner loop is Frank-Wolfe.

pub mod direction;
pub mod error;
pub mod gnccp;
pub mod io;
mod iterate;
pub mod linesearch;
pub mod objective;
pub mod oracle;
pub mod synth;
pub mod types;

pub use direction::{
    discretize, solve_direction_exact, solve_direction_fast, solve_rectangular_assignment,
    DirectionMethod,
};
pub use error::{Result, WcsError};
pub use gnccp::{
    fw_minimize, match_graphs, match_piw, FwOutcome, MatchResult, SolverConfig, TraceRecord,
};
pub use linesearch::LineSearch;
pub use objective::{Objective, RelaxationKind};
pub use oracle::{brute_force_min, enumerate_partial_permutations, OracleResult};
pub use types::{
    selection_mask, validate_partial_permutation, CostMatrix, PartialPermutation, ProblemInstance,
    RelaxedAssignment, WeightedGraph,
};
