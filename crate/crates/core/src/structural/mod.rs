//! Structure-only analysis of `(A, C)`: the system digraph, SCCs, S-rank,
//! generic observability, cycle/path covers and agent classification.

mod classify;
mod cover;
mod digraph;
mod matching;
mod observability;
mod scc;

pub use classify::{classify_agents, AgentClassification, AgentRecord, AgentType, Witness};
pub use cover::{maximal_cover, maximal_cover_of, CoverCycle, CoverFamily, CycleKind, YToppedPath};
pub use digraph::{build_digraph, OutputVertex, SystemDigraph};
pub use matching::{maximum_matching, pattern_matching, s_rank, Matching};
pub use observability::{
    condition_i_check, generic_observability, generic_observability_agents, ObservabilityReport,
};
pub use scc::{scc_decompose, tarjan, SccDecomposition, SccKind};
pub(crate) use observability::report_for;
