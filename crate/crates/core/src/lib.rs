//! Structural observability of networked estimators.
//!
//! The crate answers generic (pattern-only) questions about a linear system
//! `x_{k+1} = A x_k + v_k` watched by agents `y^i_k = C_i x_k + r^i_k`,
//! designs inter-agent communication topologies that keep a single
//! time-scale networked estimator observable, and checks designs
//! numerically by gain synthesis and simulation.
//!
//! * [`structural`]: digraph, SCCs, S-rank, generic observability, covers,
//!   agent classification.
//! * [`fusion`]: the distributed pair `(W ⊗ A, D_C)` and topology design.
//! * [`numerics`]: instantiation, spectral radius, gain synthesis, simulation.
//! * [`io`]: JSON system/topology/gain files and the trace CSV.

pub mod error;
pub mod fusion;
pub mod io;
pub mod numerics;
pub mod pattern;
pub mod report;
pub mod structural;
pub mod testbed;

pub use error::{Error, Result};
pub use pattern::SparsityPattern;
