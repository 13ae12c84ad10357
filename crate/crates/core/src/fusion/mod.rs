//! Distributed estimator structure: topologies, the pair `(W ⊗ A, D_C)`,
//! its verification and topology design.

mod design;
mod distributed;
mod topology;

pub use design::{
    design_main, design_output_fusion, design_state_fusion_full_srank, design_topology,
    local_minimality_check, prune, DesignStrategy,
};
pub use distributed::{
    build_dc, distributed_pair, effective_w, kron_pattern, measurement_blocks,
    verify_design, verify_distributed, DistributedReport,
};
pub use topology::{FusionMode, TopologyDesign};
