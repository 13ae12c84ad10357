//! The seven-state, three-agent reference network used throughout the tests,
//! the acceptance suite and the CLI fixtures.
//!
//! States are 0-based here; reports print them 1-based.

use crate::fusion::{FusionMode, TopologyDesign};
use crate::pattern::SparsityPattern;

pub struct Testbed {
    pub a: SparsityPattern,
    pub cs: Vec<SparsityPattern>,
    pub names: Vec<String>,
}

/// Nonzeros of the 7x7 system pattern.
pub const SYSTEM_NONZEROS: [(usize, usize); 11] = [
    (0, 1),
    (1, 0),
    (2, 1),
    (3, 2),
    (3, 4),
    (3, 5),
    (4, 3),
    (5, 3),
    (5, 4),
    (5, 6),
    (6, 6),
];

/// State measured by agents `a`, `b`, `c`.
pub const MEASURED: [usize; 3] = [2, 4, 6];

pub fn plant() -> Testbed {
    let a = SparsityPattern::new(7, 7, SYSTEM_NONZEROS).expect("static pattern");
    let cs = MEASURED
        .iter()
        .map(|&x| SparsityPattern::new(1, 7, [(0, x)]).expect("static pattern"))
        .collect();
    Testbed {
        a,
        cs,
        names: ["a", "b", "c"].iter().map(|s| s.to_string()).collect(),
    }
}

/// Crucial agents linked both ways, both feeding the non-crucial one.
pub fn output_fusion_topology() -> TopologyDesign {
    TopologyDesign::new(3, [(0, 1), (1, 0), (0, 2), (1, 2)], FusionMode::OutputFusionOnly)
        .expect("static topology")
}

/// Broadcast from the path-terminating agent plus a route from every agent to
/// the observer of the parent SCC.
pub fn combined_topology() -> TopologyDesign {
    TopologyDesign::new(3, [(0, 1), (0, 2), (2, 0)], FusionMode::Combined).expect("static topology")
}
