//! Generic observability: output reachability plus the S-rank of `[A; C]`.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::digraph::{build_digraph, SystemDigraph};
use super::matching::s_rank;
use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub observable: bool,
    /// States from which no output vertex is reachable.
    pub condition_i_violations: Vec<usize>,
    /// S-rank of the stacked `[A; C]` pattern.
    pub srank_stack: usize,
    pub deficiency: usize,
}

/// States that cannot reach any output (reverse BFS from all outputs).
pub fn condition_i_check(g: &SystemDigraph) -> BTreeSet<usize> {
    let n = g.state_count();
    let mut reaches = vec![false; n];
    let mut queue = VecDeque::new();
    for r in 0..g.output_count() {
        for &x in g.output_sources(r) {
            if !reaches[x] {
                reaches[x] = true;
                queue.push_back(x);
            }
        }
    }
    while let Some(x) = queue.pop_front() {
        for &p in g.predecessors(x) {
            if !reaches[p] {
                reaches[p] = true;
                queue.push_back(p);
            }
        }
    }
    (0..n).filter(|&x| !reaches[x]).collect()
}

/// Generic observability of `(A, C)` for any stacked output pattern `C`.
pub fn generic_observability(a: &SparsityPattern, c: &SparsityPattern) -> Result<ObservabilityReport> {
    if !a.is_square() || c.cols() != a.rows() {
        return Err(Error::Dimension(format!(
            "A is {}x{}, C is {}x{}",
            a.rows(),
            a.cols(),
            c.rows(),
            c.cols()
        )));
    }
    let g = build_digraph(a, std::slice::from_ref(c))?;
    Ok(report_for(&g))
}

/// Same as [`generic_observability`] with the output pattern split per agent.
pub fn generic_observability_agents(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
) -> Result<ObservabilityReport> {
    let g = build_digraph(a, cs)?;
    Ok(report_for(&g))
}

pub(crate) fn report_for(g: &SystemDigraph) -> ObservabilityReport {
    let n = g.state_count();
    let violations: Vec<usize> = condition_i_check(g).into_iter().collect();
    let srank_stack = s_rank(
        &g.system_pattern()
            .vstack(g.output_pattern())
            .expect("digraph patterns share a column count"),
    );
    let deficiency = n - srank_stack;
    ObservabilityReport {
        observable: violations.is_empty() && deficiency == 0,
        condition_i_violations: violations,
        srank_stack,
        deficiency,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed;

    #[test]
    fn testbed_is_observable() {
        let tb = testbed::plant();
        let r = generic_observability_agents(&tb.a, &tb.cs).unwrap();
        assert!(r.observable);
        assert_eq!(r.srank_stack, 7);
        let g = build_digraph(&tb.a, &tb.cs).unwrap();
        assert!(condition_i_check(&g).is_empty());
    }

    #[test]
    fn dropping_agents() {
        let tb = testbed::plant();
        let without = |skip: usize| {
            let cs: Vec<_> = tb
                .cs
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, c)| c.clone())
                .collect();
            generic_observability_agents(&tb.a, &cs).unwrap()
        };
        let no_a = without(0);
        assert!(!no_a.observable);
        assert_eq!(no_a.deficiency, 1);
        assert!(!without(1).observable);
        assert!(without(2).observable);
    }

    #[test]
    fn identity_without_outputs() {
        let r = generic_observability(&SparsityPattern::identity(3), &SparsityPattern::empty(0, 3)).unwrap();
        assert!(!r.observable);
        assert_eq!(r.condition_i_violations, vec![0, 1, 2]);
    }

    #[test]
    fn isolated_state_violates_reachability() {
        let a = SparsityPattern::new(2, 2, [(0, 0)]).unwrap();
        let c = SparsityPattern::new(1, 2, [(0, 0)]).unwrap();
        let g = build_digraph(&a, &[c]).unwrap();
        assert_eq!(condition_i_check(&g).into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn self_loop_without_output() {
        let g = build_digraph(&SparsityPattern::identity(1), &[]).unwrap();
        assert_eq!(condition_i_check(&g).len(), 1);
    }

    #[test]
    fn column_mismatch() {
        let r = generic_observability(&SparsityPattern::identity(3), &SparsityPattern::identity(2));
        assert!(matches!(r, Err(Error::Dimension(_))));
    }
}
