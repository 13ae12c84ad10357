//! Agent typing with respect to a cover family.

use serde::Serialize;

use super::cover::{CoverFamily, CycleKind};
use super::digraph::SystemDigraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum AgentType {
    /// Terminates a Y-topped path of the cover.
    Alpha,
    /// Measures a state of a parent cycle.
    Beta,
    /// Measures only states of child cycles or inner path states.
    Gamma,
    /// Has no nonzero measurement.
    Unmeasuring,
}

impl AgentType {
    pub fn is_crucial(self) -> bool {
        matches!(self, AgentType::Alpha | AgentType::Beta)
    }
}

/// Why an agent received its type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Witness {
    PathEnd { path: usize, state: usize },
    ParentCycle { cycle: usize, state: usize },
    ChildCycle { cycle: usize, state: usize },
    PathState { path: usize, state: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentRecord {
    pub agent: usize,
    pub agent_type: AgentType,
    pub crucial: bool,
    pub witness: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentClassification {
    pub agents: Vec<AgentRecord>,
}

impl AgentClassification {
    pub fn type_of(&self, agent: usize) -> AgentType {
        self.agents[agent].agent_type
    }

    pub fn crucial(&self) -> Vec<usize> {
        self.agents
            .iter()
            .filter(|r| r.crucial)
            .map(|r| r.agent)
            .collect()
    }

    pub fn of_type(&self, t: AgentType) -> Vec<usize> {
        self.agents
            .iter()
            .filter(|r| r.agent_type == t)
            .map(|r| r.agent)
            .collect()
    }
}

/// Types every agent of `g` against the cover `l`; the strongest type wins
/// (Alpha > Beta > Gamma).
pub fn classify_agents(l: &CoverFamily, g: &SystemDigraph) -> AgentClassification {
    let n = g.state_count();
    // Where each state sits in the cover.
    let mut place: Vec<Option<Witness>> = vec![None; n];
    for (ci, cycle) in l.cycles.iter().enumerate() {
        for &x in &cycle.states {
            place[x] = Some(match cycle.kind {
                CycleKind::ParentCycle => Witness::ParentCycle { cycle: ci, state: x },
                CycleKind::ChildCycle => Witness::ChildCycle { cycle: ci, state: x },
            });
        }
    }
    for (pi, path) in l.ytopped_paths.iter().enumerate() {
        for &x in &path.states {
            place[x] = Some(Witness::PathState { path: pi, state: x });
        }
    }

    let agents = (0..g.agent_count())
        .map(|agent| {
            let mut witness = Vec::new();
            for (pi, path) in l.ytopped_paths.iter().enumerate() {
                if g.outputs()[path.output].agent == agent {
                    witness.push(Witness::PathEnd {
                        path: pi,
                        state: *path.states.last().expect("paths are nonempty"),
                    });
                }
            }
            let measured = g.states_measured_by(agent);
            let agent_type = if !witness.is_empty() {
                AgentType::Alpha
            } else {
                let parents: Vec<Witness> = measured
                    .iter()
                    .filter_map(|&x| place[x].clone())
                    .filter(|w| matches!(w, Witness::ParentCycle { .. }))
                    .collect();
                if !parents.is_empty() {
                    witness = parents;
                    AgentType::Beta
                } else if measured.is_empty() {
                    AgentType::Unmeasuring
                } else {
                    witness = measured.iter().filter_map(|&x| place[x].clone()).collect();
                    AgentType::Gamma
                }
            };
            AgentRecord {
                agent,
                agent_type,
                crucial: agent_type.is_crucial(),
                witness,
            }
        })
        .collect();
    AgentClassification { agents }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::SparsityPattern;
    use crate::structural::{build_digraph, maximal_cover_of};
    use crate::testbed;

    fn classify(a: &SparsityPattern, cs: &[SparsityPattern]) -> AgentClassification {
        let g = build_digraph(a, cs).unwrap();
        let l = maximal_cover_of(&g).unwrap();
        classify_agents(&l, &g)
    }

    #[test]
    fn testbed_types() {
        let tb = testbed::plant();
        let cl = classify(&tb.a, &tb.cs);
        assert_eq!(cl.type_of(0), AgentType::Alpha);
        assert_eq!(cl.type_of(1), AgentType::Beta);
        assert_eq!(cl.type_of(2), AgentType::Gamma);
        assert_eq!(cl.crucial(), vec![0, 1]);
        assert_eq!(cl.agents[0].witness, vec![Witness::PathEnd { path: 0, state: 2 }]);
    }

    #[test]
    fn agent_without_rows() {
        let tb = testbed::plant();
        let mut cs = tb.cs.clone();
        cs.push(SparsityPattern::empty(0, 7));
        cs.push(SparsityPattern::empty(2, 7));
        let cl = classify(&tb.a, &cs);
        assert_eq!(cl.type_of(3), AgentType::Unmeasuring);
        assert_eq!(cl.type_of(4), AgentType::Unmeasuring);
        assert!(!cl.agents[3].crucial);
    }

    #[test]
    fn single_self_loop() {
        let cl = classify(&SparsityPattern::identity(1), &[SparsityPattern::identity(1)]);
        assert_eq!(cl.type_of(0), AgentType::Beta);
        assert!(cl.agents[0].crucial);
    }

    #[test]
    fn strongest_type_wins() {
        // One agent measuring both x3 (path end) and x5 (parent cycle).
        let tb = testbed::plant();
        let both = SparsityPattern::new(2, 7, [(0, 2), (1, 4)]).unwrap();
        let cl = classify(&tb.a, &[both]);
        assert_eq!(cl.type_of(0), AgentType::Alpha);
    }
}
