//! Topology design: output-fusion, main (combined) and full-S-rank state-fusion.

use std::fmt;
use std::str::FromStr;

use super::distributed::verify_design;
use super::topology::{FusionMode, TopologyDesign};
use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;
use crate::structural::{
    build_digraph, classify_agents, maximal_cover_of, report_for, s_rank, scc_decompose,
    AgentClassification, AgentType, SystemDigraph,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignStrategy {
    /// Crucial agents share measurements with everybody.
    OutputFusion,
    /// Combined fusion, pruned to a locally minimal edge set.
    Main,
    /// State fusion only; needs `A` with full S-rank.
    FullSRank,
}

impl FromStr for DesignStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "output" => Ok(DesignStrategy::OutputFusion),
            "main" => Ok(DesignStrategy::Main),
            "full-srank" => Ok(DesignStrategy::FullSRank),
            other => Err(Error::parse(
                "mode",
                format!("unknown design {other:?} (expected output, main or full-srank)"),
            )),
        }
    }
}

impl fmt::Display for DesignStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignStrategy::OutputFusion => "output",
            DesignStrategy::Main => "main",
            DesignStrategy::FullSRank => "full-srank",
        })
    }
}

/// Runs the chosen design on a raw system, classifying agents as needed.
pub fn design_topology(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    strategy: DesignStrategy,
) -> Result<TopologyDesign> {
    match strategy {
        DesignStrategy::FullSRank => design_state_fusion_full_srank(a, cs),
        DesignStrategy::OutputFusion | DesignStrategy::Main => {
            let g = build_digraph(a, cs)?;
            let cl = classify_agents(&maximal_cover_of(&g)?, &g);
            if strategy == DesignStrategy::Main {
                design_main(a, cs, &cl)
            } else {
                design_output_fusion(a, cs, &cl)
            }
        }
    }
}

fn observable_digraph(a: &SparsityPattern, cs: &[SparsityPattern]) -> Result<SystemDigraph> {
    let g = build_digraph(a, cs)?;
    let r = report_for(&g);
    if !r.observable {
        return Err(Error::NotObservable(format!(
            "{} states reach no output, S-rank deficiency {}",
            r.condition_i_violations.len(),
            r.deficiency
        )));
    }
    Ok(g)
}

/// Agents measuring at least one state of `states`, ascending.
fn observers(g: &SystemDigraph, states: &[usize]) -> Vec<usize> {
    let mut agents: Vec<usize> = states
        .iter()
        .flat_map(|&x| g.measuring_outputs(x).iter().map(|&r| g.outputs()[r].agent))
        .collect();
    agents.sort_unstable();
    agents.dedup();
    agents
}

/// Adds edges until every agent has a flow path to `target`. An agent
/// without one is linked to the lowest-id agent that already has one.
fn route_to(topo: &mut TopologyDesign, target: usize) {
    for i in 0..topo.agent_count() {
        let reach = topo.reaching(&[target]);
        if reach[i] {
            continue;
        }
        let t = reach
            .iter()
            .position(|&r| r)
            .expect("the target always reaches itself");
        *topo = topo.with_edge(i, t).expect("agents are in range");
    }
}

/// Routes to whichever candidate costs the fewest new edges (lowest id on ties).
fn route_to_cheapest(topo: &mut TopologyDesign, candidates: &[usize]) {
    let best = candidates
        .iter()
        .map(|&o| {
            let mut t = topo.clone();
            route_to(&mut t, o);
            t
        })
        .min_by_key(|t| t.edge_count());
    if let Some(best) = best {
        *topo = best;
    }
}

/// State-fusion-only design. Every agent gets a flow path to an observer of
/// each parent SCC; valid only when `A` has full S-rank.
pub fn design_state_fusion_full_srank(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
) -> Result<TopologyDesign> {
    let g = build_digraph(a, cs)?;
    let n = g.state_count();
    let srank = s_rank(a);
    if srank < n {
        return Err(Error::SRankDeficient { srank, n });
    }
    let sccs = scc_decompose(&g);
    let mut topo = TopologyDesign::isolated(cs.len(), FusionMode::StateFusionOnly);
    for k in sccs.parents() {
        let states = &sccs.components[k];
        let obs = observers(&g, states);
        if obs.is_empty() {
            return Err(Error::Placement {
                states: states.clone(),
            });
        }
        route_to_cheapest(&mut topo, &obs);
    }
    ensure_verified(a, cs, topo)
}

/// Output-fusion design: every crucial agent sends its measurements to every
/// other agent.
///
/// A parent SCC not watched by any Alpha or Beta agent (possible when it is
/// covered by several cycles) has its lowest-id observer promoted to crucial.
pub fn design_output_fusion(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    cl: &AgentClassification,
) -> Result<TopologyDesign> {
    let g = observable_digraph(a, cs)?;
    let sccs = scc_decompose(&g);
    let mut crucial = cl.crucial();
    for k in sccs.parents() {
        let obs = observers(&g, &sccs.components[k]);
        if !obs.iter().any(|o| crucial.contains(o)) {
            crucial.push(obs[0]);
        }
    }
    crucial.sort_unstable();
    let agents = cs.len();
    let edges = crucial
        .iter()
        .flat_map(|&u| (0..agents).filter(move |&v| v != u).map(move |v| (u, v)));
    let topo = TopologyDesign::new(agents, edges, FusionMode::OutputFusionOnly)?;
    ensure_verified(a, cs, topo)
}

/// Combined-fusion design.
///
/// Alpha agents broadcast to everyone. Each parent SCC without an Alpha
/// observer gets a flow path from every agent to one of its Beta observers
/// (any observer when there is no Beta one). Redundant edges are then
/// dropped so the result is locally minimal.
pub fn design_main(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    cl: &AgentClassification,
) -> Result<TopologyDesign> {
    let g = observable_digraph(a, cs)?;
    let sccs = scc_decompose(&g);
    let agents = cs.len();
    let alphas = cl.of_type(AgentType::Alpha);
    let broadcast = alphas
        .iter()
        .flat_map(|&u| (0..agents).filter(move |&v| v != u).map(move |v| (u, v)));
    let mut topo = TopologyDesign::new(agents, broadcast, FusionMode::Combined)?;

    for k in sccs.parents() {
        let obs = observers(&g, &sccs.components[k]);
        if obs.iter().any(|o| alphas.contains(o)) {
            continue;
        }
        let betas: Vec<usize> = obs
            .iter()
            .copied()
            .filter(|&o| cl.type_of(o) == AgentType::Beta)
            .collect();
        route_to_cheapest(&mut topo, if betas.is_empty() { &obs } else { &betas });
    }

    let topo = ensure_verified(a, cs, topo)?;
    prune(a, cs, topo)
}

/// Drops edges one at a time (ascending order) while the design still
/// verifies. Removing edges never restores observability, so one pass
/// leaves no removable edge.
pub fn prune(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    mut topo: TopologyDesign,
) -> Result<TopologyDesign> {
    let edges: Vec<(usize, usize)> = topo.flow_edges().iter().copied().collect();
    for (u, v) in edges {
        let candidate = topo.without_edge(u, v);
        if verify_design(a, cs, &candidate)?.observable() {
            topo = candidate;
        }
    }
    Ok(topo)
}

/// Edges whose individual removal keeps the design observable; empty means
/// the design is locally minimal.
pub fn local_minimality_check(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    topo: &TopologyDesign,
) -> Result<Vec<(usize, usize)>> {
    let mut removable = Vec::new();
    for &(u, v) in topo.flow_edges() {
        if verify_design(a, cs, &topo.without_edge(u, v))?.observable() {
            removable.push((u, v));
        }
    }
    Ok(removable)
}

fn ensure_verified(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    topo: TopologyDesign,
) -> Result<TopologyDesign> {
    let r = verify_design(a, cs, &topo)?;
    if r.observable() {
        Ok(topo)
    } else {
        Err(Error::Structural(format!(
            "designed {} topology does not verify (deficiency {}, {} unreachable states)",
            topo.mode,
            r.report.deficiency,
            r.report.condition_i_violations.len()
        )))
    }
}
