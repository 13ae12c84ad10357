//! Structural analysis report with a text rendering (1-based state names)
//! and a JSON twin (0-based indices, like every file format).

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::fusion::{DistributedReport, TopologyDesign};
use crate::io::SystemDescription;
use crate::structural::{
    build_digraph, classify_agents, maximal_cover_of, report_for, s_rank, scc_decompose, AgentType,
    CoverFamily, CycleKind, ObservabilityReport, SccKind,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SccEntry {
    pub states: Vec<usize>,
    pub kind: SccKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleEntry {
    pub states: Vec<usize>,
    pub kind: CycleKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEntry {
    pub states: Vec<usize>,
    pub agent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverEntry {
    pub cycles: Vec<CycleEntry>,
    pub paths: Vec<PathEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub agent_type: AgentType,
    pub crucial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub agent_count: usize,
    pub srank_a: usize,
    pub srank_stack: usize,
    pub sccs: Vec<SccEntry>,
    /// Absent when the system is not generically observable.
    pub cover: Option<CoverEntry>,
    pub agents: Option<Vec<AgentEntry>>,
    pub crucial: Vec<String>,
    pub observability: ObservabilityReport,
}

/// Runs the whole structural pipeline on a system description.
pub fn analyze(desc: &SystemDescription) -> Result<AnalysisReport> {
    let cs = desc.cs();
    let ids = desc.ids();
    let g = build_digraph(&desc.a, &cs)?;
    let observability = report_for(&g);
    let sccs = scc_decompose(&g);
    let scc_entries = sccs
        .components
        .iter()
        .zip(&sccs.kinds)
        .map(|(states, &kind)| SccEntry {
            states: states.clone(),
            kind,
        })
        .collect();

    let (cover, agents, crucial) = if observability.observable {
        let l = maximal_cover_of(&g)?;
        let cl = classify_agents(&l, &g);
        let agents: Vec<AgentEntry> = cl
            .agents
            .iter()
            .map(|r| AgentEntry {
                id: ids[r.agent].clone(),
                agent_type: r.agent_type,
                crucial: r.crucial,
            })
            .collect();
        let crucial = cl.crucial().into_iter().map(|i| ids[i].clone()).collect();
        (Some(cover_entry(&l, &g, &ids)), Some(agents), crucial)
    } else {
        (None, None, Vec::new())
    };

    Ok(AnalysisReport {
        n: desc.n,
        agent_count: ids.len(),
        srank_a: s_rank(&desc.a),
        srank_stack: observability.srank_stack,
        sccs: scc_entries,
        cover,
        agents,
        crucial,
        observability,
    })
}

fn cover_entry(l: &CoverFamily, g: &crate::structural::SystemDigraph, ids: &[String]) -> CoverEntry {
    CoverEntry {
        cycles: l
            .cycles
            .iter()
            .map(|c| CycleEntry {
                states: c.states.clone(),
                kind: c.kind,
            })
            .collect(),
        paths: l
            .ytopped_paths
            .iter()
            .map(|p| PathEntry {
                states: p.states.clone(),
                agent: ids[g.outputs()[p.output].agent].clone(),
            })
            .collect(),
    }
}

fn names(states: &[usize]) -> String {
    states
        .iter()
        .map(|x| (x + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

const MAPPING_NOTE: &str = "states are printed 1-based: state k is index k-1 in files";

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "({MAPPING_NOTE})");
        let _ = writeln!(s, "n = {}, N = {}", self.n, self.agent_count);
        let _ = writeln!(s, "S-rank(A) = {}", self.srank_a);
        let _ = writeln!(s, "S-rank([A;C]) = {}", self.srank_stack);
        let _ = writeln!(s, "SCCs:");
        for scc in &self.sccs {
            let _ = writeln!(s, "  {{{}}} {:?}", names(&scc.states), scc.kind);
        }
        match &self.cover {
            Some(cover) => {
                let _ = writeln!(s, "cover family:");
                for c in &cover.cycles {
                    let _ = writeln!(s, "  cycle ({}) {:?}", names(&c.states), c.kind);
                }
                for p in &cover.paths {
                    let path: Vec<String> = p.states.iter().map(|x| (x + 1).to_string()).collect();
                    let _ = writeln!(s, "  path {}->{}", path.join("->"), p.agent);
                }
            }
            None => {
                let _ = writeln!(s, "cover family: none (system not generically observable)");
            }
        }
        if let Some(agents) = &self.agents {
            let _ = writeln!(s, "agents:");
            for a in agents {
                let mark = if a.crucial { " (crucial)" } else { "" };
                let _ = writeln!(s, "  {}: {:?}{mark}", a.id, a.agent_type);
            }
            let _ = writeln!(s, "crucial = {{{}}}", self.crucial.join(","));
        }
        let o = &self.observability;
        let _ = writeln!(s, "observable = {}", o.observable);
        if !o.observable {
            if !o.condition_i_violations.is_empty() {
                let _ = writeln!(
                    s,
                    "  states reaching no output: {{{}}}",
                    names(&o.condition_i_violations)
                );
            }
            if o.deficiency > 0 {
                let _ = writeln!(s, "  S-rank deficiency of [A;C]: {}", o.deficiency);
            }
        }
        s
    }
}

/// Text for a distributed verification, listing per-agent unreachable states.
pub fn render_verification(r: &DistributedReport, topo: &TopologyDesign, ids: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "({MAPPING_NOTE})");
    let _ = writeln!(s, "mode = {}, flow edges = {}", topo.mode, topo.edge_count());
    let _ = writeln!(
        s,
        "S-rank of distributed pair = {} of {}",
        r.report.srank_stack,
        r.report.srank_stack + r.report.deficiency
    );
    for (i, states) in r.unreachable_by_agent.iter().enumerate() {
        if !states.is_empty() {
            let _ = writeln!(s, "  agent {}: states reaching no output {{{}}}", ids[i], names(states));
        }
    }
    for (agents, deficiency) in &r.deficient_groups {
        let names: Vec<&str> = agents.iter().map(|&i| ids[i].as_str()).collect();
        let _ = writeln!(s, "  agents {{{}}}: S-rank deficiency {deficiency}", names.join(","));
    }
    let _ = writeln!(s, "observable = {}", r.observable());
    s
}

/// Edge list, one `from -> to` per line.
pub fn render_edges(topo: &TopologyDesign, ids: &[String]) -> String {
    let mut s = String::new();
    for &(u, v) in topo.flow_edges() {
        let _ = writeln!(s, "  {} -> {}", ids[u], ids[v]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn testbed_description() -> SystemDescription {
        let tb = crate::testbed::plant();
        SystemDescription {
            n: 7,
            a: tb.a,
            agents: tb
                .names
                .iter()
                .zip(tb.cs)
                .map(|(id, c)| crate::io::AgentSpec { id: id.clone(), c })
                .collect(),
            numeric: None,
        }
    }

    #[test]
    fn testbed_report() {
        let r = analyze(&testbed_description()).unwrap();
        assert_eq!((r.srank_a, r.srank_stack), (6, 7));
        assert_eq!(r.crucial, vec!["a", "b"]);
        let text = r.render_text();
        assert!(text.contains("{4,5,6} Parent"));
        assert!(text.contains("path 3->a"));
        assert!(text.contains("a: Alpha (crucial)"));
        assert!(text.contains("c: Gamma\n"));
        assert!(text.contains("observable = true"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["srank_a"], 6);
        assert_eq!(json["agents"][1]["type"], "Beta");
    }

    #[test]
    fn unobservable_report_still_renders() {
        let mut d = testbed_description();
        d.agents.remove(0);
        let r = analyze(&d).unwrap();
        assert!(!r.observability.observable);
        assert!(r.cover.is_none());
        assert!(r.render_text().contains("observable = false"));
    }
}
