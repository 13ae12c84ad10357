use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;

/// Which parts of the estimator exchange data over the topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionMode {
    /// Neighbours' estimates are fused, measurements stay local: `(W ⊗ A, D̄_C)`.
    #[serde(rename = "state-fusion")]
    StateFusionOnly,
    /// Measurements are shared, estimates are not: `(I ⊗ A, D_C)`.
    #[serde(rename = "output-fusion")]
    OutputFusionOnly,
    /// Both: `(W ⊗ A, D_C)`.
    Combined,
}

impl FusionMode {
    pub fn uses_state_fusion(self) -> bool {
        !matches!(self, FusionMode::OutputFusionOnly)
    }

    pub fn uses_output_fusion(self) -> bool {
        !matches!(self, FusionMode::StateFusionOnly)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FusionMode::StateFusionOnly => "state-fusion",
            FusionMode::OutputFusionOnly => "output-fusion",
            FusionMode::Combined => "combined",
        }
    }
}

impl fmt::Display for FusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state-fusion" => Ok(FusionMode::StateFusionOnly),
            "output-fusion" => Ok(FusionMode::OutputFusionOnly),
            "combined" => Ok(FusionMode::Combined),
            other => Err(Error::parse(
                "mode",
                format!("unknown mode {other:?} (expected state-fusion, output-fusion or combined)"),
            )),
        }
    }
}

/// A directed agent communication graph.
///
/// A flow edge `(u, v)` means agent `v` receives from agent `u`: `u` belongs
/// to `v`'s extended neighbourhood and `w_vu != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyDesign {
    agent_count: usize,
    flow_edges: BTreeSet<(usize, usize)>,
    pub mode: FusionMode,
}

impl TopologyDesign {
    pub fn new(
        agent_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        mode: FusionMode,
    ) -> Result<Self> {
        let mut flow_edges = BTreeSet::new();
        for (u, v) in edges {
            if u >= agent_count || v >= agent_count {
                return Err(Error::Dimension(format!(
                    "flow edge ({u}, {v}) with only {agent_count} agents"
                )));
            }
            if u == v {
                return Err(Error::Dimension(format!(
                    "self edge on agent {u}; the diagonal is implied"
                )));
            }
            flow_edges.insert((u, v));
        }
        Ok(Self {
            agent_count,
            flow_edges,
            mode,
        })
    }

    /// No communication at all.
    pub fn isolated(agent_count: usize, mode: FusionMode) -> Self {
        Self {
            agent_count,
            flow_edges: BTreeSet::new(),
            mode,
        }
    }

    pub fn complete(agent_count: usize, mode: FusionMode) -> Self {
        let flow_edges = (0..agent_count)
            .flat_map(|u| (0..agent_count).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        Self {
            agent_count,
            flow_edges,
            mode,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn flow_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.flow_edges
    }

    pub fn edge_count(&self) -> usize {
        self.flow_edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.flow_edges.contains(&(u, v))
    }

    pub fn without_edge(&self, u: usize, v: usize) -> Self {
        let mut t = self.clone();
        t.flow_edges.remove(&(u, v));
        t
    }

    pub fn with_edge(&self, u: usize, v: usize) -> Result<Self> {
        Self::new(
            self.agent_count,
            self.flow_edges.iter().copied().chain([(u, v)]),
            self.mode,
        )
    }

    pub fn with_mode(&self, mode: FusionMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    /// `W` pattern: full diagonal plus `(v, u)` for every flow edge `u -> v`.
    pub fn w_pattern(&self) -> SparsityPattern {
        let mut w = SparsityPattern::identity(self.agent_count);
        for &(u, v) in &self.flow_edges {
            w.insert(v, u).expect("edges are in bounds");
        }
        w
    }

    /// Extended neighbourhood of `v`: itself plus every agent it receives from.
    pub fn neighborhood(&self, v: usize) -> Vec<usize> {
        let mut d: Vec<usize> = self
            .flow_edges
            .iter()
            .filter(|&&(_, to)| to == v)
            .map(|&(from, _)| from)
            .chain([v])
            .collect();
        d.sort_unstable();
        d
    }

    /// Agents with a directed flow path into some agent of `targets`
    /// (targets included).
    pub fn reaching(&self, targets: &[usize]) -> Vec<bool> {
        let mut reach = vec![false; self.agent_count];
        let mut queue: VecDeque<usize> = targets.iter().copied().collect();
        for &t in targets {
            reach[t] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &(u, to) in &self.flow_edges {
                if to == v && !reach[u] {
                    reach[u] = true;
                    queue.push_back(u);
                }
            }
        }
        reach
    }
}
