//! The system digraph: state vertices, output vertices and the edges induced by A and C.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;

/// An output vertex together with the agent that owns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OutputVertex {
    pub agent: usize,
    /// Row of this output inside its agent's measurement pattern.
    pub local_row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDigraph {
    a: SparsityPattern,
    c: SparsityPattern,
    outputs: Vec<OutputVertex>,
    agent_count: usize,
    state_succ: Vec<Vec<usize>>,
    state_pred: Vec<Vec<usize>>,
    output_pred: Vec<Vec<usize>>,
    measured_by: Vec<Vec<usize>>,
}

/// Builds the digraph of `(A, [C_1; ...; C_N])`.
///
/// `x_j -> x_i` for every `a_ij != 0` and `x_j -> y_r` for every nonzero
/// `(r, j)` of the stacked output pattern.
pub fn build_digraph(a: &SparsityPattern, cs: &[SparsityPattern]) -> Result<SystemDigraph> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "system pattern is {}x{}, expected square",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    for (i, c) in cs.iter().enumerate() {
        if c.cols() != n {
            return Err(Error::Dimension(format!(
                "measurement pattern of agent {i} has {} columns, expected {n}",
                c.cols()
            )));
        }
    }
    let outputs: Vec<OutputVertex> = cs
        .iter()
        .enumerate()
        .flat_map(|(agent, c)| (0..c.rows()).map(move |local_row| OutputVertex { agent, local_row }))
        .collect();
    let c = SparsityPattern::vstack_all(n, cs)?;

    let mut state_succ = vec![Vec::new(); n];
    let mut state_pred = vec![Vec::new(); n];
    for (i, j) in a.iter() {
        state_succ[j].push(i);
        state_pred[i].push(j);
    }
    let mut output_pred = vec![Vec::new(); c.rows()];
    let mut measured_by = vec![Vec::new(); n];
    for (r, j) in c.iter() {
        output_pred[r].push(j);
        measured_by[j].push(r);
    }
    for list in state_succ.iter_mut().chain(state_pred.iter_mut()) {
        list.sort_unstable();
    }

    Ok(SystemDigraph {
        a: a.clone(),
        c,
        outputs,
        agent_count: cs.len(),
        state_succ,
        state_pred,
        output_pred,
        measured_by,
    })
}

impl SystemDigraph {
    pub fn state_count(&self) -> usize {
        self.a.rows()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn outputs(&self) -> &[OutputVertex] {
        &self.outputs
    }

    pub fn system_pattern(&self) -> &SparsityPattern {
        &self.a
    }

    /// The stacked output pattern (one row per output vertex).
    pub fn output_pattern(&self) -> &SparsityPattern {
        &self.c
    }

    /// States reached from `x` by one edge of E_A.
    pub fn successors(&self, x: usize) -> &[usize] {
        &self.state_succ[x]
    }

    pub fn predecessors(&self, x: usize) -> &[usize] {
        &self.state_pred[x]
    }

    /// Output vertices (global rows) fed by state `x`.
    pub fn measuring_outputs(&self, x: usize) -> &[usize] {
        &self.measured_by[x]
    }

    /// States feeding output vertex `r`.
    pub fn output_sources(&self, r: usize) -> &[usize] {
        &self.output_pred[r]
    }

    pub fn state_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.a.iter().map(|(i, j)| (j, i))
    }

    /// `(state, output)` pairs of E_C.
    pub fn output_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.c.iter().map(|(r, j)| (j, r))
    }

    /// States measured by `agent`.
    pub fn states_measured_by(&self, agent: usize) -> Vec<usize> {
        let mut states: Vec<usize> = self
            .outputs
            .iter()
            .enumerate()
            .filter(|(_, o)| o.agent == agent)
            .flat_map(|(r, _)| self.output_pred[r].iter().copied())
            .collect();
        states.sort_unstable();
        states.dedup();
        states
    }
}
