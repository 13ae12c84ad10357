//! The distributed pair `(W ⊗ A, D_C)` and its generic observability.

use serde::Serialize;

use super::topology::TopologyDesign;
use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;
use crate::structural::{build_digraph, s_rank, ObservabilityReport};

/// Kronecker product of two patterns: block `(i, j)` is `a` whenever `w_ij != 0`.
pub fn kron_pattern(w: &SparsityPattern, a: &SparsityPattern) -> SparsityPattern {
    let (rows, cols) = (w.rows() * a.rows(), w.cols() * a.cols());
    let mut out = SparsityPattern::empty(rows, cols);
    for (i, j) in w.iter() {
        for (r, c) in a.iter() {
            out.insert(i * a.rows() + r, j * a.cols() + c)
                .expect("kron indices are in bounds");
        }
    }
    out
}

/// Per-agent `n x n` diagonal blocks of the fused measurement pattern.
///
/// With output fusion, block `i` is the union of `C_j^T C_j` over the
/// extended neighbourhood of `i`; without it, only `C_i^T C_i`. Every
/// nonzero of `C_j^T C_j` is treated as a free parameter.
pub fn measurement_blocks(
    cs: &[SparsityPattern],
    n: usize,
    topo: &TopologyDesign,
    output_fusion: bool,
) -> Result<Vec<SparsityPattern>> {
    check_agents(cs, n, topo)?;
    (0..cs.len())
        .map(|i| {
            let sources = if output_fusion {
                topo.neighborhood(i)
            } else {
                vec![i]
            };
            sources
                .iter()
                .try_fold(SparsityPattern::empty(n, n), |acc, &j| acc.union(&cs[j].gram()))
        })
        .collect()
}

/// Block-diagonal `D_C` (or `D̄_C` when `output_fusion` is false).
pub fn build_dc(
    cs: &[SparsityPattern],
    n: usize,
    topo: &TopologyDesign,
    output_fusion: bool,
) -> Result<SparsityPattern> {
    let blocks = measurement_blocks(cs, n, topo, output_fusion)?;
    let size = n * blocks.len();
    let mut dc = SparsityPattern::empty(size, size);
    for (i, b) in blocks.iter().enumerate() {
        for (r, c) in b.iter() {
            dc.insert(i * n + r, i * n + c).expect("block in bounds");
        }
    }
    Ok(dc)
}

/// The `W` actually used: the topology's pattern when estimates are fused,
/// the identity otherwise.
pub fn effective_w(topo: &TopologyDesign) -> SparsityPattern {
    if topo.mode.uses_state_fusion() {
        topo.w_pattern()
    } else {
        SparsityPattern::identity(topo.agent_count())
    }
}

fn check_agents(cs: &[SparsityPattern], n: usize, topo: &TopologyDesign) -> Result<()> {
    if cs.len() != topo.agent_count() {
        return Err(Error::Dimension(format!(
            "{} measurement patterns for {} agents",
            cs.len(),
            topo.agent_count()
        )));
    }
    if let Some((i, c)) = cs.iter().enumerate().find(|(_, c)| c.cols() != n) {
        return Err(Error::Dimension(format!(
            "agent {i} measures {} states, system has {n}",
            c.cols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributedReport {
    pub report: ObservabilityReport,
    /// For every agent, the local states of its subsystem that reach no output.
    pub unreachable_by_agent: Vec<Vec<usize>>,
    /// Agent groups not coupled through `W`, with the S-rank deficiency of
    /// their part of the pair. Only groups with a positive deficiency are listed.
    pub deficient_groups: Vec<(Vec<usize>, usize)>,
}

impl DistributedReport {
    pub fn observable(&self) -> bool {
        self.report.observable
    }
}

/// Generic observability of the distributed pair built from `topo`.
///
/// The topology's own `W` is used unless its mode is
/// [`FusionMode::OutputFusionOnly`](super::FusionMode::OutputFusionOnly); measurements are fused over the
/// neighbourhoods only when `output_fusion` is set.
pub fn verify_distributed(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    topo: &TopologyDesign,
    output_fusion: bool,
) -> Result<DistributedReport> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "A is {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let big_a = kron_pattern(&effective_w(topo), a);
    let blocks = measurement_blocks(cs, n, topo, output_fusion)?;
    let size = n * blocks.len();
    // One output group per agent, holding only the nonzero rows of its block.
    let groups: Vec<SparsityPattern> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let live: Vec<usize> = (0..n).filter(|&r| !b.is_zero_row(r)).collect();
            let entries = live.iter().enumerate().flat_map(|(k, &r)| {
                b.row_support(r).map(move |c| (k, i * n + c)).collect::<Vec<_>>()
            });
            SparsityPattern::new(live.len(), size, entries).expect("block in bounds")
        })
        .collect();
    let g = build_digraph(&big_a, &groups)?;
    let report = crate::structural::report_for(&g);
    let mut unreachable_by_agent = vec![Vec::new(); blocks.len()];
    for &v in &report.condition_i_violations {
        unreachable_by_agent[v / n].push(v % n);
    }
    let deficient_groups = if report.deficiency == 0 {
        Vec::new()
    } else {
        let stacked = big_a
            .vstack(g.output_pattern())
            .expect("digraph patterns share a column count");
        coupled_groups(&effective_w(topo))
            .into_iter()
            .filter_map(|agents| {
                let cols: Vec<usize> = agents.iter().flat_map(|&i| i * n..(i + 1) * n).collect();
                let rows: Vec<usize> = (0..stacked.rows())
                    .filter(|&r| stacked.row_support(r).any(|c| agents.contains(&(c / n))))
                    .collect();
                let deficiency = cols.len() - s_rank(&stacked.submatrix(&rows, &cols));
                (deficiency > 0).then_some((agents, deficiency))
            })
            .collect()
    };
    Ok(DistributedReport {
        report,
        unreachable_by_agent,
        deficient_groups,
    })
}

/// Connected components of `W` with edge directions ignored, each sorted.
fn coupled_groups(w: &SparsityPattern) -> Vec<Vec<usize>> {
    let n = w.rows();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut adj = vec![Vec::new(); n];
    for (r, c) in w.iter() {
        adj[r].push(c);
        adj[c].push(r);
    }
    let mut groups = Vec::new();
    for start in 0..n {
        if label[start].is_some() {
            continue;
        }
        let id = groups.len();
        let mut members = vec![start];
        label[start] = Some(id);
        let mut k = 0;
        while k < members.len() {
            for &v in &adj[members[k]] {
                if label[v].is_none() {
                    label[v] = Some(id);
                    members.push(v);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups
}

/// [`verify_distributed`] with measurement fusion taken from the topology's mode.
pub fn verify_design(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    topo: &TopologyDesign,
) -> Result<DistributedReport> {
    verify_distributed(a, cs, topo, topo.mode.uses_output_fusion())
}

/// Mode-specific pair `(big A, D)` for the topology, as patterns.
pub fn distributed_pair(
    a: &SparsityPattern,
    cs: &[SparsityPattern],
    topo: &TopologyDesign,
) -> Result<(SparsityPattern, SparsityPattern)> {
    let dc = build_dc(cs, a.rows(), topo, topo.mode.uses_output_fusion())?;
    Ok((kron_pattern(&effective_w(topo), a), dc))
}
