//! Disjoint cycle / Y-topped path covers of the state vertices.
//!
//! A column-saturating matching of `[A; C]` assigns every state one successor
//! (a state or an output) with no row used twice; its functional graph splits
//! into vertex-disjoint cycles and paths ending at outputs. Among all such
//! covers we return one with the largest number of cycle-covered states.
//!
//! Search: the path-covered set `T` is enumerated by increasing size. A set is
//! feasible when `A[X \ T]` has a perfect matching (a cycle cover) and `T`
//! has a column-saturating matching into `T ∪ Y` using only edges inside `T`.
//! The first feasible size is optimal. States outside any cyclic SCC are
//! forced into `T`, and `n - srank(A[cyclic])` bounds `|T|` from below.

use serde::Serialize;

use super::digraph::{build_digraph, SystemDigraph};
use super::matching::{maximum_matching, s_rank};
use super::observability::report_for;
use super::scc::scc_decompose;
use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CycleKind {
    /// No state edge leaves the cycle.
    ParentCycle,
    ChildCycle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverCycle {
    /// Traversal order, starting at the smallest state.
    pub states: Vec<usize>,
    pub kind: CycleKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YToppedPath {
    /// Begin-vertex first; the last state feeds `output`.
    pub states: Vec<usize>,
    /// Global output row (index into the stacked output pattern).
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverFamily {
    pub cycles: Vec<CoverCycle>,
    pub ytopped_paths: Vec<YToppedPath>,
}

impl CoverFamily {
    pub fn cycle_state_count(&self) -> usize {
        self.cycles.iter().map(|c| c.states.len()).sum()
    }

    /// Checks edges, disjointness, full coverage and cycle labels against `g`.
    pub fn is_valid_for(&self, g: &SystemDigraph) -> bool {
        let n = g.state_count();
        let mut seen = vec![false; n];
        let mut outputs_used = vec![false; g.output_count()];
        let a = g.system_pattern();
        let c = g.output_pattern();
        let mark = |x: usize, seen: &mut Vec<bool>| -> bool {
            if x >= n || seen[x] {
                return false;
            }
            seen[x] = true;
            true
        };
        for cycle in &self.cycles {
            if cycle.states.is_empty() {
                return false;
            }
            for (k, &x) in cycle.states.iter().enumerate() {
                let next = cycle.states[(k + 1) % cycle.states.len()];
                if !mark(x, &mut seen) || !a.contains(next, x) {
                    return false;
                }
            }
            let leaves = cycle
                .states
                .iter()
                .any(|&x| g.successors(x).iter().any(|s| !cycle.states.contains(s)));
            let expected = if leaves {
                CycleKind::ChildCycle
            } else {
                CycleKind::ParentCycle
            };
            if cycle.kind != expected {
                return false;
            }
        }
        for path in &self.ytopped_paths {
            let Some(&last) = path.states.last() else {
                return false;
            };
            for w in path.states.windows(2) {
                if !a.contains(w[1], w[0]) {
                    return false;
                }
            }
            for &x in &path.states {
                if !mark(x, &mut seen) {
                    return false;
                }
            }
            if path.output >= outputs_used.len()
                || outputs_used[path.output]
                || !c.contains(path.output, last)
            {
                return false;
            }
            outputs_used[path.output] = true;
        }
        seen.iter().all(|&s| s)
    }
}

/// A cover of all states with the maximum number of cycle-covered states.
pub fn maximal_cover(a: &SparsityPattern, c: &SparsityPattern) -> Result<CoverFamily> {
    let g = build_digraph(a, std::slice::from_ref(c))?;
    maximal_cover_of(&g)
}

/// [`maximal_cover`] on an already built digraph (output rows stay global).
pub fn maximal_cover_of(g: &SystemDigraph) -> Result<CoverFamily> {
    let report = report_for(g);
    if !report.observable {
        return Err(Error::NotObservable(format!(
            "unreachable states {:?}, [A; C] S-rank deficiency {}",
            report.condition_i_violations, report.deficiency
        )));
    }
    let n = g.state_count();
    let a = g.system_pattern();
    let sccs = scc_decompose(g);
    let cyclic: Vec<bool> = {
        let mut v = vec![false; n];
        for comp in &sccs.components {
            let has_cycle = comp.len() > 1 || a.contains(comp[0], comp[0]);
            for &x in comp {
                v[x] = has_cycle;
            }
        }
        v
    };
    let candidates: Vec<usize> = (0..n).filter(|&x| cyclic[x]).collect();
    let forced: Vec<usize> = (0..n).filter(|&x| !cyclic[x]).collect();
    let lower = n - s_rank(&a.submatrix(&candidates, &candidates));

    let mut in_t = vec![false; n];
    for k in lower.max(forced.len())..=n {
        let extra = k - forced.len();
        let mut combo: Vec<usize> = (0..extra).collect();
        loop {
            in_t.iter_mut().for_each(|b| *b = false);
            for &x in &forced {
                in_t[x] = true;
            }
            for &i in &combo {
                in_t[candidates[i]] = true;
            }
            if let Some(cover) = try_split(g, &in_t) {
                return Ok(cover);
            }
            if !next_combination(&mut combo, candidates.len()) {
                break;
            }
        }
    }
    unreachable!("an observable system always admits a cover with every state on a path")
}

/// Advances `combo` (strictly increasing indices below `m`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], m: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < m - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Tries to cover `X \ T` by cycles and `T` by Y-topped paths.
fn try_split(g: &SystemDigraph, in_t: &[bool]) -> Option<CoverFamily> {
    let n = g.state_count();
    let cycle_states: Vec<usize> = (0..n).filter(|&x| !in_t[x]).collect();
    let path_states: Vec<usize> = (0..n).filter(|&x| in_t[x]).collect();

    // Cycle part: perfect matching of A restricted to S (column u -> row v means u -> v).
    let mut pos = vec![usize::MAX; n];
    for (k, &x) in cycle_states.iter().enumerate() {
        pos[x] = k;
    }
    let adj: Vec<Vec<usize>> = cycle_states
        .iter()
        .map(|&u| {
            g.successors(u)
                .iter()
                .filter(|&&v| !in_t[v])
                .map(|&v| pos[v])
                .collect()
        })
        .collect();
    let m = maximum_matching(cycle_states.len(), &adj);
    if !m.saturates_left() {
        return None;
    }
    let mut succ = vec![Successor::None; n];
    for (k, &u) in cycle_states.iter().enumerate() {
        succ[u] = Successor::State(cycle_states[m.left_to_right[k].expect("saturated")]);
    }

    // Path part: rows are T states followed by the output vertices.
    let mut tpos = vec![usize::MAX; n];
    for (k, &x) in path_states.iter().enumerate() {
        tpos[x] = k;
    }
    let t = path_states.len();
    let adj: Vec<Vec<usize>> = path_states
        .iter()
        .map(|&u| {
            let mut rows: Vec<usize> = g
                .successors(u)
                .iter()
                .filter(|&&v| in_t[v])
                .map(|&v| tpos[v])
                .collect();
            rows.extend(g.measuring_outputs(u).iter().map(|&r| t + r));
            rows
        })
        .collect();
    let m = maximum_matching(t + g.output_count(), &adj);
    if !m.saturates_left() {
        return None;
    }
    for (k, &u) in path_states.iter().enumerate() {
        let row = m.left_to_right[k].expect("saturated");
        succ[u] = if row < t {
            Successor::State(path_states[row])
        } else {
            Successor::Output(row - t)
        };
    }
    Some(assemble(g, &succ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Successor {
    None,
    State(usize),
    Output(usize),
}

/// Splits a functional successor map into cycles and Y-topped paths.
fn assemble(g: &SystemDigraph, succ: &[Successor]) -> CoverFamily {
    let n = succ.len();
    let mut has_pred = vec![false; n];
    for s in succ {
        if let Successor::State(v) = *s {
            has_pred[v] = true;
        }
    }
    let mut visited = vec![false; n];
    let mut ytopped_paths = Vec::new();
    for start in (0..n).filter(|&x| !has_pred[x]) {
        let mut states = vec![start];
        visited[start] = true;
        let mut cur = start;
        let output = loop {
            match succ[cur] {
                Successor::State(v) => {
                    visited[v] = true;
                    states.push(v);
                    cur = v;
                }
                Successor::Output(r) => break r,
                Successor::None => unreachable!("every state has a successor"),
            }
        };
        ytopped_paths.push(YToppedPath { states, output });
    }
    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut states = Vec::new();
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            states.push(cur);
            cur = match succ[cur] {
                Successor::State(v) => v,
                _ => unreachable!("states with a predecessor and no path origin lie on cycles"),
            };
        }
        let leaves = states
            .iter()
            .any(|&x| g.successors(x).iter().any(|s| !states.contains(s)));
        cycles.push(CoverCycle {
            states,
            kind: if leaves {
                CycleKind::ChildCycle
            } else {
                CycleKind::ParentCycle
            },
        });
    }
    ytopped_paths.sort_by_key(|p| p.states[0]);
    CoverFamily {
        cycles,
        ytopped_paths,
    }
}
