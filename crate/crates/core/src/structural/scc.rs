//! Strongly connected components of the state subgraph, labeled parent or child.

use std::collections::BTreeSet;

use serde::Serialize;

use super::digraph::SystemDigraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SccKind {
    /// No edge leaves the component towards another state.
    Parent,
    Child,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SccDecomposition {
    /// Components ordered by their smallest state; states ascending inside each.
    pub components: Vec<Vec<usize>>,
    pub kinds: Vec<SccKind>,
    /// `(from, to)` component pairs joined by at least one state edge.
    pub condensation_edges: BTreeSet<(usize, usize)>,
    pub component_of: Vec<usize>,
}

impl SccDecomposition {
    pub fn parents(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.components.len()).filter(|&k| self.kinds[k] == SccKind::Parent)
    }

    pub fn is_parent(&self, k: usize) -> bool {
        self.kinds[k] == SccKind::Parent
    }
}

/// Tarjan's algorithm on a successor-list graph, without recursion.
///
/// Returns components in reverse topological order of the condensation.
pub fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    // (vertex, next successor position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if top.1 < succ[v].len() {
                let w = succ[v][top.1];
                top.1 += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

/// Maximal SCCs of the state vertices, each labeled parent or child.
pub fn scc_decompose(g: &SystemDigraph) -> SccDecomposition {
    let n = g.state_count();
    let succ: Vec<Vec<usize>> = (0..n).map(|x| g.successors(x).to_vec()).collect();
    let mut components = tarjan(&succ);
    for comp in components.iter_mut() {
        comp.sort_unstable();
    }
    components.sort_by_key(|c| c[0]);

    let mut component_of = vec![0; n];
    for (k, comp) in components.iter().enumerate() {
        for &x in comp {
            component_of[x] = k;
        }
    }
    let mut condensation_edges = BTreeSet::new();
    for (from, to) in g.state_edges() {
        let (cf, ct) = (component_of[from], component_of[to]);
        if cf != ct {
            condensation_edges.insert((cf, ct));
        }
    }
    let mut kinds = vec![SccKind::Parent; components.len()];
    for &(f, _) in &condensation_edges {
        kinds[f] = SccKind::Child;
    }

    SccDecomposition {
        components,
        kinds,
        condensation_edges,
        component_of,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::SparsityPattern;
    use crate::structural::build_digraph;
    use crate::testbed;

    fn decompose(a: &SparsityPattern) -> SccDecomposition {
        scc_decompose(&build_digraph(a, &[]).unwrap())
    }

    #[test]
    fn testbed_components() {
        let tb = testbed::plant();
        let d = scc_decompose(&build_digraph(&tb.a, &tb.cs).unwrap());
        assert_eq!(d.components, vec![vec![0, 1], vec![2], vec![3, 4, 5], vec![6]]);
        assert_eq!(
            d.kinds,
            vec![SccKind::Child, SccKind::Child, SccKind::Parent, SccKind::Child]
        );
    }

    #[test]
    fn self_loops_only() {
        let d = decompose(&SparsityPattern::identity(3));
        assert_eq!(d.components.len(), 3);
        assert!(d.kinds.iter().all(|&k| k == SccKind::Parent));
    }

    #[test]
    fn chain() {
        // x1 -> x2 -> x3
        let a = SparsityPattern::new(3, 3, [(1, 0), (2, 1)]).unwrap();
        let d = decompose(&a);
        assert_eq!(d.components, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(d.kinds, vec![SccKind::Child, SccKind::Child, SccKind::Parent]);
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let n = 200_000;
        let a = SparsityPattern::new(n, n, (1..n).map(|i| (i, i - 1))).unwrap();
        let d = decompose(&a);
        assert_eq!(d.components.len(), n);
        assert_eq!(d.parents().collect::<Vec<_>>(), vec![n - 1]);
    }
}
