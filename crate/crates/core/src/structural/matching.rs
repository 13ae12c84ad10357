//! Maximum bipartite matching (Hopcroft–Karp) and structural rank.

use std::collections::VecDeque;

use crate::pattern::SparsityPattern;

const NIL: usize = usize::MAX;

/// A matching between left vertices (pattern columns) and right vertices (pattern rows).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left_to_right.iter().filter(|m| m.is_some()).count()
    }

    pub fn saturates_left(&self) -> bool {
        self.left_to_right.iter().all(Option::is_some)
    }
}

/// Hopcroft–Karp on a bipartite graph given as left-vertex adjacency lists.
///
/// Neighbours are explored in list order, so sorted lists give a
/// deterministic result.
pub fn maximum_matching(right_count: usize, adj: &[Vec<usize>]) -> Matching {
    let left_count = adj.len();
    let mut mate_l = vec![NIL; left_count];
    let mut mate_r = vec![NIL; right_count];
    let mut dist = vec![0usize; left_count];
    let mut cursor = vec![0usize; left_count];

    loop {
        // Layered BFS from free left vertices.
        let mut queue = VecDeque::new();
        for u in 0..left_count {
            if mate_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = mate_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }

        // Vertex-disjoint augmenting paths along the layers, iterative DFS.
        cursor.iter_mut().for_each(|c| *c = 0);
        for root in 0..left_count {
            if mate_l[root] != NIL {
                continue;
            }
            let mut stack = vec![root];
            let mut augmented = false;
            while let Some(&u) = stack.last() {
                if cursor[u] >= adj[u].len() {
                    dist[u] = usize::MAX;
                    stack.pop();
                    continue;
                }
                let v = adj[u][cursor[u]];
                let w = mate_r[v];
                if w == NIL {
                    // Flip the path held on the stack.
                    for &x in stack.iter().rev() {
                        let y = adj[x][cursor[x]];
                        mate_l[x] = y;
                        mate_r[y] = x;
                    }
                    augmented = true;
                    break;
                }
                if dist[w] != usize::MAX && dist[w] == dist[u] + 1 {
                    stack.push(w);
                } else {
                    cursor[u] += 1;
                }
            }
            if augmented {
                // Keep this phase's augmenting paths vertex-disjoint.
                for &x in &stack {
                    dist[x] = usize::MAX;
                }
            }
        }
    }

    Matching {
        left_to_right: mate_l.into_iter().map(|v| (v != NIL).then_some(v)).collect(),
        right_to_left: mate_r.into_iter().map(|u| (u != NIL).then_some(u)).collect(),
    }
}

/// Column-to-row maximum matching of a pattern.
pub fn pattern_matching(p: &SparsityPattern) -> Matching {
    maximum_matching(p.rows(), &p.column_lists())
}

/// Generic rank of a pattern: the size of a maximum row/column matching.
pub fn s_rank(p: &SparsityPattern) -> usize {
    pattern_matching(p).size()
}
