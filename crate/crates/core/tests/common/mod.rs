//! Random system generators and brute-force oracles shared by the
//! integration tests. Nothing here calls the crate's own matching or cover code.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strucnet::SparsityPattern;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Square pattern with each entry present with probability `density`.
pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SparsityPattern {
    let entries: Vec<(usize, usize)> = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter(|_| rng.random_bool(density))
        .collect();
    SparsityPattern::new(n, n, entries).unwrap()
}

/// Every agent gets one output row measuring one random state.
pub fn random_outputs(rng: &mut ChaCha8Rng, n: usize, agents: usize) -> Vec<SparsityPattern> {
    (0..agents)
        .map(|_| SparsityPattern::new(1, n, [(0, rng.random_range(0..n))]).unwrap())
        .collect()
}

pub struct RandomSystem {
    pub a: SparsityPattern,
    pub cs: Vec<SparsityPattern>,
}

pub fn random_system(rng: &mut ChaCha8Rng, n_max: usize, agents_max: usize) -> RandomSystem {
    let n = rng.random_range(2..=n_max);
    let agents = rng.random_range(1..=agents_max);
    let density = rng.random_range(0.15..0.45);
    RandomSystem {
        a: random_pattern(rng, n, density),
        cs: random_outputs(rng, n, agents),
    }
}

/// Draws systems until `accept` holds.
pub fn random_system_where(
    rng: &mut ChaCha8Rng,
    n_max: usize,
    agents_max: usize,
    accept: impl Fn(&RandomSystem) -> bool,
) -> RandomSystem {
    loop {
        let s = random_system(rng, n_max, agents_max);
        if accept(&s) {
            return s;
        }
    }
}

pub fn stack(cs: &[SparsityPattern], n: usize) -> SparsityPattern {
    let mut entries = Vec::new();
    let mut row = 0;
    for c in cs {
        for (r, k) in c.iter() {
            entries.push((row + r, k));
        }
        row += c.rows();
    }
    SparsityPattern::new(row, n, entries).unwrap()
}

/// Kuhn's augmenting-path matching: `adj[l]` lists the right vertices of left `l`.
pub fn kuhn_matching(adj: &[Vec<usize>], right: usize) -> usize {
    fn augment(l: usize, adj: &[Vec<usize>], seen: &mut [bool], mate: &mut [Option<usize>]) -> bool {
        for &r in &adj[l] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if mate[r].is_none_or(|other| augment(other, adj, seen, mate)) {
                mate[r] = Some(l);
                return true;
            }
        }
        false
    }
    let mut mate = vec![None; right];
    (0..adj.len())
        .filter(|&l| augment(l, adj, &mut vec![false; right], &mut mate))
        .count()
}

/// Structural rank by Kuhn's algorithm.
pub fn srank_oracle(p: &SparsityPattern) -> usize {
    let mut adj = vec![Vec::new(); p.rows()];
    for (r, c) in p.iter() {
        adj[r].push(c);
    }
    kuhn_matching(&adj, p.cols())
}

/// States reaching some output, by fixed-point iteration.
pub fn reaches_output(a: &SparsityPattern, c: &SparsityPattern) -> Vec<bool> {
    let n = a.rows();
    let mut reach: Vec<bool> = (0..n).map(|x| (0..c.rows()).any(|r| c.contains(r, x))).collect();
    loop {
        let mut changed = false;
        for (i, j) in a.iter() {
            // x_j feeds x_i
            if reach[i] && !reach[j] {
                reach[j] = true;
                changed = true;
            }
        }
        if !changed {
            return reach;
        }
    }
}

/// Generic observability from the two graph conditions, computed independently.
pub fn observable_oracle(a: &SparsityPattern, c: &SparsityPattern) -> bool {
    let n = a.rows();
    if !reaches_output(a, c).iter().all(|&r| r) {
        return false;
    }
    let mut entries: Vec<(usize, usize)> = a.iter().collect();
    entries.extend(c.iter().map(|(r, k)| (n + r, k)));
    srank_oracle(&SparsityPattern::new(n + c.rows(), n, entries).unwrap()) == n
}

/// Largest number of states covered by disjoint cycles such that the other
/// states are covered by disjoint output-terminated paths. Exhaustive over
/// the cycle-state subset; `None` when no such cover exists.
///
/// Each state picks a distinct successor: a state for cycle states, a state
/// or an output row for path states. Successor assignments of the path part
/// that contain cycles can be moved into the cycle part, so the maximum over
/// this relaxation is the maximum over genuine covers.
pub fn max_cycle_states_oracle(a: &SparsityPattern, c: &SparsityPattern) -> Option<usize> {
    let n = a.rows();
    assert!(n <= 12, "exhaustive oracle");
    let succ: Vec<Vec<usize>> = (0..n).map(|j| (0..n).filter(|&i| a.contains(i, j)).collect()).collect();
    let outs: Vec<Vec<usize>> = (0..n).map(|j| (0..c.rows()).filter(|&r| c.contains(r, j)).collect()).collect();
    let mut best = None;
    for mask in 0u32..(1 << n) {
        let count = mask.count_ones() as usize;
        if best.is_some_and(|b| b >= count) {
            continue;
        }
        let inside = |x: usize| mask & (1 << x) != 0;
        let cycle_adj: Vec<Vec<usize>> = (0..n)
            .filter(|&x| inside(x))
            .map(|x| succ[x].iter().copied().filter(|&y| inside(y)).collect())
            .collect();
        if kuhn_matching(&cycle_adj, n) != count {
            continue;
        }
        let path_adj: Vec<Vec<usize>> = (0..n)
            .filter(|&x| !inside(x))
            .map(|x| {
                let mut v: Vec<usize> = succ[x].iter().copied().filter(|&y| !inside(y)).collect();
                v.extend(outs[x].iter().map(|&r| n + r));
                v
            })
            .collect();
        if kuhn_matching(&path_adj, n + c.rows()) == n - count {
            best = Some(count);
        }
    }
    best
}

/// Spectral radius from the eigenvalues.
pub fn rho_oracle(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Dense observability matrix rank through the SVD.
pub fn dense_observability_rank(a: &nalgebra::DMatrix<f64>, c: &nalgebra::DMatrix<f64>) -> usize {
    let n = a.nrows();
    let m = c.nrows();
    let mut o = nalgebra::DMatrix::zeros(m * n, n);
    let mut block = c.clone();
    for k in 0..n {
        o.rows_mut(k * m, m).copy_from(&block);
        block = &block * a;
    }
    let sv = o.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-9 * top.max(1.0)).count()
}
