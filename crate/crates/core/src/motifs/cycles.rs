//! Minimum cycle basis (Horton candidates + GF(2) elimination) and an
//! exhaustive simple-cycle enumerator for small graphs.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::graph::{Edge, Graph};

/// Closed simple node sequence; consecutive nodes and the last/first pair
/// are edges. Canonical form starts at the smallest node and continues
/// toward its smaller cycle neighbor.
pub type Cycle = Vec<usize>;

pub fn canonical_cycle(seq: &[usize]) -> Cycle {
    let n = seq.len();
    if n == 0 {
        return Vec::new();
    }
    let start = (0..n).min_by_key(|&i| seq[i]).unwrap();
    let fwd: Vec<usize> = (0..n).map(|k| seq[(start + k) % n]).collect();
    let bwd: Vec<usize> = (0..n).map(|k| seq[(start + n - k) % n]).collect();
    if n > 2 && bwd[1] < fwd[1] {
        bwd
    } else {
        fwd
    }
}

pub fn cycle_edges(c: &[usize]) -> Vec<Edge> {
    let n = c.len();
    let mut out: Vec<Edge> = (0..n).map(|i| Edge::new(c[i], c[(i + 1) % n])).collect();
    out.sort_unstable();
    out
}

fn sort_cycles(cycles: &mut [Cycle]) {
    cycles.sort_by(|a, b| {
        (a[0], a.len(), a.as_slice()).cmp(&(b[0], b.len(), b.as_slice()))
    });
}

/// Bridges of `g`, i.e. the edges lying on no cycle.
pub fn bridges(g: &Graph) -> BTreeSet<Edge> {
    let n = g.node_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut out = BTreeSet::new();
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (node, parent, next neighbor position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&(x, parent, pos)) = stack.last() {
            let nbrs = g.neighbors(x);
            if pos < nbrs.len() {
                let y = nbrs[pos];
                stack.last_mut().unwrap().2 += 1;
                if y == parent {
                    continue;
                }
                if disc[y] == usize::MAX {
                    disc[y] = time;
                    low[y] = time;
                    time += 1;
                    stack.push((y, x, 0));
                } else {
                    low[x] = low[x].min(disc[y]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[x]);
                    if low[x] > disc[parent] {
                        out.insert(Edge::new(x, parent));
                    }
                }
            }
        }
    }
    out
}

/// Vector space over GF(2) kept in echelon form keyed by lowest set bit.
struct Gf2Basis {
    pivots: Vec<Option<Vec<u64>>>,
    rank: usize,
}

impl Gf2Basis {
    fn new(bits: usize) -> Self {
        Gf2Basis {
            pivots: vec![None; bits],
            rank: 0,
        }
    }

    /// Inserts `v` if it is independent of the current span.
    fn insert(&mut self, mut v: Vec<u64>) -> bool {
        let mut word = 0;
        while word < v.len() {
            if v[word] == 0 {
                word += 1;
                continue;
            }
            let bit = word * 64 + v[word].trailing_zeros() as usize;
            match &self.pivots[bit] {
                Some(p) => {
                    for (a, b) in v[word..].iter_mut().zip(&p[word..]) {
                        *a ^= b;
                    }
                }
                None => {
                    self.pivots[bit] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }
}

/// Minimum cycle basis of every connected component, sorted by
/// `(smallest node, length, sequence)`.
pub fn find_cycles(g: &Graph) -> Vec<Cycle> {
    let bridge_set = bridges(g);
    let mut cycles = Vec::new();
    // Cycles live entirely inside 2-edge-connected blocks: drop bridges and
    // solve each remaining component separately.
    let core_edges: Vec<Edge> = g.edges().iter().filter(|e| !bridge_set.contains(e)).copied().collect();
    if core_edges.is_empty() {
        return cycles;
    }
    let mut adjacency = vec![Vec::new(); g.node_count()];
    for e in &core_edges {
        adjacency[e.u].push(e.v);
        adjacency[e.v].push(e.u);
    }
    let mut seen = vec![false; g.node_count()];
    for s in 0..g.node_count() {
        if seen[s] || adjacency[s].is_empty() {
            continue;
        }
        let mut nodes = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < nodes.len() {
            let x = nodes[i];
            i += 1;
            for &y in &adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    nodes.push(y);
                }
            }
        }
        nodes.sort_unstable();
        cycles.extend(component_basis(&nodes, &adjacency));
    }
    sort_cycles(&mut cycles);
    cycles
}

/// Horton's algorithm on one 2-edge-connected component.
fn component_basis(nodes: &[usize], adjacency: &[Vec<usize>]) -> Vec<Cycle> {
    let n = nodes.len();
    let local = |p: usize| nodes.binary_search(&p).unwrap();
    let nbrs: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&p| {
            let mut v: Vec<usize> = adjacency[p].iter().map(|&q| local(q)).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (x, ns) in nbrs.iter().enumerate() {
        for &y in ns {
            if x < y {
                edges.push((x, y));
            }
        }
    }
    let target = edges.len() + 1 - n;
    if target == 0 {
        return Vec::new();
    }
    let edge_index = |a: usize, b: usize| -> usize {
        let key = (a.min(b), a.max(b));
        edges.binary_search(&key).unwrap()
    };

    // BFS tree from every root (lowest-index parent first).
    const NONE: u32 = u32::MAX;
    let mut dist = vec![NONE; n * n];
    let mut parent = vec![NONE; n * n];
    let mut queue = VecDeque::new();
    for r in 0..n {
        let d = &mut dist[r * n..(r + 1) * n];
        let p = &mut parent[r * n..(r + 1) * n];
        d[r] = 0;
        queue.push_back(r);
        while let Some(x) = queue.pop_front() {
            for &y in &nbrs[x] {
                if d[y] == NONE {
                    d[y] = d[x] + 1;
                    p[y] = x as u32;
                    queue.push_back(y);
                }
            }
        }
    }

    // Horton candidates: root r, edge (x, y), tree paths r→x and r→y meeting
    // only at r.
    let mut stamp = vec![usize::MAX; n];
    let mut candidates: Vec<(u32, u32, u32)> = Vec::new();
    for r in 0..n {
        let d = &dist[r * n..(r + 1) * n];
        let p = &parent[r * n..(r + 1) * n];
        for (k, &(x, y)) in edges.iter().enumerate() {
            if p[x] == y as u32 || p[y] == x as u32 {
                continue;
            }
            let len = d[x] + d[y] + 1;
            let mut c = x;
            while c != r {
                stamp[c] = r * edges.len() + k;
                c = p[c] as usize;
            }
            let mut c = y;
            let mut disjoint = true;
            while c != r {
                if stamp[c] == r * edges.len() + k {
                    disjoint = false;
                    break;
                }
                c = p[c] as usize;
            }
            if disjoint {
                candidates.push((len, r as u32, k as u32));
            }
        }
    }
    candidates.sort_unstable();

    let words = edges.len().div_ceil(64);
    let mut basis = Gf2Basis::new(words * 64);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::with_capacity(target);
    for (_, r, k) in candidates {
        let (r, (x, y)) = (r as usize, edges[k as usize]);
        let p = &parent[r * n..(r + 1) * n];
        let mut to_x = vec![x];
        let mut c = x;
        while c != r {
            c = p[c] as usize;
            to_x.push(c);
        }
        let mut to_y = vec![y];
        let mut c = y;
        while c != r {
            c = p[c] as usize;
            to_y.push(c);
        }
        // sequence r .. x, y .. (before r)
        to_x.reverse();
        to_y.pop();
        let seq: Vec<usize> = to_x.into_iter().chain(to_y).collect();
        let mut bits = vec![0u64; words];
        for i in 0..seq.len() {
            let e = edge_index(seq[i], seq[(i + 1) % seq.len()]);
            bits[e / 64] |= 1 << (e % 64);
        }
        if !seen.insert(bits.clone()) {
            continue;
        }
        if basis.insert(bits) {
            out.push(canonical_cycle(&seq.iter().map(|&l| nodes[l]).collect::<Vec<_>>()));
            if basis.rank == target {
                break;
            }
        }
    }
    debug_assert_eq!(out.len(), target);
    out
}

/// Every simple cycle (length >= 3) by exhaustive search. Exponential; meant
/// for graphs of about a dozen nodes.
pub fn enumerate_simple_cycles(g: &Graph) -> Vec<Cycle> {
    fn extend(g: &Graph, start: usize, path: &mut Vec<usize>, on_path: &mut [bool], out: &mut Vec<Cycle>) {
        let last = *path.last().unwrap();
        for &y in g.neighbors(last) {
            if y == start && path.len() >= 3 && path[1] < last {
                out.push(path.clone());
            } else if y > start && !on_path[y] {
                on_path[y] = true;
                path.push(y);
                extend(g, start, path, on_path, out);
                path.pop();
                on_path[y] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; g.node_count()];
    for s in 0..g.node_count() {
        let mut path = vec![s];
        on_path[s] = true;
        extend(g, s, &mut path, &mut on_path, &mut out);
        on_path[s] = false;
    }
    let mut out: Vec<Cycle> = out.into_iter().map(|c| canonical_cycle(&c)).collect();
    sort_cycles(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn graph(n: usize, pairs: &[(usize, usize)]) -> Graph {
        Graph::from_pairs(n, pairs, Matrix::zeros(n, 1)).unwrap()
    }

    #[test]
    fn canonical_form_is_rotation_and_reflection_invariant() {
        let c = canonical_cycle(&[3, 1, 4, 2]);
        assert_eq!(c, vec![1, 3, 2, 4]);
        assert_eq!(canonical_cycle(&[2, 4, 1, 3]), c);
    }

    #[test]
    fn tree_has_no_cycles() {
        let g = graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]);
        assert!(find_cycles(&g).is_empty());
        assert_eq!(bridges(&g).len(), 4);
    }

    #[test]
    fn triangle() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(find_cycles(&g), vec![vec![0, 1, 2]]);
        assert!(bridges(&g).is_empty());
    }

    #[test]
    fn enumerator_counts_k4_cycles() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        // 4 triangles + 3 four-cycles
        assert_eq!(enumerate_simple_cycles(&g).len(), 7);
        let basis = find_cycles(&g);
        assert_eq!(basis.len(), 3);
        assert!(basis.iter().all(|c| c.len() == 3));
    }
}
