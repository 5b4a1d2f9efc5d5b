use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::cycles::{bridges, cycle_edges, find_cycles, Cycle};
use crate::graph::{Edge, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotifKind {
    CycleUnion,
    SingleEdge,
}

/// A connected explanation unit: a union of merged cycles or a single edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Motif {
    pub kind: MotifKind,
    /// Sorted node ids.
    pub nodes: Vec<usize>,
    /// Sorted edges.
    pub edges: Vec<Edge>,
    /// Sorted lengths of the basis cycles forming a cycle union; empty for
    /// single edges.
    pub cycle_lengths: Vec<usize>,
}

impl Motif {
    pub fn single_edge(e: Edge) -> Self {
        Motif {
            kind: MotifKind::SingleEdge,
            nodes: vec![e.u, e.v],
            edges: vec![e],
            cycle_lengths: Vec::new(),
        }
    }

    /// Relabels nodes through `f` (e.g. local → parent coordinates).
    pub fn map_nodes(&self, f: impl Fn(usize) -> usize) -> Motif {
        let mut nodes: Vec<usize> = self.nodes.iter().map(|&n| f(n)).collect();
        nodes.sort_unstable();
        let mut edges: Vec<Edge> = self.edges.iter().map(|e| e.map(&f)).collect();
        edges.sort_unstable();
        Motif {
            kind: self.kind,
            nodes,
            edges,
            cycle_lengths: self.cycle_lengths.clone(),
        }
    }

    fn order_key(&self) -> (usize, usize, &[Edge]) {
        (self.nodes[0], self.nodes.len(), &self.edges)
    }
}

pub(crate) fn sort_motifs(motifs: &mut [Motif]) {
    motifs.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
}

/// Cycles merged under the transitive closure of "share at least three nodes".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleGroup {
    /// Indices into the input cycle list, ascending.
    pub cycles: Vec<usize>,
    pub nodes: BTreeSet<usize>,
}

pub fn merge_cycles(cycles: &[Cycle]) -> Vec<CycleGroup> {
    let mut parent: Vec<usize> = (0..cycles.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    let mut by_node: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, c) in cycles.iter().enumerate() {
        for &n in c {
            by_node.entry(n).or_default().push(i);
        }
    }
    let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
    for members in by_node.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                *shared.entry((i, j)).or_default() += 1;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = shared.into_iter().filter(|&(_, c)| c >= 3).map(|(k, _)| k).collect();
    pairs.sort_unstable();
    for (i, j) in pairs {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<CycleGroup> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (i, c) in cycles.iter().enumerate() {
        let r = find(&mut parent, i);
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(CycleGroup {
                cycles: Vec::new(),
                nodes: BTreeSet::new(),
            });
            groups.len() - 1
        });
        groups[g].cycles.push(i);
        groups[g].nodes.extend(c.iter().copied());
    }
    groups
}

/// Cycle-union motifs for each merged cycle group plus one single-edge motif
/// per bridge. Every edge of `g` belongs to at least one motif.
pub fn extract_motifs(g: &Graph) -> Vec<Motif> {
    let cycles = find_cycles(g);
    let mut motifs: Vec<Motif> = merge_cycles(&cycles)
        .into_iter()
        .map(|group| {
            let mut edges: BTreeSet<Edge> = BTreeSet::new();
            let mut lengths = Vec::with_capacity(group.cycles.len());
            for &c in &group.cycles {
                edges.extend(cycle_edges(&cycles[c]));
                lengths.push(cycles[c].len());
            }
            lengths.sort_unstable();
            Motif {
                kind: MotifKind::CycleUnion,
                nodes: group.nodes.into_iter().collect(),
                edges: edges.into_iter().collect(),
                cycle_lengths: lengths,
            }
        })
        .collect();
    motifs.extend(bridges(g).into_iter().map(Motif::single_edge));
    sort_motifs(&mut motifs);
    motifs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn graph(n: usize, pairs: &[(usize, usize)]) -> Graph {
        Graph::from_pairs(n, pairs, Matrix::zeros(n, 1)).unwrap()
    }

    #[test]
    fn path_gives_single_edges() {
        let m = extract_motifs(&graph(4, &[(0, 1), (1, 2), (2, 3)]));
        assert_eq!(m.len(), 3);
        assert!(m.iter().all(|m| m.kind == MotifKind::SingleEdge));
    }

    #[test]
    fn disjoint_triangles_stay_apart() {
        let groups = merge_cycles(&[vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(groups.len(), 2);
    }

    #[test]
    fn two_shared_nodes_do_not_merge() {
        let groups = merge_cycles(&[vec![0, 1, 2], vec![1, 2, 3]]);
        assert_eq!(groups.len(), 2);
    }

    #[test]
    fn merging_is_transitive() {
        let c1 = vec![0, 1, 2, 3];
        let c2 = vec![1, 2, 3, 4, 5, 6];
        let c3 = vec![4, 5, 6, 7];
        let groups = merge_cycles(&[c1, c2, c3]);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].cycles, vec![0, 1, 2]);
        assert_eq!(groups[0].nodes.len(), 8);
    }
}
