use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use super::extract::{extract_motifs, sort_motifs, Motif, MotifKind};
use crate::datasets::{LabeledDataset, TaskKind};
use crate::error::{Error, Result};
use crate::graph::l_hop_subgraph;

pub const DEFAULT_MIN_SUPPORT: f64 = 0.05;

/// Canonical identity of a motif for frequency counting:
/// `kind:sorted cycle lengths:sorted node labels`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MotifKey(pub String);

impl fmt::Display for MotifKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn join(values: impl Iterator<Item = usize>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// `node_labels` is indexed in the motif's node coordinates.
pub fn motif_key(m: &Motif, node_labels: &[usize]) -> MotifKey {
    let kind = match m.kind {
        MotifKind::CycleUnion => "cycle",
        MotifKind::SingleEdge => "edge",
    };
    let mut labels: Vec<usize> = m.nodes.iter().map(|&n| node_labels[n]).collect();
    labels.sort_unstable();
    MotifKey(format!(
        "{kind}:{}:{}",
        join(m.cycle_lengths.iter().copied()),
        join(labels.into_iter())
    ))
}

/// Per-key support: the fraction of units (graphs or computational graphs)
/// containing at least one motif with that key.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifDictionary {
    pub min_support: f64,
    pub unit_count: usize,
    pub support: BTreeMap<String, f64>,
}

impl MotifDictionary {
    pub fn from_key_sets<I>(key_sets: I, min_support: f64) -> Result<Self>
    where
        I: IntoIterator<Item = BTreeSet<MotifKey>>,
    {
        if !(0.0..=1.0).contains(&min_support) {
            return Err(Error::input(format!("min_support {min_support} outside [0, 1]")));
        }
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut units = 0;
        for set in key_sets {
            units += 1;
            for k in set {
                *counts.entry(k.0).or_default() += 1;
            }
        }
        if units == 0 {
            return Err(Error::input("cannot build a motif dictionary from an empty training set"));
        }
        Ok(MotifDictionary {
            min_support,
            unit_count: units,
            support: counts.into_iter().map(|(k, c)| (k, c as f64 / units as f64)).collect(),
        })
    }

    pub fn support_of(&self, key: &MotifKey) -> f64 {
        self.support.get(&key.0).copied().unwrap_or(0.0)
    }

    pub fn is_frequent(&self, key: &MotifKey) -> bool {
        self.support_of(key) >= self.min_support
    }

    /// Replaces every infrequent cycle-union motif by single-edge motifs for
    /// its edges. Single edges are kept regardless of frequency; duplicates
    /// are dropped.
    pub fn filter(&self, motifs: Vec<Motif>, node_labels: &[usize]) -> Vec<Motif> {
        let mut kept = Vec::with_capacity(motifs.len());
        let mut single: BTreeSet<crate::graph::Edge> = BTreeSet::new();
        for m in motifs {
            if m.kind == MotifKind::SingleEdge {
                single.insert(m.edges[0]);
            } else if self.is_frequent(&motif_key(&m, node_labels)) {
                kept.push(m);
            } else {
                single.extend(m.edges.iter().copied());
            }
        }
        kept.extend(single.into_iter().map(Motif::single_edge));
        sort_motifs(&mut kept);
        kept
    }

    /// `key<TAB>support` lines preceded by `#` metadata lines.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# min_support\t{:?}\n# units\t{}\n", self.min_support, self.unit_count);
        for (k, s) in &self.support {
            out.push_str(&format!("{k}\t{s:?}\n"));
        }
        out
    }

    pub fn from_tsv(path: &Path, text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Load {
            file: path.to_path_buf(),
            line,
            message,
        };
        let mut min_support = DEFAULT_MIN_SUPPORT;
        let mut unit_count = 0;
        let mut support = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let body = line.strip_prefix("# ").unwrap_or(line);
            let (key, value) = body
                .split_once('\t')
                .ok_or_else(|| err(i + 1, format!("expected `key<TAB>value`, found `{line}`")))?;
            let bad = |_| err(i + 1, format!("cannot parse `{value}`"));
            match (line.starts_with('#'), key) {
                (true, "min_support") => min_support = value.parse().map_err(bad)?,
                (true, "units") => unit_count = value.parse().map_err(|_| err(i + 1, format!("cannot parse `{value}`")))?,
                (true, _) => {}
                (false, _) => {
                    support.insert(key.to_string(), value.parse().map_err(bad)?);
                }
            }
        }
        Ok(MotifDictionary {
            min_support,
            unit_count,
            support,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(path, &text)
    }
}

/// Raw motifs of every explanation unit in parent coordinates: each graph
/// for graph tasks, each node's `hops`-hop computational graph for node tasks.
pub fn unit_motifs(ds: &LabeledDataset, hops: usize) -> Result<Vec<Vec<Motif>>> {
    match ds.task {
        TaskKind::Graph => Ok(ds.graphs.iter().map(extract_motifs).collect()),
        TaskKind::Node => {
            let g = &ds.graphs[0];
            (0..g.node_count())
                .map(|v| {
                    let sub = l_hop_subgraph(g, v, hops)?;
                    Ok(extract_motifs(&sub.graph)
                        .into_iter()
                        .map(|m| m.map_nodes(|l| sub.parent[l]))
                        .collect())
                })
                .collect()
        }
    }
}

/// Counts motif keys over the training units and marks those below
/// `min_support` infrequent.
pub fn build_motif_dictionary(train: &LabeledDataset, min_support: f64, hops: usize) -> Result<MotifDictionary> {
    let motifs = unit_motifs(train, hops)?;
    dictionary_from_units(train, &motifs, min_support)
}

pub(crate) fn dictionary_from_units(ds: &LabeledDataset, units: &[Vec<Motif>], min_support: f64) -> Result<MotifDictionary> {
    let label_cache: Vec<Vec<usize>> = ds.graphs.iter().map(|g| g.categorical_labels()).collect();
    MotifDictionary::from_key_sets(
        units.iter().enumerate().map(|(i, motifs)| {
            let labels = match ds.task {
                TaskKind::Graph => &label_cache[i],
                TaskKind::Node => &label_cache[0],
            };
            motifs.iter().map(|m| motif_key(m, labels)).collect::<BTreeSet<_>>()
        }),
        min_support,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn keys(n: usize, key: &str) -> BTreeSet<MotifKey> {
        (0..n).map(|_| MotifKey(key.to_string())).collect()
    }

    #[test]
    fn zero_support_filters_nothing() {
        let d = MotifDictionary::from_key_sets(vec![keys(1, "a"), keys(0, "")], 0.0).unwrap();
        assert!(d.is_frequent(&MotifKey("a".into())));
        assert!(d.is_frequent(&MotifKey("never-seen".into())));
    }

    #[test]
    fn rare_key_is_infrequent() {
        let mut sets = vec![keys(1, "rare")];
        sets.extend((0..99).map(|_| keys(1, "common")));
        let d = MotifDictionary::from_key_sets(sets, 0.05).unwrap();
        assert!((d.support_of(&MotifKey("rare".into())) - 0.01).abs() < 1e-12);
        assert!(!d.is_frequent(&MotifKey("rare".into())));
        assert!(d.is_frequent(&MotifKey("common".into())));
    }

    #[test]
    fn empty_training_set_is_rejected() {
        assert!(MotifDictionary::from_key_sets(Vec::<BTreeSet<MotifKey>>::new(), 0.1).is_err());
    }

    #[test]
    fn keys_separate_lengths_and_kinds() {
        let labels = vec![0; 8];
        let c5 = Motif {
            kind: MotifKind::CycleUnion,
            nodes: (0..5).collect(),
            edges: vec![],
            cycle_lengths: vec![5],
        };
        let c6 = Motif {
            nodes: (0..6).collect(),
            cycle_lengths: vec![6],
            ..c5.clone()
        };
        assert_ne!(motif_key(&c5, &labels), motif_key(&c6, &labels));
        let e1 = Motif::single_edge(Edge::new(0, 1));
        let e2 = Motif::single_edge(Edge::new(3, 7));
        assert_eq!(motif_key(&e1, &labels), motif_key(&e2, &labels));
    }

    #[test]
    fn infrequent_cycles_decompose_into_edges() {
        let tri = Motif {
            kind: MotifKind::CycleUnion,
            nodes: vec![0, 1, 2],
            edges: vec![Edge::new(0, 1), Edge::new(0, 2), Edge::new(1, 2)],
            cycle_lengths: vec![3],
        };
        let d = MotifDictionary::from_key_sets(vec![keys(1, "other")], 0.5).unwrap();
        let out = d.filter(vec![tri, Motif::single_edge(Edge::new(2, 3))], &[0; 4]);
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|m| m.kind == MotifKind::SingleEdge));
    }

    #[test]
    fn tsv_round_trip() {
        let d = MotifDictionary::from_key_sets(vec![keys(1, "edge::0,1"), keys(1, "cycle:3:0,0,0")], 0.25).unwrap();
        let back = MotifDictionary::from_tsv(Path::new("x.tsv"), &d.to_tsv()).unwrap();
        assert_eq!(back, d);
    }
}
