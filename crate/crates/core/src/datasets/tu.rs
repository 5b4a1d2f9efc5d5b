//! TU plain-text graph dataset format.
//!
//! Required: `<DS>_A.txt` (1-based `row, col` node pairs) and
//! `<DS>_graph_indicator.txt`. Graph classification datasets carry
//! `<DS>_graph_labels.txt`. Node features come from `<DS>_node_attributes.txt`
//! when present, otherwise from a one-hot encoding of `<DS>_node_labels.txt`.
//! Explanation ground truth is kept in `<DS>_edge_ground_truth.txt`, one 0/1
//! flag per line of `<DS>_A.txt`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{LabeledDataset, TaskKind};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::matrix::Matrix;

const GROUND_TRUTH_SUFFIX: &str = "edge_ground_truth";

struct TuFile {
    path: PathBuf,
    lines: Vec<(usize, String)>,
}

impl TuFile {
    fn read(path: PathBuf) -> Result<Self> {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim().to_string()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Ok(TuFile { path, lines })
    }

    fn read_optional(path: PathBuf) -> Result<Option<Self>> {
        if path.exists() {
            Ok(Some(TuFile::read(path)?))
        } else {
            Ok(None)
        }
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Load {
            file: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn parse_column<T: std::str::FromStr>(&self) -> Result<Vec<T>> {
        self.lines
            .iter()
            .map(|(n, l)| l.parse::<T>().map_err(|_| self.error(*n, format!("cannot parse `{l}`"))))
            .collect()
    }

    fn expect_len(&self, len: usize, what: &str) -> Result<()> {
        if self.lines.len() != len {
            let line = self.lines.last().map_or(1, |l| l.0);
            return Err(self.error(line, format!("expected {len} lines ({what}), found {}", self.lines.len())));
        }
        Ok(())
    }
}

fn dataset_prefix(dir: &Path) -> Result<String> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut prefixes: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().and_then(|n| n.strip_suffix("_A.txt")).map(str::to_string))
        .collect();
    prefixes.sort();
    prefixes.into_iter().next().ok_or_else(|| Error::Load {
        file: dir.join("<DS>_A.txt"),
        line: 0,
        message: "no adjacency file found".into(),
    })
}

/// Parses the `Node labels:` table of a TU README into `raw label -> name`.
fn readme_label_names(dir: &Path) -> Option<BTreeMap<i64, String>> {
    let text = fs::read_to_string(dir.join("README.txt")).ok()?;
    let mut lines = text.lines().skip_while(|l| !l.trim_start().starts_with("Node labels"));
    lines.next()?;
    let mut out = BTreeMap::new();
    for line in lines {
        let t = line.trim();
        if t.is_empty() {
            if out.is_empty() {
                continue;
            }
            break;
        }
        let mut parts = t.split_whitespace();
        match (parts.next().and_then(|p| p.parse::<i64>().ok()), parts.next(), parts.next()) {
            (Some(id), Some(name), None) => {
                out.insert(id, name.to_string());
            }
            _ => break,
        }
    }
    (!out.is_empty()).then_some(out)
}

pub fn load_tu_dataset(dir: impl AsRef<Path>) -> Result<LabeledDataset> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    let name = dataset_prefix(dir)?;
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));

    let indicator_file = TuFile::read(file("graph_indicator"))?;
    let indicator: Vec<usize> = indicator_file.parse_column()?;
    let node_total = indicator.len();
    let graph_total = indicator.iter().copied().max().unwrap_or(0);
    if let Some(pos) = indicator.iter().position(|&g| g == 0) {
        return Err(indicator_file.error(indicator_file.lines[pos].0, "graph ids are 1-based"));
    }
    let mut local_index = vec![0usize; node_total];
    let mut sizes = vec![0usize; graph_total];
    for (node, &g) in indicator.iter().enumerate() {
        local_index[node] = sizes[g - 1];
        sizes[g - 1] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(indicator_file.error(0, format!("graph {} has no nodes", empty + 1)));
    }

    let adjacency = TuFile::read(file("A"))?;
    let gt_file = TuFile::read_optional(file(GROUND_TRUTH_SUFFIX))?;
    let gt_flags: Option<Vec<u8>> = match &gt_file {
        Some(f) => {
            f.expect_len(adjacency.lines.len(), "one flag per adjacency line")?;
            Some(f.parse_column()?)
        }
        None => None,
    };
    let mut edges: Vec<BTreeSet<Edge>> = vec![BTreeSet::new(); graph_total];
    let mut gt_edges: Vec<BTreeSet<Edge>> = vec![BTreeSet::new(); graph_total];
    for (k, (line, text)) in adjacency.lines.iter().enumerate() {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(adjacency.error(*line, format!("expected `row, col`, found `{text}`")));
        }
        let mut ids = [0usize; 2];
        for (slot, p) in ids.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| adjacency.error(*line, format!("cannot parse node id `{p}`")))?;
            if *slot == 0 || *slot > node_total {
                return Err(adjacency.error(*line, format!("node {slot} is not referenced by any graph")));
            }
        }
        let (a, b) = (ids[0] - 1, ids[1] - 1);
        if indicator[a] != indicator[b] {
            return Err(adjacency.error(*line, format!("edge {} - {} crosses graphs", a + 1, b + 1)));
        }
        if a == b {
            log::warn!("{}:{line}: ignoring self loop on node {}", adjacency.path.display(), a + 1);
            continue;
        }
        let g = indicator[a] - 1;
        let e = Edge::new(local_index[a], local_index[b]);
        edges[g].insert(e);
        if gt_flags.as_ref().is_some_and(|f| f[k] != 0) {
            gt_edges[g].insert(e);
        }
    }

    let node_labels_file = TuFile::read_optional(file("node_labels"))?;
    let raw_node_labels: Option<Vec<i64>> = match &node_labels_file {
        Some(f) => {
            f.expect_len(node_total, "one label per node")?;
            Some(f.parse_column()?)
        }
        None => None,
    };
    let attributes_file = TuFile::read_optional(file("node_attributes"))?;
    let graph_labels_file = TuFile::read_optional(file("graph_labels"))?;
    let task = if graph_labels_file.is_some() {
        TaskKind::Graph
    } else {
        TaskKind::Node
    };

    let mut label_names = None;
    let features: Matrix = if let Some(f) = &attributes_file {
        f.expect_len(node_total, "one attribute row per node")?;
        let mut rows = Vec::with_capacity(node_total);
        for (line, text) in &f.lines {
            let row: Vec<f64> = text
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| f.error(*line, format!("cannot parse `{v}`"))))
                .collect::<Result<_>>()?;
            if let Some(prev) = rows.first().map(Vec::len) {
                if prev != row.len() {
                    return Err(f.error(*line, format!("expected {prev} attributes, found {}", row.len())));
                }
            }
            rows.push(row);
        }
        Matrix::from_rows(&rows)
    } else {
        let raw = match (&raw_node_labels, task) {
            (Some(raw), TaskKind::Graph) => raw,
            (None, _) => return Err(indicator_file.error(0, "dataset has neither node labels nor node attributes")),
            (Some(_), TaskKind::Node) => {
                return Err(indicator_file.error(0, "node classification datasets need node attributes as features"))
            }
        };
        let distinct: BTreeSet<i64> = raw.iter().copied().collect();
        let index: HashMap<i64, usize> = distinct.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut m = Matrix::zeros(node_total, distinct.len());
        for (n, l) in raw.iter().enumerate() {
            m[(n, index[l])] = 1.0;
        }
        if let Some(names) = readme_label_names(dir) {
            label_names = Some(
                distinct
                    .iter()
                    .enumerate()
                    .filter_map(|(i, l)| names.get(l).map(|s| (i, s.clone())))
                    .collect(),
            );
        }
        m
    };

    let mut starts = vec![0usize; graph_total];
    for g in 1..graph_total {
        starts[g] = starts[g - 1] + sizes[g - 1];
    }
    // TU node ids are grouped per graph, but do not rely on it.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); graph_total];
    for (node, &g) in indicator.iter().enumerate() {
        members[g - 1].push(node);
    }

    let mut graphs = Vec::with_capacity(graph_total);
    for g in 0..graph_total {
        let feats = features.select_rows(&members[g]);
        let graph = Graph::new(sizes[g], edges[g].iter().copied().collect(), feats)?;
        graphs.push(graph);
    }

    match task {
        TaskKind::Graph => {
            let f = graph_labels_file.as_ref().expect("graph task");
            f.expect_len(graph_total, "one label per graph")?;
            let raw: Vec<i64> = f.parse_column()?;
            let distinct: BTreeSet<i64> = raw.iter().copied().collect();
            let index: HashMap<i64, usize> = distinct.iter().enumerate().map(|(i, &l)| (l, i)).collect();
            for (graph, l) in graphs.iter_mut().zip(&raw) {
                graph.graph_label = Some(index[l]);
            }
        }
        TaskKind::Node => {
            if graph_total != 1 {
                return Err(indicator_file.error(0, "node classification datasets hold exactly one graph"));
            }
            let raw = raw_node_labels
                .ok_or_else(|| indicator_file.error(0, "node classification dataset has no node labels"))?;
            let labels = raw
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    usize::try_from(l).map_err(|_| {
                        let f = node_labels_file.as_ref().expect("present");
                        f.error(f.lines[i].0, format!("class label {l} is negative"))
                    })
                })
                .collect::<Result<Vec<usize>>>()?;
            graphs[0].node_labels = Some(labels);
        }
    }

    let ground_truth = gt_file.map(|_| match task {
        TaskKind::Graph => gt_edges.iter().map(|s| s.iter().copied().collect()).collect(),
        TaskKind::Node => node_ground_truth(graphs[0].node_count(), &gt_edges[0]),
    });

    let mut ds = LabeledDataset::new(name, task, graphs)?;
    ds.label_names = label_names;
    if let Some(gt) = ground_truth {
        ds = ds.with_ground_truth(gt)?;
    }
    Ok(ds)
}

/// Each node's ground truth is the connected component of the ground-truth
/// edge subgraph that contains it.
fn node_ground_truth(n: usize, gt: &BTreeSet<Edge>) -> Vec<Vec<Edge>> {
    let mut parent: Vec<usize> = (0..n).collect();
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
    for e in gt {
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut by_root: HashMap<usize, Vec<Edge>> = HashMap::new();
    for e in gt {
        let r = find(&mut parent, e.u);
        by_root.entry(r).or_default().push(*e);
    }
    (0..n)
        .map(|v| {
            let r = find(&mut parent, v);
            by_root.get(&r).cloned().unwrap_or_default()
        })
        .collect()
}

/// Writes `ds` as a TU directory named after `ds.name`, always including
/// node attributes so features round-trip exactly.
pub fn save_tu_dataset(ds: &LabeledDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = &ds.name;
    let path = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));
    let mut a = String::new();
    let mut gt_lines = String::new();
    let mut indicator = String::new();
    let mut node_labels = String::new();
    let mut attributes = String::new();
    let mut graph_labels = String::new();

    let mut offset = 0;
    for (gi, g) in ds.graphs.iter().enumerate() {
        let gt: BTreeSet<Edge> = match (&ds.ground_truth, ds.task) {
            (Some(gt), TaskKind::Graph) => gt[gi].iter().copied().collect(),
            (Some(gt), TaskKind::Node) => gt.iter().flatten().copied().collect(),
            (None, _) => BTreeSet::new(),
        };
        for e in g.edges() {
            let flag = u8::from(gt.contains(e));
            for (x, y) in [(e.u, e.v), (e.v, e.u)] {
                a.push_str(&format!("{}, {}\n", x + offset + 1, y + offset + 1));
                gt_lines.push_str(&format!("{flag}\n"));
            }
        }
        let labels = match ds.task {
            TaskKind::Node => g.node_labels.clone().expect("validated"),
            TaskKind::Graph => g.categorical_labels(),
        };
        for n in 0..g.node_count() {
            indicator.push_str(&format!("{}\n", gi + 1));
            node_labels.push_str(&format!("{}\n", labels[n]));
            let row: Vec<String> = g.features().row(n).iter().map(|v| format!("{v:?}")).collect();
            attributes.push_str(&row.join(", "));
            attributes.push('\n');
        }
        if let Some(l) = g.graph_label {
            graph_labels.push_str(&format!("{l}\n"));
        }
        offset += g.node_count();
    }

    let mut files = vec![
        ("A", a),
        ("graph_indicator", indicator),
        ("node_labels", node_labels),
        ("node_attributes", attributes),
    ];
    if ds.task == TaskKind::Graph {
        files.push(("graph_labels", graph_labels));
    }
    if ds.ground_truth.is_some() {
        files.push((GROUND_TRUTH_SUFFIX, gt_lines));
    }
    for (suffix, body) in files {
        let p = path(suffix);
        let mut f = fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        f.write_all(body.as_bytes()).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::generate_ba_2motif;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    fn tiny(dir: &Path) {
        write(dir, "T_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n3, 1\n1, 3\n4, 5\n5, 4\n");
        write(dir, "T_graph_indicator.txt", "1\n1\n1\n2\n2\n");
        write(dir, "T_graph_labels.txt", "1\n-1\n");
        write(dir, "T_node_labels.txt", "0\n2\n2\n0\n0\n");
    }

    #[test]
    fn loads_hand_written_directory() {
        let dir = tempfile::tempdir().unwrap();
        tiny(dir.path());
        let ds = load_tu_dataset(dir.path()).unwrap();
        assert_eq!(ds.name, "T");
        assert_eq!(ds.task, TaskKind::Graph);
        assert_eq!(ds.graphs.len(), 2);
        assert_eq!(ds.graphs[0].edge_count(), 3);
        assert_eq!(ds.graphs[1].edges(), &[Edge::new(0, 1)]);
        assert_ne!(ds.graphs[0].graph_label, ds.graphs[1].graph_label);
        let f = ds.graphs[0].features();
        assert_eq!(f.cols(), 2);
        assert_ne!(f.row(0), f.row(1));
        assert_eq!(f.row(1), f.row(2));
    }

    #[test]
    fn bad_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        tiny(dir.path());
        write(dir.path(), "T_A.txt", "1, 2\n2; 1\n");
        match load_tu_dataset(dir.path()) {
            Err(Error::Load { line, file, .. }) => {
                assert_eq!(line, 2);
                assert!(file.ends_with("T_A.txt"));
            }
            other => panic!("expected load error, got {other:?}"),
        }
    }

    #[test]
    fn cross_graph_edge_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        tiny(dir.path());
        write(dir.path(), "T_A.txt", "1, 4\n");
        assert!(matches!(load_tu_dataset(dir.path()), Err(Error::Load { line: 1, .. })));
    }

    #[test]
    fn round_trip_keeps_ground_truth() {
        let ds = generate_ba_2motif(6, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_tu_dataset(&ds, dir.path()).unwrap();
        let back = load_tu_dataset(dir.path()).unwrap();
        assert_eq!(back.graphs, ds.graphs);
        assert_eq!(back.ground_truth, ds.ground_truth);
    }

    #[test]
    fn bundled_mutag() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/MUTAG");
        let ds = load_tu_dataset(dir).unwrap();
        assert_eq!(ds.graphs.len(), 188);
        assert_eq!(ds.class_count(), 2);
        assert_eq!(ds.label_names.as_ref().map(|n| n.len()), Some(7));
    }
}
