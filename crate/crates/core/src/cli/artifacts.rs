//! Artifact files: staged writes, explanation records and DOT export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::explainer::Explanation;
use crate::graph::Edge;

pub const EXPLANATIONS_FILE: &str = "explanations.jsonl";

/// `path` with `.partial` appended to its file name.
pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Writes through `<path>.partial` and renames on success, so a failed write
/// leaves only the partial file behind.
pub fn write_staged(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let tmp = partial_path(path);
    write(&tmp)?;
    if path.is_dir() {
        fs::remove_dir_all(path).map_err(|e| Error::io(path, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_staged(path, |tmp| fs::write(tmp, text).map_err(|e| Error::io(tmp, e)))
}

pub fn explanations_to_jsonl(explanations: &[Explanation]) -> String {
    let mut out = String::new();
    for e in explanations {
        out.push_str(&serde_json::to_string(e).expect("explanations serialize"));
        out.push('\n');
    }
    out
}

/// Reads explanation records from a `.jsonl` file, or from
/// `explanations.jsonl` inside a directory.
pub fn read_explanations(path: &Path) -> Result<Vec<Explanation>> {
    let file = if path.is_dir() { path.join(EXPLANATIONS_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Load {
                file: file.clone(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn dot_name(e: &Explanation) -> String {
    match e.target.node() {
        Some(v) => format!("graph_{}_node_{v}", e.target.graph()),
        None => format!("graph_{}", e.target.graph()),
    }
}

/// File name used by [`export_dot`] for `e`.
pub fn dot_file_name(e: &Explanation) -> String {
    format!("{}.dot", dot_name(e))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected DOT text of the explanation's computational graph. Selected
/// edges are bold and green; nodes are labelled with the dataset's label
/// names when it has them, otherwise with their index.
pub fn render_dot(e: &Explanation, ds: &LabeledDataset) -> Result<String> {
    if e.target.graph() >= ds.graphs.len() {
        return Err(Error::input(format!("{} is not in dataset {}", e.target, ds.name)));
    }
    let g = &ds.graphs[e.target.graph()];
    let categories = g.categorical_labels();
    let names: &BTreeMap<usize, String> = match &ds.label_names {
        Some(n) => n,
        None => &BTreeMap::new(),
    };
    let selected: BTreeSet<Edge> = e.explanation_edges.iter().copied().collect();
    let mut nodes: BTreeSet<usize> = e.computational_edges.iter().flat_map(|x| [x.u, x.v]).collect();
    nodes.extend(e.target.node());
    if let Some(&bad) = nodes.iter().find(|&&n| n >= g.node_count()) {
        return Err(Error::input(format!("node {bad} of {} is outside its graph", e.target)));
    }

    let mut out = String::new();
    let _ = writeln!(out, "graph {} {{", dot_name(e));
    let _ = writeln!(out, "  node [shape=circle];");
    for &n in &nodes {
        let label = names.get(&categories[n]).cloned().unwrap_or_else(|| n.to_string());
        let shape = if e.target.node() == Some(n) { ", shape=doublecircle" } else { "" };
        let _ = writeln!(out, "  {n} [label={}{shape}];", quote(&label));
    }
    for x in &e.computational_edges {
        if selected.contains(x) {
            let _ = writeln!(out, "  {} -- {} [style=bold, color=green];", x.u, x.v);
        } else {
            let _ = writeln!(out, "  {} -- {};", x.u, x.v);
        }
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn export_dot(e: &Explanation, ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_dot(e, ds)?).map_err(|e| Error::io(path, e))
}
