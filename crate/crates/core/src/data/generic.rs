//! Plain-text dataset format: a whitespace edge list plus CSV features and
//! labels keyed by arbitrary node identifiers.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use super::Dataset;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Non-blank, non-`#` lines with 1-based line numbers.
fn content_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

#[derive(Default)]
struct Ids {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Ids {
    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        self.names.push(id.to_string());
        self.index.insert(id.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }
}

/// Loads the generic format. Node ids are numbered in order of first
/// appearance across the edge, label and feature files; ids that appear only
/// in the label or feature file become isolated nodes. Every node needs a
/// feature row. Class names are sorted numerically when all labels are
/// integers, lexicographically otherwise.
pub fn load_generic(edge_file: &Path, feature_file: &Path, label_file: &Path) -> Result<Dataset> {
    let mut ids = Ids::default();

    let mut edges = Vec::new();
    for (line, l) in content_lines(edge_file)? {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(edge_file, line, format!("expected two node ids, found {} fields", tokens.len())));
        }
        edges.push((ids.intern(tokens[0]), ids.intern(tokens[1])));
    }

    let mut raw_labels: Vec<(usize, String)> = Vec::new();
    let mut labeled = HashSet::new();
    for (line, l) in content_lines(label_file)? {
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() != 2 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(parse_err(label_file, line, "expected `id,label`"));
        }
        let v = ids.intern(fields[0]);
        if !labeled.insert(v) {
            return Err(parse_err(label_file, line, format!("node {} labeled twice", fields[0])));
        }
        raw_labels.push((v, fields[1].to_string()));
    }

    let mut feature_rows: Vec<(usize, Vec<f64>, usize)> = Vec::new();
    let mut dim = None;
    for (line, l) in content_lines(feature_file)? {
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(parse_err(feature_file, line, "expected `id,f1,f2,...`"));
        }
        let width = fields.len() - 1;
        if *dim.get_or_insert(width) != width {
            return Err(parse_err(feature_file, line, format!("expected {} features, found {width}", dim.unwrap())));
        }
        let values = fields[1..]
            .iter()
            .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| parse_err(feature_file, line, "non-numeric feature value"))?;
        feature_rows.push((ids.intern(fields[0]), values, line));
    }

    let n = ids.names.len();
    let dim = dim.ok_or_else(|| Error::Dataset(format!("{} has no feature rows", feature_file.display())))?;
    let mut features = DenseMatrix::zeros(n, dim);
    let mut has_row = vec![false; n];
    for (v, values, line) in feature_rows {
        if std::mem::replace(&mut has_row[v], true) {
            return Err(parse_err(feature_file, line, format!("node {} has two feature rows", ids.names[v])));
        }
        features.row_mut(v).copy_from_slice(&values);
    }
    if let Some(v) = has_row.iter().position(|&h| !h) {
        return Err(Error::Dataset(format!("node {} has no feature row in {}", ids.names[v], feature_file.display())));
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(|(_, l)| l.as_str()).collect();
    let mut class_names: Vec<String> = distinct.into_iter().map(String::from).collect();
    if class_names.iter().all(|c| c.parse::<i64>().is_ok()) {
        class_names.sort_by_key(|c| c.parse::<i64>().unwrap());
    }
    let class_of: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut labels = vec![None; n];
    for (v, l) in &raw_labels {
        labels[*v] = Some(class_of[l.as_str()]);
    }

    let (graph, edge_stats) = Graph::from_edges(n, &edges)?;
    let graph = graph.with_features(features)?.with_labels(labels, class_names.len())?;
    let name = edge_file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "generic".into());
    Ok(Dataset {
        name,
        graph,
        class_names: Some(class_names),
        node_ids: ids.names,
        edge_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    struct Files {
        _dir: tempfile::TempDir,
        edges: std::path::PathBuf,
        feats: std::path::PathBuf,
        labels: std::path::PathBuf,
    }

    fn files(edges: &str, feats: &str, labels: &str) -> Files {
        let dir = tempfile::tempdir().unwrap();
        let p = |n: &str, body: &str| {
            let path = dir.path().join(n);
            fs::write(&path, body).unwrap();
            path
        };
        Files {
            edges: p("g.edges", edges),
            feats: p("g.csv", feats),
            labels: p("g.labels", labels),
            _dir: dir,
        }
    }

    fn load(f: &Files) -> Result<Dataset> {
        load_generic(&f.edges, &f.feats, &f.labels)
    }

    #[test]
    fn triangle() {
        let f = files("a b\nb c\nc a\n", "a,1\nb,1\nc,1\n", "a,0\nb,1\nc,0\n");
        let d = load(&f).unwrap();
        assert_eq!(d.graph.n_nodes(), 3);
        assert_eq!(d.graph.n_edges(), 3);
        assert_eq!(d.graph.n_classes(), 2);
        assert_eq!(d.edge_stats.duplicate_edges, 0);
    }

    #[test]
    fn duplicate_edges_counted_once() {
        let f = files("# comment\na b\nb c\nb a\n", "a,1\nb,1\nc,1\n", "a,x\n");
        let d = load(&f).unwrap();
        assert_eq!(d.graph.n_edges(), 2);
        assert_eq!(d.edge_stats.duplicate_edges, 1);
    }

    #[test]
    fn label_only_node_is_isolated() {
        let f = files("a b\n", "a,1\nb,1\nz,2\n", "a,0\nz,1\n");
        let d = load(&f).unwrap();
        assert_eq!(d.node_ids, vec!["a", "b", "z"]);
        assert_eq!(d.graph.degree(2).unwrap(), 0);
        assert_eq!(d.graph.labels(), &[Some(0), None, Some(1)]);
        assert_eq!(d.graph.features().row(2), &[2.0]);
    }

    #[test]
    fn numeric_classes_sort_numerically() {
        let f = files("a b\n", "a,1\nb,1\nc,1\n", "a,10\nb,2\nc,9\n");
        let d = load(&f).unwrap();
        assert_eq!(d.class_names.unwrap(), vec!["2", "9", "10"]);
        assert_eq!(d.graph.labels(), &[Some(2), Some(0), Some(1)]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let f = files("a b\nb\n", "a,1\nb,1\n", "");
        assert!(matches!(load(&f), Err(Error::Parse { line: 2, .. })));
        let f = files("a b\n", "a,1\nb,x\n", "");
        assert!(matches!(load(&f), Err(Error::Parse { line: 2, .. })));
        let f = files("a b\n", "a,1\nb,1,2\n", "");
        assert!(matches!(load(&f), Err(Error::Parse { line: 2, .. })));
        let f = files("a b\n", "a,1\n", "");
        assert!(matches!(load(&f), Err(Error::Dataset(_))));
    }
}
