//! Planetoid citation datasets in their pickled `ind.<name>.*` layout.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pickle::{self, as_csr, as_int_list_dict, as_ndarray, Csr, NdArray};
use super::{Dataset, Splits};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const PLANETOID_NAMES: [&str; 3] = ["cora", "citeseer", "pubmed"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanetoidOptions {
    /// Scale each feature row to unit L1 norm.
    pub row_normalize: bool,
    /// Validation nodes following the training block in the public split.
    pub validation_size: usize,
}

impl Default for PlanetoidOptions {
    fn default() -> Self {
        Self {
            row_normalize: true,
            validation_size: 500,
        }
    }
}

fn file(dir: &Path, name: &str, part: &str) -> PathBuf {
    dir.join(format!("ind.{name}.{part}"))
}

fn unpickle(path: &Path) -> Result<pickle::Obj> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    pickle::load(&bytes).map_err(|e| Error::Dataset(format!("{}: {}", path.display(), e.0)))
}

fn read_csr(path: &Path) -> Result<Csr> {
    as_csr(&unpickle(path)?).map_err(|e| Error::Dataset(format!("{}: {}", path.display(), e.0)))
}

fn read_dense(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let NdArray { shape, data } =
        as_ndarray(&unpickle(path)?).map_err(|e| Error::Dataset(format!("{}: {}", path.display(), e.0)))?;
    match shape[..] {
        [r, c] => Ok((r, c, data)),
        _ => Err(Error::Dataset(format!("{}: expected a 2-D label array, got shape {shape:?}", path.display()))),
    }
}

fn read_test_index(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected a node index, found {l:?}"),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Row {
    All(usize),
    Test(usize),
    Missing,
}

/// Row source for each node: the `allx` block comes first, then node
/// `test_index[j]` takes row `j` of the test block. When the test indices
/// leave gaps (Citeseer), the gap nodes have no row and become isolated
/// unlabeled nodes.
fn node_rows(n_all: usize, test_index: &[usize]) -> Result<Vec<Row>> {
    let mut sorted = test_index.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Dataset("test index contains duplicates".into()));
    }
    let (lo, hi) = match (sorted.first(), sorted.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::Dataset("test index is empty".into())),
    };
    if lo != n_all {
        return Err(Error::Dataset(format!(
            "test indices start at {lo}, expected {n_all} (right after the allx rows)"
        )));
    }
    let mut rows: Vec<Row> = (0..n_all).map(Row::All).collect();
    rows.resize(hi + 1, Row::Missing);
    for (j, &node) in test_index.iter().enumerate() {
        rows[node] = Row::Test(j);
    }
    Ok(rows)
}

/// Loads `ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index}` from `dir` and
/// returns the dataset with its public split: the first `len(y)` nodes for
/// training, the next `validation_size` (500) for validation and the listed
/// test nodes.
pub fn load_planetoid(dir: &Path, name: &str, options: &PlanetoidOptions) -> Result<(Dataset, Splits)> {
    if !PLANETOID_NAMES.contains(&name) {
        log::warn!("{name} is not a standard Planetoid dataset name; loading anyway");
    }
    for part in ["x", "y", "tx", "ty", "allx", "ally", "graph", "test.index"] {
        let p = file(dir, name, part);
        if !p.is_file() {
            return Err(Error::Dataset(format!("missing Planetoid file {}", p.display())));
        }
    }
    let x = read_csr(&file(dir, name, "x"))?;
    let allx = read_csr(&file(dir, name, "allx"))?;
    let tx = read_csr(&file(dir, name, "tx"))?;
    let (y_rows, n_classes, _) = read_dense(&file(dir, name, "y"))?;
    let (ally_rows, ally_cols, ally) = read_dense(&file(dir, name, "ally"))?;
    let (ty_rows, ty_cols, ty) = read_dense(&file(dir, name, "ty"))?;
    let test_index = read_test_index(&file(dir, name, "test.index"))?;

    let dim = allx.cols;
    if x.cols != dim || tx.cols != dim {
        return Err(Error::Dataset(format!("feature widths differ: x {}, allx {dim}, tx {}", x.cols, tx.cols)));
    }
    if ally_cols != n_classes || ty_cols != n_classes {
        return Err(Error::Dataset(format!("label widths differ: y {n_classes}, ally {ally_cols}, ty {ty_cols}")));
    }
    if x.rows != y_rows || allx.rows != ally_rows || tx.rows != ty_rows || tx.rows != test_index.len() {
        return Err(Error::Dataset(format!(
            "row counts disagree: x {} / y {y_rows}, allx {} / ally {ally_rows}, tx {} / ty {ty_rows} / test.index {}",
            x.rows,
            allx.rows,
            tx.rows,
            test_index.len()
        )));
    }

    let rows = node_rows(allx.rows, &test_index)?;
    let n = rows.len();
    let mut features = DenseMatrix::zeros(n, dim);
    let mut labels = vec![None; n];
    let argmax = |data: &[f64], r: usize| -> Option<usize> {
        let row = &data[r * n_classes..(r + 1) * n_classes];
        let (best, &v) = row.iter().enumerate().fold((0, &row[0]), |a, b| if b.1 > a.1 { b } else { a });
        (v > 0.0).then_some(best)
    };
    for (node, row) in rows.iter().enumerate() {
        let (m, r) = match *row {
            Row::All(r) => {
                labels[node] = argmax(&ally, r);
                (&allx, r)
            }
            Row::Test(r) => {
                labels[node] = argmax(&ty, r);
                (&tx, r)
            }
            Row::Missing => continue,
        };
        let out = features.row_mut(node);
        for k in m.indptr[r]..m.indptr[r + 1] {
            out[m.indices[k]] += m.data[k];
        }
    }
    if options.row_normalize {
        features = features.row_normalized();
    }

    let graph_path = file(dir, name, "graph");
    let adjacency =
        as_int_list_dict(&unpickle(&graph_path)?).map_err(|e| Error::Dataset(format!("{}: {}", graph_path.display(), e.0)))?;
    let mut edges = Vec::new();
    for (u, nbrs) in adjacency {
        for v in nbrs {
            let (Ok(a), Ok(b)) = (usize::try_from(u), usize::try_from(v)) else {
                return Err(Error::Dataset(format!("{}: negative node id", graph_path.display())));
            };
            if a >= n || b >= n {
                return Err(Error::Dataset(format!(
                    "{}: edge ({u}, {v}) references a node beyond the {n} feature rows",
                    graph_path.display()
                )));
            }
            edges.push((a, b));
        }
    }
    let (graph, edge_stats) = Graph::from_edges(n, &edges)?;
    let graph = graph.with_features(features)?.with_labels(labels, n_classes)?;

    let mut sorted_test = test_index.clone();
    sorted_test.sort_unstable();
    let val_end = (y_rows + options.validation_size).min(n);
    let mut splits = Splits {
        train: (0..y_rows).collect(),
        validation: (y_rows..val_end).collect(),
        test: sorted_test,
    };
    let mut dropped = 0;
    for set in [&mut splits.train, &mut splits.validation, &mut splits.test] {
        let before = set.len();
        set.retain(|&v| graph.labels()[v].is_some());
        dropped += before - set.len();
    }
    if dropped > 0 {
        log::warn!("{name}: removed {dropped} unlabeled node(s) from the public split");
    }
    splits.validate(n)?;

    let dataset = Dataset {
        name: name.to_string(),
        graph,
        class_names: None,
        node_ids: (0..n).map(|i| i.to_string()).collect(),
        edge_stats,
    };
    let s = dataset.summary();
    log::info!(
        "{name}: {} nodes, {} undirected edges ({} records), {} features, {} classes",
        s.nodes,
        s.edges,
        s.edge_records,
        s.features,
        s.classes
    );
    Ok((dataset, splits))
}
