//! Facebook ego networks: `<id>.edges`, `<id>.feat`, `<id>.egofeat`,
//! `<id>.circles`, `<id>.featnames`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const EGO_IDS: [&str; 4] = ["107", "414", "1684", "1912"];

/// What to do with nodes that belong to no circle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnlabeledPolicy {
    /// Keep them as unlabeled nodes that still propagate features.
    #[default]
    Keep,
    /// Remove them and their edges, then reindex.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EgoOptions {
    pub unlabeled: UnlabeledPolicy,
    /// Add the ego itself (features from `.egofeat`) joined to every alter.
    pub include_ego: bool,
    pub row_normalize: bool,
}

impl Default for EgoOptions {
    fn default() -> Self {
        Self {
            unlabeled: UnlabeledPolicy::Keep,
            include_ego: false,
            row_normalize: false,
        }
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn parse_features(path: &Path, tokens: &[&str], line: usize) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(path, line, format!("bad feature value {t:?}"))))
        .collect()
}

/// Loads one ego network. Nodes are the alters listed in `.feat`, in file
/// order; edges touching nodes without features are discarded. Each node's
/// label is the first circle (in file order) that lists it; circles that end
/// up labeling no node are not classes.
pub fn load_ego_facebook(dir: &Path, ego_id: &str, options: &EgoOptions) -> Result<Dataset> {
    if !EGO_IDS.contains(&ego_id) {
        log::warn!("{ego_id} is not one of the standard ego ids {EGO_IDS:?}; loading anyway");
    }
    let path = |ext: &str| -> PathBuf { dir.join(format!("{ego_id}.{ext}")) };
    for ext in ["edges", "feat", "egofeat", "circles", "featnames"] {
        if !path(ext).is_file() {
            return Err(Error::Dataset(format!("missing ego-network file {}", path(ext).display())));
        }
    }

    let featnames = read(&path("featnames"))?;
    let dim = numbered_lines(&featnames).count();

    let feat_path = path("feat");
    let feat_text = read(&feat_path)?;
    let mut ids: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line, l) in numbered_lines(&feat_text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != dim + 1 {
            return Err(parse_err(&feat_path, line, format!("expected an id and {dim} features, found {} fields", tokens.len())));
        }
        let id = tokens[0].to_string();
        if index.insert(id.clone(), ids.len()).is_some() {
            return Err(parse_err(&feat_path, line, format!("node {id} listed twice")));
        }
        ids.push(id);
        rows.push(parse_features(&feat_path, &tokens[1..], line)?);
    }

    let edges_path = path("edges");
    let edges_text = read(&edges_path)?;
    let mut raw_edges: Vec<(usize, usize)> = Vec::new();
    let mut records = 0usize;
    let mut featureless = 0usize;
    for (line, l) in numbered_lines(&edges_text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(&edges_path, line, format!("expected two node ids, found {} fields", tokens.len())));
        }
        records += 1;
        match (index.get(tokens[0]), index.get(tokens[1])) {
            (Some(&u), Some(&v)) => raw_edges.push((u, v)),
            _ => featureless += 1,
        }
    }
    if featureless > 0 {
        log::warn!("{ego_id}: dropped {featureless} edge record(s) touching nodes without features");
    }

    let circles_path = path("circles");
    let circles_text = read(&circles_path)?;
    let mut class_names = Vec::new();
    let mut labels: Vec<Option<usize>> = vec![None; ids.len()];
    let mut unknown_members = 0usize;
    for (line, l) in numbered_lines(&circles_text) {
        let mut tokens = l.split_whitespace();
        let name = tokens.next().ok_or_else(|| parse_err(&circles_path, line, "empty circle line"))?;
        let class = class_names.len();
        class_names.push(name.to_string());
        for member in tokens {
            match index.get(member) {
                Some(&v) => {
                    labels[v].get_or_insert(class);
                }
                None => unknown_members += 1,
            }
        }
    }
    let mut used = vec![false; class_names.len()];
    for l in labels.iter().flatten() {
        used[*l] = true;
    }
    let mut remap = vec![None; class_names.len()];
    let mut kept_names = Vec::new();
    for (c, name) in class_names.into_iter().enumerate() {
        if used[c] {
            remap[c] = Some(kept_names.len());
            kept_names.push(name);
        }
    }
    if kept_names.is_empty() {
        return Err(Error::Dataset(format!("{} labels no node", circles_path.display())));
    }
    let empty = remap.iter().filter(|r| r.is_none()).count();
    if empty > 0 {
        log::info!("{ego_id}: {empty} circle(s) label no node and are not classes");
    }
    for l in labels.iter_mut() {
        *l = l.and_then(|c| remap[c]);
    }
    let class_names = kept_names;
    if unknown_members > 0 {
        log::warn!("{ego_id}: ignored {unknown_members} circle member(s) without features");
    }

    if options.include_ego {
        let ego_path = path("egofeat");
        let ego_text = read(&ego_path)?;
        let (line, l) = numbered_lines(&ego_text).next().ok_or_else(|| parse_err(&ego_path, 1, "empty ego feature file"))?;
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != dim {
            return Err(parse_err(&ego_path, line, format!("expected {dim} features, found {}", tokens.len())));
        }
        let ego = ids.len();
        raw_edges.extend((0..ego).map(|v| (ego, v)));
        records += ego;
        rows.push(parse_features(&ego_path, &tokens, line)?);
        ids.push(ego_id.to_string());
        labels.push(None);
    }

    // keep[i] = new index of old node i
    let keep: Vec<Option<usize>> = match options.unlabeled {
        UnlabeledPolicy::Keep => (0..ids.len()).map(Some).collect(),
        UnlabeledPolicy::Drop => {
            let mut next = 0;
            labels
                .iter()
                .map(|l| {
                    l.map(|_| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        }
    };
    let n = keep.iter().flatten().count();
    let removed = ids.len() - n;
    if removed > 0 {
        log::info!("{ego_id}: removed {removed} node(s) outside every circle");
    } else {
        let unlabeled = labels.iter().filter(|l| l.is_none()).count();
        if unlabeled > 0 {
            log::info!("{ego_id}: {unlabeled} node(s) outside every circle kept unlabeled");
        }
    }
    let edges: Vec<(usize, usize)> = raw_edges
        .iter()
        .filter_map(|&(u, v)| Some((keep[u]?, keep[v]?)))
        .collect();
    let mut features = DenseMatrix::zeros(n, dim);
    let mut node_ids = Vec::with_capacity(n);
    let mut kept_labels = Vec::with_capacity(n);
    for (old, new) in keep.iter().enumerate() {
        if let Some(new) = *new {
            features.row_mut(new).copy_from_slice(&rows[old]);
            node_ids.push(ids[old].clone());
            kept_labels.push(labels[old]);
        }
    }
    if options.row_normalize {
        features = features.row_normalized();
    }
    let (graph, mut edge_stats) = Graph::from_edges(n, &edges)?;
    edge_stats.records = records;
    let graph = graph.with_features(features)?.with_labels(kept_labels, class_names.len())?;
    let dataset = Dataset {
        name: format!("{ego_id}Ego"),
        graph,
        class_names: Some(class_names),
        node_ids,
        edge_stats,
    };
    let s = dataset.summary();
    log::info!(
        "{}: {} nodes, {} undirected edges ({} records), {} features, {} classes, {} labeled",
        s.name,
        s.nodes,
        s.edges,
        s.edge_records,
        s.features,
        s.classes,
        s.labeled
    );
    Ok(dataset)
}
