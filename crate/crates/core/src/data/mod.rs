//! Dataset loading and train/validation/test splits.

mod ego;
mod generic;
pub mod pickle;
mod planetoid;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeStats, Graph};
use crate::random::seeded;

pub use ego::{load_ego_facebook, EgoOptions, UnlabeledPolicy, EGO_IDS};
pub use generic::load_generic;
pub use planetoid::{load_planetoid, PlanetoidOptions, PLANETOID_NAMES};

/// Environment variable naming the dataset root directory.
pub const DATA_DIR_ENV: &str = "MGCMN_DATA_DIR";

/// A dataset known by name: one of the Planetoid citation graphs or a
/// Facebook ego network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DatasetName {
    Planetoid(String),
    Ego(String),
}

impl std::str::FromStr for DatasetName {
    type Err = Error;

    /// Accepts `cora`, `citeseer`, `pubmed` and ego ids written as `107`,
    /// `107ego` or `ego107` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if PLANETOID_NAMES.contains(&lower.as_str()) {
            return Ok(Self::Planetoid(lower));
        }
        let id = lower.trim_start_matches("ego").trim_end_matches("ego").trim_matches(|c| c == '-' || c == '_');
        if EGO_IDS.contains(&id) {
            return Ok(Self::Ego(id.to_string()));
        }
        Err(Error::Config(format!(
            "unknown dataset {s:?}; expected one of {PLANETOID_NAMES:?} or an ego id {EGO_IDS:?}"
        )))
    }
}

impl std::fmt::Display for DatasetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Planetoid(n) => f.write_str(n),
            Self::Ego(id) => write!(f, "{id}Ego"),
        }
    }
}

impl DatasetName {
    /// All seven named datasets.
    pub fn all() -> Vec<Self> {
        PLANETOID_NAMES
            .iter()
            .map(|n| Self::Planetoid(n.to_string()))
            .chain(EGO_IDS.iter().map(|id| Self::Ego(id.to_string())))
            .collect()
    }

    /// Directory holding this dataset's files: `<root>/planetoid` or
    /// `<root>/facebook` when present, else `root` itself.
    pub fn directory(&self, root: &Path) -> PathBuf {
        let sub = match self {
            Self::Planetoid(_) => root.join("planetoid"),
            Self::Ego(_) => root.join("facebook"),
        };
        if sub.is_dir() {
            sub
        } else {
            root.to_path_buf()
        }
    }
}

/// Loader settings for [`load_named`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadOptions {
    pub planetoid: PlanetoidOptions,
    pub ego: EgoOptions,
    /// Split for ego networks, which have no public split.
    pub ego_split: SplitSpec,
    pub split_seed: u64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            planetoid: PlanetoidOptions::default(),
            ego: EgoOptions::default(),
            ego_split: SplitSpec::ego_default(),
            split_seed: 0,
        }
    }
}

/// Loads a named dataset from `root` with its split: the public split for
/// Planetoid graphs, a seeded stratified split for ego networks.
pub fn load_named(root: &Path, name: &DatasetName, options: &LoadOptions) -> Result<(Dataset, Splits)> {
    let dir = name.directory(root);
    match name {
        DatasetName::Planetoid(n) => load_planetoid(&dir, n, &options.planetoid),
        DatasetName::Ego(id) => {
            let d = load_ego_facebook(&dir, id, &options.ego)?;
            let s = make_splits(&d, &options.ego_split, options.split_seed)?;
            Ok((d, s))
        }
    }
}

/// A labeled graph together with the bookkeeping of how it was loaded.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub class_names: Option<Vec<String>>,
    /// Original identifier of each node, indexed by dense node id.
    pub node_ids: Vec<String>,
    pub edge_stats: EdgeStats,
}

/// Summary counts in the form datasets are usually tabulated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub nodes: usize,
    pub edges: usize,
    /// Edge records in the source files before symmetrization and dedup.
    pub edge_records: usize,
    pub features: usize,
    pub classes: usize,
    pub labeled: usize,
}

impl Dataset {
    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            name: self.name.clone(),
            nodes: self.graph.n_nodes(),
            edges: self.graph.n_edges(),
            edge_records: self.edge_stats.records,
            features: self.graph.feature_dim(),
            classes: self.graph.n_classes(),
            labeled: self.graph.labels().iter().filter(|l| l.is_some()).count(),
        }
    }

    fn class_name(&self, c: usize) -> String {
        self.class_names
            .as_ref()
            .and_then(|names| names.get(c).cloned())
            .unwrap_or_else(|| c.to_string())
    }
}

/// Disjoint node index sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::EmptyMask("train split is empty"));
        }
        let mut seen = BTreeSet::new();
        for (name, set) in [("train", &self.train), ("validation", &self.validation), ("test", &self.test)] {
            for &v in set {
                if v >= n_nodes {
                    return Err(Error::NodeOutOfRange { node: v, n_nodes });
                }
                if !seen.insert(v) {
                    return Err(Error::InvalidInput(format!("node {v} appears twice in the splits (again in {name})")));
                }
            }
        }
        Ok(())
    }
}

/// Stratified split parameters. Each class with labeled nodes contributes
/// `max(per_class_train, floor(train_fraction * class_size))` training
/// nodes; validation and test are then drawn from the remaining labeled
/// nodes as fractions of all labeled nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub per_class_train: usize,
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            per_class_train: 20,
            train_fraction: 0.0,
            val_fraction: 0.2,
            test_fraction: 0.4,
        }
    }
}

impl SplitSpec {
    /// Split used for the ego networks: small circles still get one training
    /// node, larger ones 40% of their members.
    pub fn ego_default() -> Self {
        Self {
            per_class_train: 1,
            train_fraction: 0.4,
            val_fraction: 0.2,
            test_fraction: 0.4,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("train_fraction", self.train_fraction),
            ("val_fraction", self.val_fraction),
            ("test_fraction", self.test_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {f}")));
            }
        }
        if self.per_class_train == 0 && self.train_fraction == 0.0 {
            return Err(Error::Config("split would leave the training set empty".into()));
        }
        Ok(())
    }
}

/// Seeded stratified split over the labeled nodes. Index sets are returned
/// sorted. Classes without any labeled node are skipped.
pub fn make_splits(dataset: &Dataset, spec: &SplitSpec, seed: u64) -> Result<Splits> {
    spec.validate()?;
    let g = &dataset.graph;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); g.n_classes()];
    for (v, l) in g.labels().iter().enumerate() {
        if let Some(c) = l {
            by_class[*c].push(v);
        }
    }
    let labeled: usize = by_class.iter().map(Vec::len).sum();
    let mut rng = seeded(seed);
    let mut train = Vec::new();
    let mut rest = Vec::new();
    for (c, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let want = spec.per_class_train.max((spec.train_fraction * members.len() as f64).floor() as usize);
        if members.len() < want {
            return Err(Error::ClassTooSmall {
                class: dataset.class_name(c),
                available: members.len(),
                required: want,
            });
        }
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..want]);
        rest.extend_from_slice(&members[want..]);
    }
    rest.shuffle(&mut rng);
    let n_val = ((spec.val_fraction * labeled as f64).round() as usize).min(rest.len());
    let n_test = ((spec.test_fraction * labeled as f64).round() as usize).min(rest.len() - n_val);
    let mut validation = rest[..n_val].to_vec();
    let mut test = rest[n_val..n_val + n_test].to_vec();
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();
    log::info!(
        "{}: split sizes train {} / validation {} / test {} (seed {seed})",
        dataset.name,
        train.len(),
        validation.len(),
        test.len()
    );
    let splits = Splits { train, validation, test };
    splits.validate(g.n_nodes())?;
    Ok(splits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;

    fn dataset(labels: Vec<Option<usize>>, classes: usize) -> Dataset {
        let n = labels.len();
        let (g, stats) = Graph::from_edges(n, &[]).unwrap();
        let graph = g.with_features(DenseMatrix::filled(n, 1, 1.0)).unwrap().with_labels(labels, classes).unwrap();
        Dataset {
            name: "toy".into(),
            graph,
            class_names: None,
            node_ids: (0..n).map(|i| i.to_string()).collect(),
            edge_stats: stats,
        }
    }

    #[test]
    fn one_per_class() {
        let d = dataset(vec![Some(0), Some(0), Some(1), Some(1)], 2);
        let spec = SplitSpec {
            per_class_train: 1,
            train_fraction: 0.0,
            val_fraction: 0.25,
            test_fraction: 0.25,
        };
        let s = make_splits(&d, &spec, 3).unwrap();
        assert_eq!(s.train.len(), 2);
        assert_eq!(s.validation.len(), 1);
        assert_eq!(s.test.len(), 1);
        let classes: BTreeSet<_> = s.train.iter().map(|&v| d.graph.labels()[v]).collect();
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn deterministic_per_seed() {
        let labels = (0..60).map(|v| Some(v % 3)).collect();
        let d = dataset(labels, 3);
        let spec = SplitSpec::ego_default();
        assert_eq!(make_splits(&d, &spec, 9).unwrap(), make_splits(&d, &spec, 9).unwrap());
        assert_ne!(make_splits(&d, &spec, 9).unwrap(), make_splits(&d, &spec, 10).unwrap());
    }

    #[test]
    fn small_class_is_named() {
        let mut d = dataset(vec![Some(0), Some(0), Some(1)], 2);
        d.class_names = Some(vec!["circle0".into(), "circle1".into()]);
        let spec = SplitSpec {
            per_class_train: 2,
            ..SplitSpec::default()
        };
        match make_splits(&d, &spec, 0) {
            Err(Error::ClassTooSmall { class, available, required }) => {
                assert_eq!((class.as_str(), available, required), ("circle1", 1, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unlabeled_and_empty_classes_are_skipped() {
        let d = dataset(vec![Some(0), None, Some(0), None], 3);
        let spec = SplitSpec {
            per_class_train: 1,
            ..SplitSpec::default()
        };
        let s = make_splits(&d, &spec, 0).unwrap();
        let all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        assert!(all.iter().all(|&v| v == 0 || v == 2));
    }

    #[test]
    fn dataset_names() {
        assert_eq!("Cora".parse::<DatasetName>().unwrap(), DatasetName::Planetoid("cora".into()));
        for s in ["107", "107Ego", "ego107", "107-ego"] {
            assert_eq!(s.parse::<DatasetName>().unwrap(), DatasetName::Ego("107".into()));
        }
        assert!("108".parse::<DatasetName>().is_err());
        assert_eq!(DatasetName::Ego("414".into()).to_string(), "414Ego");
        assert_eq!(DatasetName::all().len(), 7);
    }

    #[test]
    fn split_validation() {
        let s = Splits {
            train: vec![0, 1],
            validation: vec![1],
            test: vec![],
        };
        assert!(s.validate(3).is_err());
        let s = Splits {
            train: vec![0],
            validation: vec![],
            test: vec![5],
        };
        assert!(s.validate(3).is_err());
    }
}
