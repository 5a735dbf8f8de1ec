//! Run configuration: a flat TOML document, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use mgcmn::data::{
    load_generic, load_named, make_splits, Dataset, DatasetName, LoadOptions, SplitSpec, Splits, UnlabeledPolicy,
    DATA_DIR_ENV,
};
use mgcmn::model::ModelConfig;
use mgcmn::motif::{MixRecipe, MotifSemantics};

use crate::CliError;

/// Every key is optional; missing keys take the defaults of [`ModelConfig`]
/// and the loaders.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // dataset
    pub dataset: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub edge_file: Option<PathBuf>,
    pub feature_file: Option<PathBuf>,
    pub label_file: Option<PathBuf>,
    pub row_normalize: Option<bool>,
    pub validation_size: Option<usize>,
    pub unlabeled: Option<UnlabeledPolicy>,
    pub include_ego: Option<bool>,
    pub split_seed: Option<u64>,
    pub per_class_train: Option<usize>,
    pub train_fraction: Option<f64>,
    pub val_fraction: Option<f64>,
    pub test_fraction: Option<f64>,

    // model
    pub h1: Option<usize>,
    pub h2: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub recipe: Option<String>,
    pub semantics: Option<MotifSemantics>,
    pub learning_rate: Option<f64>,
    pub weight_decay: Option<f64>,
    pub dropout: Option<f64>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub seed: Option<u64>,

    // protocol and output
    pub runs: Option<usize>,
    pub grid_seeds: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub model_out: Option<PathBuf>,
}

/// Values given on the command line; each replaces the file's value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dataset: Option<String>,
    pub recipe: Option<String>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub edge_file: Option<PathBuf>,
    pub feature_file: Option<PathBuf>,
    pub label_file: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().trim().to_string())
    }

    /// Relative paths in a config file are resolved against its directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.data_dir,
            &mut self.edge_file,
            &mut self.feature_file,
            &mut self.label_file,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f; } )* };
        }
        set!(dataset, recipe, runs, seed, threads, out, edge_file, feature_file, label_file);
    }

    pub fn model_config(&self) -> Result<ModelConfig, CliError> {
        let mut c = ModelConfig::default();
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        take!(h1, h2, hidden_dim, semantics, max_epochs, patience, seed);
        if let Some(r) = &self.recipe {
            c.recipe = r.parse::<MixRecipe>().map_err(|e| CliError::Config(format!("recipe: {e}")))?;
        }
        let o = &mut c.optimizer;
        if let Some(v) = self.learning_rate {
            o.learning_rate = v;
        }
        if let Some(v) = self.weight_decay {
            o.weight_decay = v;
        }
        if let Some(v) = self.dropout {
            o.dropout = v;
        }
        c.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn runs(&self) -> Result<usize, CliError> {
        match self.runs {
            Some(0) => Err(CliError::Config("runs must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(100),
        }
    }

    fn split_spec(&self, base: SplitSpec) -> SplitSpec {
        SplitSpec {
            per_class_train: self.per_class_train.unwrap_or(base.per_class_train),
            train_fraction: self.train_fraction.unwrap_or(base.train_fraction),
            val_fraction: self.val_fraction.unwrap_or(base.val_fraction),
            test_fraction: self.test_fraction.unwrap_or(base.test_fraction),
        }
    }

    fn load_options(&self) -> LoadOptions {
        let mut o = LoadOptions::default();
        if let Some(v) = self.row_normalize {
            o.planetoid.row_normalize = v;
            o.ego.row_normalize = v;
        }
        if let Some(v) = self.validation_size {
            o.planetoid.validation_size = v;
        }
        if let Some(v) = self.unlabeled {
            o.ego.unlabeled = v;
        }
        if let Some(v) = self.include_ego {
            o.ego.include_ego = v;
        }
        o.ego_split = self.split_spec(o.ego_split);
        o.split_seed = self.split_seed.unwrap_or(0);
        o
    }

    /// Loads the configured dataset with its split: a named one from the data
    /// directory, or the generic three-file format with a seeded stratified
    /// split (by default 40% / 20% / 40%, at least one training node per class).
    pub fn load_dataset(&self) -> Result<(Dataset, Splits), CliError> {
        let (d, splits) = self.load(true)?;
        Ok((d, splits.expect("splits requested")))
    }

    /// Loads the graph alone; no split is drawn for the generic format.
    pub fn load_graph(&self) -> Result<Dataset, CliError> {
        Ok(self.load(false)?.0)
    }

    fn load(&self, with_splits: bool) -> Result<(Dataset, Option<Splits>), CliError> {
        let generic = [&self.edge_file, &self.feature_file, &self.label_file];
        match (&self.dataset, generic.iter().filter(|f| f.is_some()).count()) {
            (Some(_), n) if n > 0 => Err(CliError::Config(
                "give either `dataset` or `edge_file`/`feature_file`/`label_file`, not both".into(),
            )),
            (Some(name), _) => {
                let name: DatasetName = name.parse().map_err(|e: mgcmn::Error| CliError::Config(e.to_string()))?;
                let root = match &self.data_dir {
                    Some(d) => d.clone(),
                    None => std::env::var_os(DATA_DIR_ENV).map(PathBuf::from).ok_or_else(|| {
                        CliError::Config(format!("no data directory: set `data_dir` or {DATA_DIR_ENV}"))
                    })?,
                };
                let (d, s) = load_named(&root, &name, &self.load_options())?;
                Ok((d, Some(s)))
            }
            (None, 3) => {
                let mut d = load_generic(
                    self.edge_file.as_deref().unwrap(),
                    self.feature_file.as_deref().unwrap(),
                    self.label_file.as_deref().unwrap(),
                )?;
                if self.row_normalize.unwrap_or(false) {
                    let x = d.graph.features().row_normalized();
                    d.graph = d.graph.with_features(x)?;
                }
                if !with_splits {
                    return Ok((d, None));
                }
                let spec = self.split_spec(SplitSpec::ego_default());
                let splits = make_splits(&d, &spec, self.split_seed.unwrap_or(0))?;
                Ok((d, Some(splits)))
            }
            (None, 0) => Err(CliError::Config("no dataset: set `dataset` or the generic file triple".into())),
            (None, _) => Err(CliError::Config(
                "the generic format needs all of `edge_file`, `feature_file` and `label_file`".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("h1 = 2\nlearning_rat = 0.1\n").unwrap_err();
        assert!(err.contains("learning_rat"), "{err}");
    }

    #[test]
    fn type_errors_are_rejected() {
        assert!(RunConfig::parse("h1 = \"two\"").is_err());
        assert!(RunConfig::parse("semantics = \"sideways\"").is_err());
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::parse("seed = 3\nrecipe = \"edge:1\"\nruns = 10").unwrap();
        c.apply(Overrides {
            seed: Some(7),
            ..Overrides::default()
        });
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.runs, Some(10));
        assert_eq!(c.model_config().unwrap().seed, 7);
    }

    #[test]
    fn model_values_are_validated() {
        let c = RunConfig::parse("dropout = 1.5").unwrap();
        assert!(matches!(c.model_config(), Err(CliError::Config(_))));
        let c = RunConfig::parse("recipe = \"edge:1,square:2\"").unwrap();
        assert!(matches!(c.model_config(), Err(CliError::Config(m)) if m.contains("square")));
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let mut c = RunConfig::parse("edge_file = \"g.edges\"\ndata_dir = \"/abs\"").unwrap();
        c.resolve_paths(Path::new("/cfg"));
        assert_eq!(c.edge_file.unwrap(), PathBuf::from("/cfg/g.edges"));
        assert_eq!(c.data_dir.unwrap(), PathBuf::from("/abs"));
    }

    #[test]
    fn shipped_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "toml") {
                let c = RunConfig::from_file(&path).unwrap();
                c.model_config().unwrap();
                seen += 1;
            }
        }
        assert!(seen >= 7);
    }
}
