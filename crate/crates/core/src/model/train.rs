use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{Model, ModelConfig};
use crate::data::Splits;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::{mix_matrices_with, MixRecipe};
use crate::neural::{adam_step, cross_entropy_loss};
use crate::random::seeded;
use crate::sparse::SparseMatrix;

/// Seeds averaged per recipe during grid search.
pub const DEFAULT_GRID_SEEDS: usize = 5;

/// Offset separating the dropout stream from the weight-initialization stream.
const DROPOUT_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose weights were restored (1-based).
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub val_loss: f64,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
    /// Excluded from serialized output so reports are byte-identical across
    /// repeated runs.
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Fraction of `mask` whose argmax prediction matches the label.
pub fn accuracy(z: &DenseMatrix, labels: &[Option<usize>], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask("accuracy over an empty node set"));
    }
    let mut hits = 0usize;
    for &v in mask {
        if v >= z.rows() {
            return Err(Error::NodeOutOfRange {
                node: v,
                n_nodes: z.rows(),
            });
        }
        let y = labels
            .get(v)
            .copied()
            .flatten()
            .ok_or_else(|| Error::InvalidInput(format!("masked node {v} has no label")))?;
        if z.argmax_row(v) == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / mask.len() as f64)
}

/// Test-time accuracy of `model` on `mask`.
pub fn evaluate(model: &Model, x: &DenseMatrix, labels: &[Option<usize>], mask: &[usize]) -> Result<f64> {
    accuracy(&model.predict(x)?, labels, mask)
}

fn check_splits(graph: &Graph, splits: &Splits) -> Result<()> {
    splits.validate(graph.n_nodes())?;
    if splits.validation.is_empty() {
        return Err(Error::EmptyMask("validation split is empty"));
    }
    if splits.test.is_empty() {
        return Err(Error::EmptyMask("test split is empty"));
    }
    Ok(())
}

/// Builds the mixed matrix from `config.recipe` and trains on it.
pub fn train(config: &ModelConfig, graph: &Graph, splits: &Splits) -> Result<(Model, TrainReport)> {
    config.validate()?;
    let mixed = mix_matrices_with(&config.recipe, graph, config.semantics)?.matrix;
    train_with_matrix(config, Arc::new(mixed), graph, splits)
}

/// Full-batch Adam on the training cross-entropy. After each step the
/// validation loss is measured without dropout; training stops once it has
/// not improved for `patience` epochs (0 disables stopping) and the weights
/// from the best validation epoch are restored.
pub fn train_with_matrix(
    config: &ModelConfig,
    mixed: Arc<SparseMatrix>,
    graph: &Graph,
    splits: &Splits,
) -> Result<(Model, TrainReport)> {
    let start = Instant::now();
    check_splits(graph, splits)?;
    let mut model = Model::with_matrix(config, mixed, graph.feature_dim(), graph.n_classes())?;
    let x = graph.features();
    let labels = graph.labels();
    let opt = &config.optimizer;
    let mut rng = seeded(config.seed ^ DROPOUT_STREAM);

    let mut epochs = Vec::with_capacity(config.max_epochs);
    let mut best: Option<(usize, f64, f64, Vec<DenseMatrix>)> = None;
    let mut since_best = 0usize;

    for epoch in 1..=config.max_epochs {
        let (train_loss, grads) =
            model.loss_and_gradients(x, labels, &splits.train, opt.weight_decay, Some(&mut rng))?;
        if !train_loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        for (layer, g) in model.layers_mut().iter_mut().zip(&grads) {
            adam_step(&mut layer.params, g, opt, epoch as u32)?;
        }

        let z = model.predict(x)?;
        let val_loss = cross_entropy_loss(&z, labels, &splits.validation)?;
        if !val_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let val_accuracy = accuracy(&z, labels, &splits.validation)?;
        log::debug!("epoch {epoch}: train {train_loss:.5} val {val_loss:.5} acc {val_accuracy:.4}");
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
        });

        if best.as_ref().map_or(true, |b| val_loss < b.1) {
            let weights = model.layers().iter().map(|l| l.params.weight.clone()).collect();
            best = Some((epoch, val_loss, val_accuracy, weights));
            since_best = 0;
        } else {
            since_best += 1;
            if config.patience > 0 && since_best >= config.patience {
                break;
            }
        }
    }

    let (best_epoch, val_loss, val_accuracy, weights) = best.expect("at least one epoch runs");
    for (layer, w) in model.layers_mut().iter_mut().zip(weights) {
        layer.params.weight = w;
    }
    let test_accuracy = evaluate(&model, x, labels, &splits.test)?;
    let report = TrainReport {
        epochs_run: epochs.len(),
        epochs,
        best_epoch,
        val_loss,
        val_accuracy,
        test_accuracy,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((model, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub test_accuracy: f64,
    pub val_accuracy: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolResult {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    /// Population standard deviation of the test accuracies.
    pub std: f64,
    pub runs: Vec<RunResult>,
}

impl ProtocolResult {
    fn from_runs(runs: Vec<RunResult>) -> Self {
        let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
        let n = accs.len() as f64;
        let mean = accs.iter().sum::<f64>() / n;
        let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            max: accs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: accs.iter().copied().fold(f64::INFINITY, f64::min),
            std: var.sqrt(),
            runs,
        }
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.test_accuracy).collect()
    }
}

/// Trains `n_runs` models with seeds `config.seed + i` and summarizes their
/// test accuracies.
pub fn run_protocol(config: &ModelConfig, graph: &Graph, splits: &Splits, n_runs: usize) -> Result<ProtocolResult> {
    config.validate()?;
    let mixed = mix_matrices_with(&config.recipe, graph, config.semantics)?.matrix;
    run_protocol_with_matrix(config, Arc::new(mixed), graph, splits, n_runs)
}

/// Like [`run_protocol`], reusing a prebuilt mixed matrix. Runs execute in
/// parallel on the current rayon pool; results are ordered by run index.
pub fn run_protocol_with_matrix(
    config: &ModelConfig,
    mixed: Arc<SparseMatrix>,
    graph: &Graph,
    splits: &Splits,
    n_runs: usize,
) -> Result<ProtocolResult> {
    if n_runs == 0 {
        return Err(Error::Config("n_runs must be at least 1".into()));
    }
    let runs = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            let cfg = ModelConfig {
                seed,
                ..config.clone()
            };
            let (_, report) = train_with_matrix(&cfg, Arc::clone(&mixed), graph, splits)?;
            log::info!("run {i} (seed {seed}): test accuracy {:.4}", report.test_accuracy);
            Ok(RunResult {
                seed,
                test_accuracy: report.test_accuracy,
                val_accuracy: report.val_accuracy,
                best_epoch: report.best_epoch,
                epochs_run: report.epochs_run,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProtocolResult::from_runs(runs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub index: usize,
    pub recipe: MixRecipe,
    pub mean_val_accuracy: f64,
    pub val_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchResult {
    pub best_index: usize,
    pub best: MixRecipe,
    pub rows: Vec<GridRow>,
}

/// Scores each recipe by mean validation accuracy over seeds
/// `base.seed .. base.seed + n_seeds`; the first recipe wins ties.
pub fn grid_search(
    base: &ModelConfig,
    graph: &Graph,
    splits: &Splits,
    grid: &[MixRecipe],
    n_seeds: usize,
) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(Error::Config("grid search needs at least one recipe".into()));
    }
    if n_seeds == 0 {
        return Err(Error::Config("grid search needs at least one seed".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (index, recipe) in grid.iter().enumerate() {
        let cfg = ModelConfig {
            recipe: recipe.clone(),
            ..base.clone()
        };
        let result = run_protocol(&cfg, graph, splits, n_seeds)?;
        let val_accuracies: Vec<f64> = result.runs.iter().map(|r| r.val_accuracy).collect();
        let mean_val_accuracy = val_accuracies.iter().sum::<f64>() / n_seeds as f64;
        log::info!("recipe {recipe}: mean validation accuracy {mean_val_accuracy:.4}");
        rows.push(GridRow {
            index,
            recipe: recipe.clone(),
            mean_val_accuracy,
            val_accuracies,
        });
    }
    let best_index = rows
        .iter()
        .fold(0, |best, r| if r.mean_val_accuracy > rows[best].mean_val_accuracy { r.index } else { best });
    Ok(GridSearchResult {
        best_index,
        best: grid[best_index].clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::uniform_matrix;
    use rand::Rng;

    /// Two 10-node cliques joined by one bridge; features are noisy class
    /// indicators so the task is learnable but not trivial.
    fn two_communities() -> (Graph, Splits) {
        let mut edges = Vec::new();
        for base in [0, 10] {
            for u in base..base + 10 {
                for v in u + 1..base + 10 {
                    edges.push((u, v));
                }
            }
        }
        edges.push((9, 10));
        let (g, _) = Graph::from_edges(20, &edges).unwrap();
        let mut rng = seeded(11);
        let mut x = uniform_matrix(20, 6, 0.5, &mut rng).map(f64::abs);
        for v in 0..20 {
            let c = v / 10;
            x.set(v, c, x.get(v, c) + rng.gen_range(0.0..0.6));
        }
        let labels = (0..20).map(|v| Some(v / 10)).collect();
        let g = g.with_features(x.row_normalized()).unwrap().with_labels(labels, 2).unwrap();
        let splits = Splits {
            train: vec![0, 1, 2, 3, 10, 11, 12, 13],
            validation: vec![4, 5, 14, 15],
            test: vec![6, 7, 8, 9, 16, 17, 18, 19],
        };
        (g, splits)
    }

    fn small_config() -> ModelConfig {
        ModelConfig {
            h1: 2,
            h2: 0,
            hidden_dim: 8,
            max_epochs: 100,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn accuracy_extremes() {
        let z = DenseMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert_eq!(accuracy(&z, &[Some(0), Some(1)], &[0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&z, &[Some(1), Some(0)], &[0, 1]).unwrap(), 0.0);
        assert!(accuracy(&z, &[Some(0), Some(1)], &[]).is_err());
    }

    #[test]
    fn first_epoch_loss_is_near_uniform() {
        let (g, s) = two_communities();
        let (_, r) = train(&small_config(), &g, &s).unwrap();
        let ln_l = 2f64.ln();
        assert!((r.epochs[0].train_loss - ln_l).abs() < 0.1 * ln_l, "{}", r.epochs[0].train_loss);
    }

    #[test]
    fn restored_weights_have_minimal_later_val_loss() {
        let (g, s) = two_communities();
        let (model, r) = train(&small_config(), &g, &s).unwrap();
        for e in &r.epochs[r.best_epoch - 1..] {
            assert!(r.val_loss <= e.val_loss);
        }
        let z = model.predict(g.features()).unwrap();
        let val = cross_entropy_loss(&z, g.labels(), &s.validation).unwrap();
        assert!((val - r.val_loss).abs() < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let (g, s) = two_communities();
        let a = train(&small_config(), &g, &s).unwrap().1;
        let b = train(&small_config(), &g, &s).unwrap().1;
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn rejects_empty_splits() {
        let (g, mut s) = two_communities();
        s.validation.clear();
        assert!(train(&small_config(), &g, &s).is_err());
    }

    #[test]
    fn divergence_reports_epoch() {
        let (g, s) = two_communities();
        let mut cfg = small_config();
        cfg.optimizer.learning_rate = 1e300;
        match train(&cfg, &g, &s) {
            Err(Error::Diverged { epoch }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {:?}", other.map(|r| r.1.test_accuracy)),
        }
    }

    #[test]
    fn single_run_protocol() {
        let (g, s) = two_communities();
        let p = run_protocol(&small_config(), &g, &s, 1).unwrap();
        assert_eq!(p.mean, p.max);
        assert_eq!(p.runs.len(), 1);
        assert!(run_protocol(&small_config(), &g, &s, 0).is_err());
    }

    #[test]
    fn protocol_is_reproducible() {
        let (g, s) = two_communities();
        let a = run_protocol(&small_config(), &g, &s, 5).unwrap();
        let b = run_protocol(&small_config(), &g, &s, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.mean <= a.max && a.min <= a.mean);
        assert_eq!(a.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn grid_search_ties_and_duplicates() {
        let (g, s) = two_communities();
        let r: MixRecipe = "edge:1".parse().unwrap();
        let one = grid_search(&small_config(), &g, &s, &[r.clone()], 2).unwrap();
        assert_eq!(one.best, r);
        let dup = grid_search(&small_config(), &g, &s, &[r.clone(), r.clone()], 2).unwrap();
        assert_eq!(dup.rows[0].val_accuracies, dup.rows[1].val_accuracies);
        assert_eq!(dup.best_index, 0);
        assert!(grid_search(&small_config(), &g, &s, &[], 2).is_err());
    }
}
