//! Central finite-difference verification of the hand-written backward pass.

use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{Model, ModelConfig};
use crate::motif::MixRecipe;

/// Step for central differences.
pub const DEFAULT_STEP: f64 = 1e-6;
/// Largest accepted per-coordinate relative error.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Denominator floor of the relative error. Central differences of a loss of
/// order 1 carry roughly `1e-16 / h = 1e-10` of rounding noise, so for
/// gradients below this floor the check compares absolute errors against
/// `tolerance * floor`.
pub const RELATIVE_FLOOR: f64 = 1e-2;

/// Architectures checked by default: `(h1, h2)`.
pub const DEFAULT_SHAPES: [(usize, usize); 4] = [(1, 0), (1, 1), (2, 0), (2, 1)];

const FIXTURE_EDGES: [(usize, usize); 19] = [
    (0, 1),
    (0, 2),
    (1, 2),
    (1, 3),
    (2, 3),
    (3, 4),
    (4, 5),
    (4, 6),
    (5, 6),
    (6, 7),
    (7, 8),
    (7, 9),
    (8, 9),
    (8, 10),
    (9, 10),
    (10, 11),
    (2, 5),
    (0, 11),
    (3, 9),
];

/// Labeled nodes used for the loss on the fixture.
pub const FIXTURE_MASK: [usize; 8] = [0, 1, 3, 4, 6, 8, 9, 11];

/// The bundled 12-node graph: triangles, wedges and a ring of cross edges,
/// five features per node and three classes.
pub fn fixture_graph() -> Graph {
    let (g, _) = Graph::from_edges(12, &FIXTURE_EDGES).expect("fixture edges are valid");
    // deterministic, irregular, nonnegative features
    let x = DenseMatrix::from_fn(12, 5, |i, j| (((i * 7 + j * 3) % 11) as f64 + 0.5) / 11.0 + 0.1 * ((i + j) % 2) as f64);
    let labels = (0..12).map(|v| Some(v * 3 / 12)).collect();
    g.with_features(x.row_normalized())
        .and_then(|g| g.with_labels(labels, 3))
        .expect("fixture is consistent")
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckOptions {
    pub step: f64,
    pub tolerance: f64,
    pub shapes: Vec<(usize, usize)>,
    pub recipe: MixRecipe,
    pub hidden_dim: usize,
    pub weight_decay: f64,
    /// Must be 0: finite differences need a deterministic loss.
    pub dropout: f64,
    pub seed: u64,
    /// Test hook: scales the analytic gradient by `1 + 1e-3` so the check
    /// must fail.
    pub inject_error: bool,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            tolerance: DEFAULT_TOLERANCE,
            shapes: DEFAULT_SHAPES.to_vec(),
            recipe: "edge:8,triangle:1,wedge:2".parse().expect("valid recipe"),
            hidden_dim: 4,
            weight_decay: 5e-4,
            dropout: 0.0,
            seed: 0,
            inject_error: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeReport {
    pub h1: usize,
    pub h2: usize,
    pub coordinates: usize,
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    /// `(layer, row, col)` of the largest relative error.
    pub worst: (usize, usize, usize),
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub step: f64,
    pub tolerance: f64,
    pub max_relative_error: f64,
    pub shapes: Vec<ShapeReport>,
    pub passed: bool,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Compares `model`'s analytic gradient with central differences of
/// [`Model::loss`] on every weight coordinate.
pub fn check_model(
    model: &Model,
    x: &DenseMatrix,
    labels: &[Option<usize>],
    mask: &[usize],
    weight_decay: f64,
    step: f64,
    inject_error: bool,
) -> Result<(usize, f64, f64, (usize, usize, usize))> {
    if model.dropout() > 0.0 {
        return Err(Error::Config(
            "gradient check needs dropout = 0: a stochastic loss has no finite-difference gradient".into(),
        ));
    }
    let (_, mut grads) = model.loss_and_gradients(x, labels, mask, weight_decay, None)?;
    if inject_error {
        for g in &mut grads {
            *g = g.scale(1.0 + 1e-3);
        }
    }
    let mut probe = model.clone();
    let mut count = 0;
    let (mut max_rel, mut max_abs, mut worst) = (0.0f64, 0.0f64, (0, 0, 0));
    for (k, g) in grads.iter().enumerate() {
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let w0 = model.layers()[k].params.weight.get(i, j);
                probe.layers_mut()[k].params.weight.set(i, j, w0 + step);
                let up = probe.loss(x, labels, mask, weight_decay)?;
                probe.layers_mut()[k].params.weight.set(i, j, w0 - step);
                let down = probe.loss(x, labels, mask, weight_decay)?;
                probe.layers_mut()[k].params.weight.set(i, j, w0);
                let numeric = (up - down) / (2.0 * step);
                let analytic = g.get(i, j);
                let rel = relative_error(analytic, numeric);
                max_abs = max_abs.max((analytic - numeric).abs());
                if rel > max_rel || count == 0 {
                    max_rel = rel;
                    worst = (k, i, j);
                }
                count += 1;
            }
        }
    }
    Ok((count, max_rel, max_abs, worst))
}

/// Runs the check for every requested architecture on `graph`.
pub fn run_gradcheck_on(graph: &Graph, mask: &[usize], options: &GradcheckOptions) -> Result<GradcheckReport> {
    if options.dropout != 0.0 {
        return Err(Error::Config(format!(
            "gradient check refuses dropout = {}: finite differences need a deterministic loss",
            options.dropout
        )));
    }
    if !(options.step > 0.0) {
        return Err(Error::Config("step must be positive".into()));
    }
    let mut shapes = Vec::new();
    for &(h1, h2) in &options.shapes {
        let mut config = ModelConfig {
            h1,
            h2,
            hidden_dim: options.hidden_dim,
            recipe: options.recipe.clone(),
            seed: options.seed,
            ..ModelConfig::default()
        };
        config.optimizer.dropout = 0.0;
        config.optimizer.weight_decay = options.weight_decay;
        let model = Model::build(&config, graph)?;
        let (coordinates, max_rel, max_abs, worst) = check_model(
            &model,
            graph.features(),
            graph.labels(),
            mask,
            options.weight_decay,
            options.step,
            options.inject_error,
        )?;
        shapes.push(ShapeReport {
            h1,
            h2,
            coordinates,
            max_relative_error: max_rel,
            max_absolute_error: max_abs,
            worst,
            passed: max_rel < options.tolerance,
        });
    }
    let max_relative_error = shapes.iter().map(|s| s.max_relative_error).fold(0.0, f64::max);
    Ok(GradcheckReport {
        step: options.step,
        tolerance: options.tolerance,
        max_relative_error,
        passed: shapes.iter().all(|s| s.passed),
        shapes,
    })
}

/// Runs the check on the bundled fixture graph.
pub fn run_gradcheck(options: &GradcheckOptions) -> Result<GradcheckReport> {
    run_gradcheck_on(&fixture_graph(), &FIXTURE_MASK, options)
}
