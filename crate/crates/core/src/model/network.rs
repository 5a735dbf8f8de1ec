use std::sync::Arc;

use super::ModelConfig;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::mix_matrices_with;
use crate::neural::{
    backward, cross_entropy_loss, forward_stack, glorot_init_with, softmax_cross_entropy_grad, Activation, Layer,
    LayerParams, LayerRole, Tape,
};
use crate::random::{seeded, SeededRng};
use crate::sparse::SparseMatrix;

/// `h1` graph-convolution layers followed by `h2` perceptron layers over a
/// fixed propagation matrix. Hidden layers use ReLU and the last layer
/// softmax, including when `h2 = 0` and the last layer is a convolution.
#[derive(Debug, Clone)]
pub struct Model {
    mixed: Arc<SparseMatrix>,
    layers: Vec<Layer>,
    dropout: f64,
}

impl Model {
    /// Mixes the propagation matrix from the recipe and initializes weights.
    pub fn build(config: &ModelConfig, graph: &Graph) -> Result<Self> {
        config.validate()?;
        let mixed = mix_matrices_with(&config.recipe, graph, config.semantics)?.matrix;
        Self::with_matrix(config, Arc::new(mixed), graph.feature_dim(), graph.n_classes())
    }

    /// Glorot-initialized model over an already mixed matrix; weights depend
    /// only on the config (including its seed) and the dimensions.
    pub fn with_matrix(config: &ModelConfig, mixed: Arc<SparseMatrix>, in_dim: usize, n_classes: usize) -> Result<Self> {
        config.validate()?;
        if in_dim == 0 {
            return Err(Error::InvalidInput("graph has no node features".into()));
        }
        if n_classes == 0 {
            return Err(Error::InvalidInput("graph has no classes".into()));
        }
        let mut rng = seeded(config.seed);
        let dims = config.layer_dims(in_dim, n_classes);
        let depth = dims.len();
        let layers = dims
            .into_iter()
            .enumerate()
            .map(|(k, (i, o))| {
                Ok(Layer {
                    role: if k < config.h1 { LayerRole::Gcn } else { LayerRole::Mlp },
                    activation: if k + 1 == depth { Activation::Softmax } else { Activation::Relu },
                    params: LayerParams::new(glorot_init_with(i, o, &mut rng)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(mixed, layers, config.optimizer.dropout)
    }

    /// Assembles a model from explicit layers, checking that convolutions
    /// precede perceptrons, shapes chain, and only the last layer is softmax.
    pub fn from_layers(mixed: Arc<SparseMatrix>, layers: Vec<Layer>, dropout: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("model needs at least one layer".into()));
        }
        if layers[0].role != LayerRole::Gcn {
            return Err(Error::InvalidInput("first layer must be a graph convolution".into()));
        }
        if !mixed.is_symmetric(1e-12) {
            return Err(Error::InvalidInput("propagation matrix is not symmetric".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].role == LayerRole::Mlp && pair[1].role == LayerRole::Gcn {
                return Err(Error::InvalidInput(format!("layer {} is a convolution after a perceptron", k + 1)));
            }
            if pair[0].params.out_dim() != pair[1].params.in_dim() {
                return Err(Error::shape(
                    "Model::from_layers",
                    format!("layer {k} outputs {} but layer {} takes {}", pair[0].params.out_dim(), k + 1, pair[1].params.in_dim()),
                ));
            }
        }
        let last = layers.len() - 1;
        for (k, l) in layers.iter().enumerate() {
            let want = if k == last { Activation::Softmax } else { Activation::Relu };
            if l.activation != want {
                return Err(Error::InvalidInput(format!("layer {k} must use {want:?}, found {:?}", l.activation)));
            }
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::Config(format!("dropout must lie in [0, 1), got {dropout}")));
        }
        Ok(Self { mixed, layers, dropout })
    }

    pub fn mixed_matrix(&self) -> &SparseMatrix {
        &self.mixed
    }

    pub fn shared_matrix(&self) -> Arc<SparseMatrix> {
        Arc::clone(&self.mixed)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    pub fn set_dropout(&mut self, rate: f64) {
        assert!((0.0..1.0).contains(&rate));
        self.dropout = rate;
    }

    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.params.in_dim(), l.params.out_dim())).collect()
    }

    pub fn n_gcn_layers(&self) -> usize {
        self.layers.iter().filter(|l| l.role == LayerRole::Gcn).count()
    }

    fn check_input(&self, x: &DenseMatrix) -> Result<()> {
        if x.rows() != self.mixed.dim() {
            return Err(Error::shape(
                "Model::forward",
                format!("{} input rows for a {}-node propagation matrix", x.rows(), self.mixed.dim()),
            ));
        }
        Ok(())
    }

    /// Runs the network. With `training = Some(rng)` dropout is active and
    /// draws from `rng`; otherwise the pass is deterministic.
    pub fn forward(&self, x: &DenseMatrix, training: Option<&mut SeededRng>) -> Result<Tape> {
        self.check_input(x)?;
        let dropout = match training {
            Some(rng) if self.dropout > 0.0 => Some((self.dropout, rng)),
            _ => None,
        };
        forward_stack(&self.layers, &self.mixed, x, dropout)
    }

    /// Class probabilities `Z`, one row per node.
    pub fn predict(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.forward(x, None)?.layers.pop().expect("non-empty").output)
    }

    /// `weight_decay / 2 * ||W_0||^2`.
    pub fn l2_penalty(&self, weight_decay: f64) -> f64 {
        0.5 * weight_decay * self.layers[0].params.weight.sum_squares()
    }

    /// Masked cross-entropy plus the first-layer L2 penalty, with dropout
    /// disabled.
    pub fn loss(&self, x: &DenseMatrix, labels: &[Option<usize>], mask: &[usize], weight_decay: f64) -> Result<f64> {
        let z = self.predict(x)?;
        Ok(cross_entropy_loss(&z, labels, mask)? + self.l2_penalty(weight_decay))
    }

    /// Loss (as in [`Model::loss`], with dropout when `training` is given)
    /// and its exact gradient with respect to every weight matrix.
    pub fn loss_and_gradients(
        &self,
        x: &DenseMatrix,
        labels: &[Option<usize>],
        mask: &[usize],
        weight_decay: f64,
        training: Option<&mut SeededRng>,
    ) -> Result<(f64, Vec<DenseMatrix>)> {
        let tape = self.forward(x, training)?;
        let z = tape.output();
        let loss = cross_entropy_loss(z, labels, mask)? + self.l2_penalty(weight_decay);
        let upstream = softmax_cross_entropy_grad(z, labels, mask)?;
        let mut grads = backward(&self.layers, &self.mixed, &tape, &upstream)?;
        if weight_decay > 0.0 {
            grads[0].add_scaled_in_place(&self.layers[0].params.weight, weight_decay)?;
        }
        Ok((loss, grads))
    }
}
