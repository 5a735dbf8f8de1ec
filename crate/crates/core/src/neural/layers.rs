//! Graph-convolution and perceptron layers, stacked forward with a tape and
//! differentiated by hand.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dropout_forward;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Row count above which `spmm` splits rows across threads. Each output row
/// is computed independently, so the result does not depend on the split.
const PARALLEL_ROWS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Softmax,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRole {
    /// Aggregates over the propagation matrix before the weight product.
    Gcn,
    Mlp,
}

/// Weight matrix (`in_dim x out_dim`, no bias) with its Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weight: DenseMatrix,
    pub adam_m: DenseMatrix,
    pub adam_v: DenseMatrix,
}

impl LayerParams {
    pub fn new(weight: DenseMatrix) -> Self {
        let (r, c) = weight.shape();
        Self {
            weight,
            adam_m: DenseMatrix::zeros(r, c),
            adam_v: DenseMatrix::zeros(r, c),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub role: LayerRole,
    pub activation: Activation,
    pub params: LayerParams,
}

/// Sparse-dense product `S X`.
pub fn spmm(s: &SparseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    if s.dim() != x.rows() {
        return Err(Error::shape(
            "spmm",
            format!("{}x{} sparse times {}x{}", s.dim(), s.dim(), x.rows(), x.cols()),
        ));
    }
    let cols = x.cols();
    let mut out = DenseMatrix::zeros(s.dim(), cols);
    if cols == 0 {
        return Ok(out);
    }
    let fill = |(r, out_row): (usize, &mut [f64])| {
        let (idx, vals) = s.row(r);
        for (&c, &v) in idx.iter().zip(vals) {
            for (o, &b) in out_row.iter_mut().zip(x.row(c)) {
                *o += v * b;
            }
        }
    };
    if s.dim() >= PARALLEL_ROWS {
        out.as_mut_slice().par_chunks_mut(cols).enumerate().for_each(fill);
    } else {
        out.as_mut_slice().chunks_mut(cols).enumerate().for_each(fill);
    }
    Ok(out)
}

/// `Sᵀ X` without forming the transpose.
pub fn spmm_transpose(s: &SparseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    if s.dim() != x.rows() {
        return Err(Error::shape(
            "spmm_transpose",
            format!("({}x{})ᵀ times {}x{}", s.dim(), s.dim(), x.rows(), x.cols()),
        ));
    }
    let mut out = DenseMatrix::zeros(s.dim(), x.cols());
    for (r, c, v) in s.iter() {
        let src = x.row(r);
        for (o, &b) in out.row_mut(c).iter_mut().zip(src) {
            *o += v * b;
        }
    }
    Ok(out)
}

pub fn apply_activation(m: DenseMatrix, activation: Activation) -> DenseMatrix {
    match activation {
        Activation::Relu => m.relu(),
        Activation::Softmax => m.softmax_rows(),
        Activation::None => m,
    }
}

fn check_weight(op: &'static str, h: &DenseMatrix, params: &LayerParams) -> Result<()> {
    if h.cols() != params.in_dim() {
        return Err(Error::shape(
            op,
            format!("input has {} columns, weights expect {}", h.cols(), params.in_dim()),
        ));
    }
    Ok(())
}

/// `act(S H W)`, evaluated as `S (H W)`.
pub fn gcn_layer_forward(
    s: &SparseMatrix,
    h: &DenseMatrix,
    params: &LayerParams,
    activation: Activation,
) -> Result<DenseMatrix> {
    check_weight("gcn_layer_forward", h, params)?;
    if s.dim() != h.rows() {
        return Err(Error::shape(
            "gcn_layer_forward",
            format!("propagation matrix is {}x{}, input has {} rows", s.dim(), s.dim(), h.rows()),
        ));
    }
    let hw = h.matmul(&params.weight)?;
    Ok(apply_activation(spmm(s, &hw)?, activation))
}

/// `act(H W)`.
pub fn mlp_layer_forward(h: &DenseMatrix, params: &LayerParams, activation: Activation) -> Result<DenseMatrix> {
    check_weight("mlp_layer_forward", h, params)?;
    Ok(apply_activation(h.matmul(&params.weight)?, activation))
}

/// Activations recorded for one layer during a forward pass.
#[derive(Debug, Clone)]
pub struct LayerTape {
    /// Layer input after dropout.
    pub input: DenseMatrix,
    /// Per-entry dropout scale, if dropout was applied.
    pub dropout_scale: Option<DenseMatrix>,
    pub output: DenseMatrix,
}

#[derive(Debug, Clone)]
pub struct Tape {
    pub layers: Vec<LayerTape>,
}

impl Tape {
    /// Output of the final layer.
    pub fn output(&self) -> &DenseMatrix {
        &self.layers.last().expect("tape of a non-empty stack").output
    }
}

/// Runs the stack on `x`, recording what [`backward`] needs. With
/// `dropout = Some((rate, rng))`, every layer input is dropped out.
pub fn forward_stack<R: Rng>(
    layers: &[Layer],
    s: &SparseMatrix,
    x: &DenseMatrix,
    mut dropout: Option<(f64, &mut R)>,
) -> Result<Tape> {
    if layers.is_empty() {
        return Err(Error::InvalidInput("empty layer stack".into()));
    }
    let mut tapes: Vec<LayerTape> = Vec::with_capacity(layers.len());
    for layer in layers {
        let prev = tapes.last().map_or(x, |t| &t.output);
        let (input, dropout_scale) = match dropout.as_mut() {
            Some((rate, rng)) => dropout_forward(prev, *rate, *rng, true),
            None => (prev.clone(), None),
        };
        let output = match layer.role {
            LayerRole::Gcn => gcn_layer_forward(s, &input, &layer.params, layer.activation)?,
            LayerRole::Mlp => mlp_layer_forward(&input, &layer.params, layer.activation)?,
        };
        tapes.push(LayerTape {
            input,
            dropout_scale,
            output,
        });
    }
    Ok(Tape { layers: tapes })
}

/// Weight gradients for every layer of the stack.
///
/// `upstream` is the loss gradient with respect to the final layer's output,
/// except when the final activation is softmax: then it is the gradient with
/// respect to the softmax logits (the fused cross-entropy form from
/// [`super::softmax_cross_entropy_grad`]). Softmax is only supported on the
/// final layer.
pub fn backward(layers: &[Layer], s: &SparseMatrix, tape: &Tape, upstream: &DenseMatrix) -> Result<Vec<DenseMatrix>> {
    if tape.layers.len() != layers.len() {
        return Err(Error::shape(
            "backward",
            format!("tape has {} layers, stack has {}", tape.layers.len(), layers.len()),
        ));
    }
    if !upstream.same_shape(tape.output()) {
        return Err(Error::shape(
            "backward",
            format!("upstream gradient {:?} vs output {:?}", upstream.shape(), tape.output().shape()),
        ));
    }
    let mut grads = vec![DenseMatrix::zeros(0, 0); layers.len()];
    let mut grad_out = upstream.clone();
    for k in (0..layers.len()).rev() {
        let layer = &layers[k];
        let rec = &tape.layers[k];
        // gradient with respect to the pre-activation
        let grad_pre = match layer.activation {
            Activation::Softmax if k + 1 == layers.len() => grad_out,
            Activation::Softmax => {
                return Err(Error::InvalidInput(
                    "softmax is only differentiable here as the final layer".into(),
                ))
            }
            Activation::Relu => {
                let mut g = grad_out;
                for (gv, &o) in g.as_mut_slice().iter_mut().zip(rec.output.as_slice()) {
                    if o <= 0.0 {
                        *gv = 0.0;
                    }
                }
                g
            }
            Activation::None => grad_out,
        };
        // gradient with respect to H W
        let grad_hw = match layer.role {
            LayerRole::Gcn => spmm_transpose(s, &grad_pre)?,
            LayerRole::Mlp => grad_pre,
        };
        grads[k] = rec.input.transpose_matmul(&grad_hw)?;
        if k == 0 {
            break;
        }
        let mut grad_in = grad_hw.matmul_transpose(&layer.params.weight)?;
        if let Some(scale) = &rec.dropout_scale {
            grad_in = grad_in.hadamard(scale)?;
        }
        grad_out = grad_in;
    }
    Ok(grads)
}
