//! Dense/sparse layers with hand-written forward and backward passes,
//! Glorot initialization, dropout, cross-entropy and Adam.

mod adam;
mod dropout;
mod init;
mod layers;
mod loss;

pub use adam::{adam_step, OptimizerConfig};
pub use dropout::dropout_forward;
pub use init::{glorot_init, glorot_init_with};
pub use layers::{
    apply_activation, backward, forward_stack, gcn_layer_forward, mlp_layer_forward, spmm, spmm_transpose,
    Activation, Layer, LayerParams, LayerRole, LayerTape, Tape,
};
pub use loss::{cross_entropy_loss, softmax_cross_entropy_grad};

pub use crate::dense::DenseMatrix;
