//! Motif-weighted graph convolution for semi-supervised node classification.
//!
//! The crate builds triangle and wedge motif matrices over an undirected
//! graph, mixes them with the normalized adjacency into a single propagation
//! operator, and trains a stack of graph-convolution layers followed by
//! perceptron layers on top of it. Forward and backward passes are written
//! by hand; [`gradcheck`] and the brute-force motif oracle in [`motif`]
//! verify them.

pub mod data;
pub mod dense;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod model;
pub mod motif;
pub mod neural;
pub mod oracle_check;
pub mod random;
pub mod sparse;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use graph::{build_adjacency, EdgeStats, Graph};
pub use sparse::SparseMatrix;
