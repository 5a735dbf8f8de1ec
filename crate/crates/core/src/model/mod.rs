//! The end-to-end classifier: graph-convolution layers over a mixed motif
//! matrix, perceptron layers on top, softmax output, and the training,
//! evaluation and experiment drivers around it.

mod config;
mod container;
mod network;
mod train;

pub use config::ModelConfig;
pub use container::{load_model, read_model, save_model, write_model, CONTAINER_MAGIC, CONTAINER_VERSION};
pub use network::Model;
pub use train::{
    accuracy, evaluate, grid_search, run_protocol, run_protocol_with_matrix, train, train_with_matrix, EpochRecord,
    GridRow, GridSearchResult, ProtocolResult, RunResult, TrainReport, DEFAULT_GRID_SEEDS,
};
