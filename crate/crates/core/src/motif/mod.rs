//! Motif adjacency matrices, their normalization and mixing, and
//! clustering statistics.
//!
//! Entry `(u, v)` of a motif matrix counts the motif instances that contain
//! both `u` and `v`; the diagonal entry `(v, v)` counts the instances that
//! contain `v`. Instances are distinct subgraphs `(V_S, E_S)`, so a triangle
//! is counted once and a wedge once per (center, leaf pair).

mod kernels;
mod mix;
mod oracle;
mod stats;

use serde::{Deserialize, Serialize};

pub use kernels::{motif_matrix, triangle_motif_matrix, wedge_motif_matrix, wedge_motif_matrix_with};
pub use mix::{mix_matrices, mix_matrices_with, normalize_symmetric, MatrixSource, MixOutcome, MixRecipe};
pub use oracle::{
    enumerate_motif_instances, enumerate_motif_instances_capped, motif_matrix_oracle,
    motif_matrix_oracle_capped, MotifInstance, MotifSpec, Pattern, DEFAULT_ORACLE_CAP,
};
pub use stats::{clustering_coefficient, motif_stats, wedge_count, MotifStats};

/// Which pairs a motif instance contributes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifSemantics {
    /// `(u, v)` counts instances whose node set holds both `u` and `v`.
    #[default]
    CoOccurrence,
    /// `(u, v)` counts instances whose edge set holds the edge `{u, v}`.
    /// Differs from co-occurrence only for wedge leaf pairs.
    EdgeInInstance,
}

impl std::str::FromStr for MotifSemantics {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "co_occurrence" => Ok(Self::CoOccurrence),
            "edge_in_instance" => Ok(Self::EdgeInInstance),
            other => Err(crate::Error::Config(format!(
                "unknown motif semantics `{other}` (expected co_occurrence or edge_in_instance)"
            ))),
        }
    }
}

/// Motifs with optimized kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifKind {
    Triangle,
    Wedge,
}
