//! Symmetric normalization and weighted mixing of propagation matrices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{kernels, MotifSemantics};
use crate::error::{Error, Result};
use crate::graph::{build_adjacency, Graph};
use crate::sparse::SparseMatrix;

/// `D^{-1/2} M' D^{-1/2}` with `M' = M + I` when `add_self_loops` is set and
/// `D` the row sums of `M'`. Rows summing to zero stay empty.
pub fn normalize_symmetric(m: &SparseMatrix, add_self_loops: bool) -> Result<SparseMatrix> {
    if let Some((r, c, v)) = m.iter().find(|&(_, _, v)| v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "cannot normalize: negative entry {v} at ({r}, {c})"
        )));
    }
    let looped;
    let base = if add_self_loops {
        looped = m.add_scaled(&SparseMatrix::identity(m.dim()), 1.0)?;
        &looped
    } else {
        m
    };
    let inv_sqrt: Vec<f64> = base
        .row_sums()
        .into_iter()
        .map(|s| if s > 0.0 { 1.0 / s.sqrt() } else { 0.0 })
        .collect();
    Ok(base.map_entries(|r, c, v| v * inv_sqrt[r] * inv_sqrt[c]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSource {
    Edge,
    Triangle,
    Wedge,
}

impl MatrixSource {
    pub fn name(self) -> &'static str {
        match self {
            MatrixSource::Edge => "edge",
            MatrixSource::Triangle => "triangle",
            MatrixSource::Wedge => "wedge",
        }
    }
}

impl FromStr for MatrixSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "edge" | "a" => Ok(Self::Edge),
            "triangle" | "tri" => Ok(Self::Triangle),
            "wedge" => Ok(Self::Wedge),
            other => Err(Error::Config(format!(
                "unknown matrix source `{other}` (expected edge, triangle or wedge)"
            ))),
        }
    }
}

/// Weighted combination of normalized propagation matrices, e.g.
/// `edge:8,triangle:1,wedge:3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MixRecipe {
    components: Vec<(MatrixSource, f64)>,
}

impl MixRecipe {
    pub fn new(components: Vec<(MatrixSource, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("mix recipe has no components".into()));
        }
        for &(src, w) in &components {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Config(format!(
                    "weight {w} for {} must be a nonnegative number",
                    src.name()
                )));
            }
        }
        if components.iter().all(|&(_, w)| w == 0.0) {
            return Err(Error::Config("mix recipe weights are all zero".into()));
        }
        Ok(Self { components })
    }

    /// Plain GCN propagation: the self-looped normalized adjacency alone.
    pub fn edge_only() -> Self {
        Self {
            components: vec![(MatrixSource::Edge, 1.0)],
        }
    }

    pub fn components(&self) -> &[(MatrixSource, f64)] {
        &self.components
    }

    /// Weights rescaled to sum to one, in component order.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let total: f64 = self.components.iter().map(|&(_, w)| w).sum();
        self.components.iter().map(|&(_, w)| w / total).collect()
    }
}

impl FromStr for MixRecipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut components = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, weight) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("recipe component `{part}` is not `source:weight`")))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad weight in recipe component `{part}`")))?;
            components.push((name.parse()?, weight));
        }
        Self::new(components)
    }
}

impl TryFrom<String> for MixRecipe {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MixRecipe> for String {
    fn from(r: MixRecipe) -> String {
        r.to_string()
    }
}

impl fmt::Display for MixRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (src, w)) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", src.name(), w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MixOutcome {
    pub matrix: SparseMatrix,
    /// Weights actually applied, after dropping empty components and rescaling.
    pub weights: Vec<(MatrixSource, f64)>,
    pub dropped: Vec<MatrixSource>,
}

pub fn mix_matrices(recipe: &MixRecipe, graph: &Graph) -> Result<SparseMatrix> {
    Ok(mix_matrices_with(recipe, graph, MotifSemantics::CoOccurrence)?.matrix)
}

/// Builds and normalizes every component, then sums them with weights
/// rescaled to one. The edge matrix gets self-loops before normalization;
/// motif matrices already carry their own diagonal and do not. A motif
/// component with no entries is dropped with a warning.
pub fn mix_matrices_with(recipe: &MixRecipe, graph: &Graph, semantics: MotifSemantics) -> Result<MixOutcome> {
    let adjacency = build_adjacency(graph);
    let mut parts = Vec::new();
    let mut dropped = Vec::new();
    for &(src, w) in recipe.components() {
        if w == 0.0 {
            continue;
        }
        let normalized = match src {
            MatrixSource::Edge => normalize_symmetric(&adjacency, true)?,
            MatrixSource::Triangle => normalize_symmetric(&kernels::triangle_motif_matrix(&adjacency)?, false)?,
            MatrixSource::Wedge => {
                normalize_symmetric(&kernels::wedge_motif_matrix_with(&adjacency, semantics)?, false)?
            }
        };
        if normalized.nnz() == 0 {
            log::warn!("{} matrix is empty for this graph; dropping it from the mix", src.name());
            dropped.push(src);
            continue;
        }
        parts.push((src, w, normalized));
    }
    if parts.is_empty() {
        return Err(Error::InvalidInput(format!(
            "every component of recipe `{recipe}` is empty on this graph"
        )));
    }
    let total: f64 = parts.iter().map(|(_, w, _)| w).sum();
    let mut matrix = SparseMatrix::zeros(graph.n_nodes());
    let mut weights = Vec::with_capacity(parts.len());
    for (src, w, m) in &parts {
        let w = w / total;
        matrix = matrix.add_scaled(m, w)?;
        weights.push((*src, w));
    }
    Ok(MixOutcome {
        matrix,
        weights,
        dropped,
    })
}
