use serde::Serialize;

use super::kernels;
use crate::error::{Error, Result};
use crate::graph::{build_adjacency, Graph};

/// Number of wedges (paths on three nodes), `Σ_v C(d(v), 2)`.
pub fn wedge_count(graph: &Graph) -> u64 {
    (0..graph.n_nodes())
        .map(|v| {
            let d = graph.degree_unchecked(v) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum()
}

fn triangle_count(graph: &Graph) -> Result<u64> {
    let t = kernels::triangle_motif_matrix(&build_adjacency(graph))?;
    let trace: f64 = t.diagonal().iter().sum();
    Ok(trace as u64 / 3)
}

/// Global clustering coefficient `3 * triangles / wedges`.
pub fn clustering_coefficient(graph: &Graph) -> Result<f64> {
    let wedges = wedge_count(graph);
    if wedges == 0 {
        return Err(Error::UndefinedClusteringCoefficient);
    }
    Ok(3.0 * triangle_count(graph)? as f64 / wedges as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotifStats {
    pub nodes: usize,
    pub edges: usize,
    pub triangles: u64,
    pub wedges: u64,
    /// `None` when the graph has no wedges.
    pub clustering_coefficient: Option<f64>,
    pub nnz_adjacency: usize,
    pub nnz_triangle: usize,
    pub nnz_wedge: usize,
    pub max_degree: usize,
    /// `2 |E| D`, the bound on the wedge matrix's off-diagonal support.
    pub bound_2ed: u64,
    pub wedge_bound_holds: bool,
    /// Every off-diagonal triangle entry sits on an edge.
    pub triangle_support_holds: bool,
}

/// Counts and sparsity figures for the triangle and wedge matrices.
pub fn motif_stats(graph: &Graph) -> Result<MotifStats> {
    let a = build_adjacency(graph);
    let t = kernels::triangle_motif_matrix(&a)?;
    let w = kernels::wedge_motif_matrix(&a)?;
    let triangles = t.diagonal().iter().sum::<f64>() as u64 / 3;
    let wedges = wedge_count(graph);
    let max_degree = graph.max_degree();
    let bound_2ed = 2 * graph.n_edges() as u64 * max_degree as u64;
    let triangle_support_holds = t.iter().all(|(r, c, _)| r == c || a.contains(r, c));
    // the bound covers off-diagonal pairs reachable in one or two steps
    let off_diagonal_wedge = w.iter().filter(|&(r, c, _)| r != c).count() as u64;
    Ok(MotifStats {
        nodes: graph.n_nodes(),
        edges: graph.n_edges(),
        triangles,
        wedges,
        clustering_coefficient: (wedges > 0).then(|| 3.0 * triangles as f64 / wedges as f64),
        nnz_adjacency: a.nnz(),
        nnz_triangle: t.nnz(),
        nnz_wedge: w.nnz(),
        max_degree,
        bound_2ed,
        wedge_bound_holds: off_diagonal_wedge <= bound_2ed,
        triangle_support_holds,
    })
}
