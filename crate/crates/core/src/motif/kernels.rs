//! Triangle and wedge motif matrices from a binary adjacency matrix.

use rayon::prelude::*;

use super::{MotifKind, MotifSemantics};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

fn check_adjacency(a: &SparseMatrix) -> Result<()> {
    for (r, c, v) in a.iter() {
        if r == c {
            return Err(Error::InvalidInput(format!(
                "adjacency has a nonzero diagonal entry at node {r}"
            )));
        }
        if v != 1.0 {
            return Err(Error::InvalidInput(format!(
                "adjacency entry ({r}, {c}) = {v} is not binary"
            )));
        }
    }
    if !a.is_structurally_symmetric() {
        return Err(Error::InvalidInput("adjacency is not symmetric".into()));
    }
    Ok(())
}

/// Size of the intersection of two sorted slices.
#[inline]
fn intersection_len(a: &[usize], b: &[usize]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Inserts the diagonal entry into an already sorted off-diagonal row.
fn with_diagonal(mut row: Vec<(usize, f64)>, r: usize, diag: u64) -> Vec<(usize, f64)> {
    if diag > 0 {
        let at = row.partition_point(|&(c, _)| c < r);
        row.insert(at, (r, diag as f64));
    }
    row
}

/// Triangle co-occurrence matrix: `(u, v)` is the number of triangles through
/// edge `{u, v}` and `(v, v)` the number of triangles at `v`.
///
/// Each edge is intersected once (from its lower endpoint) with a sorted
/// merge.
pub fn triangle_motif_matrix(a: &SparseMatrix) -> Result<SparseMatrix> {
    check_adjacency(a)?;
    let n = a.dim();
    let offsets = a.row_offsets();
    let cols = a.col_indices();

    // count per CSR slot, filled for the upper triangle only
    let upper: Vec<Vec<(usize, u64)>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let nu = a.row(u).0;
            let start = nu.partition_point(|&v| v <= u);
            nu[start..]
                .iter()
                .enumerate()
                .map(|(k, &v)| (offsets[u] + start + k, intersection_len(nu, a.row(v).0)))
                .collect()
        })
        .collect();

    let mut counts = vec![0u64; cols.len()];
    for (u, row) in upper.iter().enumerate() {
        for &(slot, c) in row {
            counts[slot] = c;
            let v = cols[slot];
            let back = offsets[v] + a.row(v).0.binary_search(&u).expect("symmetric");
            counts[back] = c;
        }
    }

    let rows = (0..n)
        .map(|u| {
            let range = offsets[u]..offsets[u + 1];
            let mut per_node = 0;
            let row = range
                .filter(|&s| counts[s] > 0)
                .map(|s| {
                    per_node += counts[s];
                    (cols[s], counts[s] as f64)
                })
                .collect();
            // every triangle at u is seen through both of its edges at u
            with_diagonal(row, u, per_node / 2)
        })
        .collect();
    Ok(SparseMatrix::from_sorted_rows(n, rows))
}

/// Wedge matrix under co-occurrence semantics.
pub fn wedge_motif_matrix(a: &SparseMatrix) -> Result<SparseMatrix> {
    wedge_motif_matrix_with(a, MotifSemantics::CoOccurrence)
}

/// Wedge (length-2 path) matrix.
///
/// For `u != v` under co-occurrence:
/// `[uv in E] * (d(u) + d(v) - 2) + |N(u) ∩ N(v)|`; under edge-in-instance
/// semantics the common-neighbor term is absent. The diagonal is
/// `C(d(v), 2) + Σ_{w in N(v)} (d(w) - 1)` in both cases.
pub fn wedge_motif_matrix_with(a: &SparseMatrix, semantics: MotifSemantics) -> Result<SparseMatrix> {
    check_adjacency(a)?;
    let n = a.dim();
    let degree: Vec<u64> = (0..n).map(|v| a.row(v).0.len() as u64).collect();

    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0u64; n], Vec::<usize>::new()),
            |(acc, touched), u| {
                let nu = a.row(u).0;
                if semantics == MotifSemantics::CoOccurrence {
                    for &w in nu {
                        for &x in a.row(w).0 {
                            if x != u {
                                if acc[x] == 0 {
                                    touched.push(x);
                                }
                                acc[x] += 1;
                            }
                        }
                    }
                }
                for &v in nu {
                    if acc[v] == 0 {
                        touched.push(v);
                    }
                    acc[v] += degree[u] + degree[v] - 2;
                }
                let d = degree[u];
                let diag = d * d.saturating_sub(1) / 2 + nu.iter().map(|&w| degree[w] - 1).sum::<u64>();
                touched.sort_unstable();
                let row = touched
                    .drain(..)
                    .filter_map(|x| {
                        let c = std::mem::take(&mut acc[x]);
                        (c > 0).then_some((x, c as f64))
                    })
                    .collect();
                with_diagonal(row, u, diag)
            },
        )
        .collect();
    Ok(SparseMatrix::from_sorted_rows(n, rows))
}

pub fn motif_matrix(a: &SparseMatrix, kind: MotifKind, semantics: MotifSemantics) -> Result<SparseMatrix> {
    match kind {
        // edge-in-instance and co-occurrence agree for triangles
        MotifKind::Triangle => triangle_motif_matrix(a),
        MotifKind::Wedge => wedge_motif_matrix_with(a, semantics),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, path};
    use crate::graph::{build_adjacency, Graph};

    #[test]
    fn triangle_on_k3() {
        let t = triangle_motif_matrix(&build_adjacency(&complete(3))).unwrap();
        let d = t.to_dense();
        assert!(d.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn triangle_on_path_is_zero() {
        let t = triangle_motif_matrix(&build_adjacency(&path(3))).unwrap();
        assert_eq!(t.nnz(), 0);
    }

    #[test]
    fn wedge_on_path() {
        let w = wedge_motif_matrix(&build_adjacency(&path(3))).unwrap();
        let d = w.to_dense();
        assert!(d.as_slice().iter().all(|&v| v == 1.0), "{d:?}");
    }

    #[test]
    fn wedge_on_k3() {
        let w = wedge_motif_matrix(&build_adjacency(&complete(3))).unwrap();
        assert!(w.to_dense().as_slice().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn literal_wedge_drops_leaf_pairs() {
        let w = wedge_motif_matrix_with(&build_adjacency(&path(3)), MotifSemantics::EdgeInInstance).unwrap();
        assert_eq!(w.get(0, 2), 0.0);
        assert_eq!(w.get(0, 1), 1.0);
        assert_eq!(w.get(0, 0), 1.0);
    }

    #[test]
    fn k4_counts() {
        let a = build_adjacency(&complete(4));
        let t = triangle_motif_matrix(&a).unwrap();
        // each edge lies in 2 triangles, each node in 3
        assert_eq!(t.get(0, 1), 2.0);
        assert_eq!(t.get(2, 2), 3.0);
        let w = wedge_motif_matrix(&a).unwrap();
        // adjacent pair: (3-1)+(3-1) center roles + 2 common neighbours
        assert_eq!(w.get(0, 1), 6.0);
        // C(3,2) + 3*(3-1)
        assert_eq!(w.get(0, 0), 9.0);
    }

    #[test]
    fn rejects_bad_adjacency() {
        let asym = SparseMatrix::from_triplets(2, [(0, 1, 1.0)]).unwrap();
        assert!(triangle_motif_matrix(&asym).is_err());
        let weighted = SparseMatrix::from_triplets(2, [(0, 1, 2.0), (1, 0, 2.0)]).unwrap();
        assert!(wedge_motif_matrix(&weighted).is_err());
        let looped = SparseMatrix::identity(2);
        assert!(triangle_motif_matrix(&looped).is_err());
    }

    #[test]
    fn isolated_nodes_have_empty_rows() {
        let (g, _) = Graph::from_edges(5, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let a = build_adjacency(&g);
        let t = triangle_motif_matrix(&a).unwrap();
        let w = wedge_motif_matrix(&a).unwrap();
        for m in [&t, &w] {
            assert!(m.row(3).0.is_empty() && m.row(4).0.is_empty());
        }
    }
}
