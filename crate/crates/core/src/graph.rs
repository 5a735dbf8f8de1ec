//! Immutable undirected graphs with node features and optional labels.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Counters for edge records discarded while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct EdgeStats {
    /// Edge records seen, including duplicates and self-loops.
    pub records: usize,
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

/// Undirected simple graph on nodes `0..n`, stored as sorted CSR adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    n_edges: usize,
    features: DenseMatrix,
    labels: Vec<Option<usize>>,
    n_classes: usize,
}

impl Graph {
    /// Builds the structure from an edge list. Self-loops are dropped and
    /// repeated pairs (in either orientation) collapse to one edge; both are
    /// counted in the returned stats. The graph starts with an `n x 0`
    /// feature matrix and no labels.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<(Self, EdgeStats)> {
        let mut stats = EdgeStats {
            records: edges.len(),
            ..EdgeStats::default()
        };
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n_nodes: n });
                }
            }
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(edges.len() * 2);
        offsets.push(0);
        let mut directed = 0;
        for mut list in adj {
            let before = list.len();
            list.sort_unstable();
            list.dedup();
            directed += before - list.len();
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        // each duplicate record leaves one extra entry at both endpoints
        stats.duplicate_edges = directed / 2;
        if stats.self_loops > 0 || stats.duplicate_edges > 0 {
            log::warn!(
                "dropped {} self-loop(s) and {} duplicate edge record(s)",
                stats.self_loops,
                stats.duplicate_edges
            );
        }
        let graph = Self {
            n_edges: neighbors.len() / 2,
            offsets,
            neighbors,
            features: DenseMatrix::zeros(n, 0),
            labels: vec![None; n],
            n_classes: 0,
        };
        Ok((graph, stats))
    }

    pub fn with_features(mut self, features: DenseMatrix) -> Result<Self> {
        if features.rows() != self.n_nodes() {
            return Err(Error::shape(
                "with_features",
                format!(
                    "{} feature rows for {} nodes",
                    features.rows(),
                    self.n_nodes()
                ),
            ));
        }
        if !features.is_finite() {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        self.features = features;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<Option<usize>>, n_classes: usize) -> Result<Self> {
        if labels.len() != self.n_nodes() {
            return Err(Error::shape(
                "with_labels",
                format!("{} labels for {} nodes", labels.len(), self.n_nodes()),
            ));
        }
        for (node, l) in labels.iter().enumerate() {
            if let Some(label) = *l {
                if label >= n_classes {
                    return Err(Error::LabelOutOfRange {
                        node,
                        label,
                        n_classes,
                    });
                }
            }
        }
        self.labels = labels;
        self.n_classes = n_classes;
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        if v >= self.n_nodes() {
            return Err(Error::NodeOutOfRange {
                node: v,
                n_nodes: self.n_nodes(),
            });
        }
        Ok(self.offsets[v + 1] - self.offsets[v])
    }

    pub(crate) fn degree_unchecked(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Largest degree; 0 for a graph without nodes.
    pub fn max_degree(&self) -> usize {
        (0..self.n_nodes())
            .map(|v| self.degree_unchecked(v))
            .max()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_nodes() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Binary symmetric adjacency matrix with zero diagonal.
    pub fn adjacency(&self) -> SparseMatrix {
        build_adjacency(self)
    }

    /// Relabels nodes so that new node `i` is old node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_nodes();
        let mut inverse = vec![usize::MAX; n];
        if perm.len() != n {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
            inverse[p] = i;
        }
        let edges: Vec<_> = self.edges().map(|(u, v)| (inverse[u], inverse[v])).collect();
        let (g, _) = Self::from_edges(n, &edges)?;
        let labels = perm.iter().map(|&p| self.labels[p]).collect();
        g.with_features(self.features.gather_rows(perm))?
            .with_labels(labels, self.n_classes)
    }
}

/// Materializes the edge set as a 0/1 CSR matrix; `nnz = 2|E|`.
pub fn build_adjacency(graph: &Graph) -> SparseMatrix {
    let rows = (0..graph.n_nodes())
        .map(|v| graph.neighbors(v).iter().map(|&u| (u, 1.0)).collect())
        .collect();
    SparseMatrix::from_sorted_rows(graph.n_nodes(), rows)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Graph;

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges).unwrap().0
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &edges).unwrap().0
    }

    pub fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap().0
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::random::erdos_renyi;
    use proptest::prelude::*;

    #[test]
    fn adjacency_of_triangle() {
        let a = build_adjacency(&complete(3));
        let d = a.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn adjacency_of_empty_graph() {
        let (g, _) = Graph::from_edges(4, &[]).unwrap();
        let a = build_adjacency(&g);
        assert_eq!(a.dim(), 4);
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn degrees() {
        assert!((0..3).all(|v| complete(3).degree(v).unwrap() == 2));
        assert_eq!(path(3).degree(1).unwrap(), 2);
        assert_eq!(star(5).degree(0).unwrap(), 5);
        assert_eq!(complete(3).max_degree(), 2);
        assert_eq!(star(5).max_degree(), 5);
        assert_eq!(Graph::from_edges(0, &[]).unwrap().0.max_degree(), 0);
        assert!(matches!(
            path(3).degree(3),
            Err(Error::NodeOutOfRange { node: 3, .. })
        ));
    }

    #[test]
    fn max_degree_matches_dense_row_sums() {
        for seed in 0..5 {
            let g = erdos_renyi(30, 0.2, seed);
            let dense = build_adjacency(&g).to_dense();
            let brute = (0..30)
                .map(|r| dense.row(r).iter().sum::<f64>() as usize)
                .max()
                .unwrap();
            assert_eq!(g.max_degree(), brute);
        }
    }

    #[test]
    fn duplicates_and_self_loops_are_counted() {
        let (g, stats) = Graph::from_edges(3, &[(0, 1), (1, 0), (0, 1), (2, 2), (1, 2)]).unwrap();
        assert_eq!(g.n_edges(), 2);
        assert_eq!(stats.duplicate_edges, 2);
        assert_eq!(stats.self_loops, 1);
        assert_eq!(stats.records, 5);
    }

    #[test]
    fn invalid_construction() {
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
        let (g, _) = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(g.clone().with_features(DenseMatrix::zeros(3, 1)).is_err());
        assert!(matches!(
            g.with_labels(vec![Some(0), Some(2)], 2),
            Err(Error::LabelOutOfRange { node: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn adjacency_invariants(n in 1usize..20, raw in proptest::collection::vec((0usize..20, 0usize..20), 0..60)) {
            let edges: Vec<_> = raw.into_iter().filter(|&(u, v)| u < n && v < n).collect();
            let (g, _) = Graph::from_edges(n, &edges).unwrap();
            let a = build_adjacency(&g);
            prop_assert_eq!(a.nnz(), 2 * g.n_edges());
            prop_assert_eq!(&a.transpose(), &a);
            prop_assert!(a.diagonal().iter().all(|&d| d == 0.0));
            let degree_sum: usize = (0..n).map(|v| g.degree(v).unwrap()).sum();
            prop_assert_eq!(degree_sum, 2 * g.n_edges());
        }
    }
}
