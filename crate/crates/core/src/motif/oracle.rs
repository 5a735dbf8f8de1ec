//! Brute-force motif enumeration by subgraph isomorphism.
//!
//! This path shares nothing with the optimized kernels: it works on a dense
//! boolean adjacency table and tries every injective assignment of pattern
//! nodes to graph nodes. It exists to check the kernels and to explore
//! patterns that have no kernel.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::MotifSemantics;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_ORACLE_CAP: usize = 200;
const MAX_PATTERN_NODES: usize = 5;

/// Undirected connected pattern on nodes `0..n_nodes` with a central node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub center: usize,
}

impl Pattern {
    pub fn new(n_nodes: usize, edges: Vec<(usize, usize)>, center: usize) -> Result<Self> {
        let p = Self {
            n_nodes,
            edges,
            center,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn triangle() -> Self {
        Self {
            n_nodes: 3,
            edges: vec![(0, 1), (1, 2), (0, 2)],
            center: 0,
        }
    }

    /// Path `1 - 0 - 2`, centered on the middle node.
    pub fn wedge() -> Self {
        Self {
            n_nodes: 3,
            edges: vec![(0, 1), (0, 2)],
            center: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_PATTERN_NODES).contains(&self.n_nodes) {
            return Err(Error::InvalidInput(format!(
                "pattern must have 2 to {MAX_PATTERN_NODES} nodes, got {}",
                self.n_nodes
            )));
        }
        if self.center >= self.n_nodes {
            return Err(Error::InvalidInput("pattern center out of range".into()));
        }
        for &(a, b) in &self.edges {
            if a >= self.n_nodes || b >= self.n_nodes || a == b {
                return Err(Error::InvalidInput(format!("invalid pattern edge ({a}, {b})")));
            }
        }
        if self.bfs_order().len() != self.n_nodes {
            return Err(Error::InvalidInput("pattern is not connected".into()));
        }
        Ok(())
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges
            .iter()
            .any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    /// Pattern nodes in BFS order from the center, so that every node after
    /// the first has an earlier neighbor.
    fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_nodes];
        let mut order = Vec::with_capacity(self.n_nodes);
        let mut queue = VecDeque::from([self.center]);
        seen[self.center] = true;
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for y in 0..self.n_nodes {
                if !seen[y] && self.adjacent(x, y) {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        order
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MotifSpec {
    Triangle,
    Wedge,
    Generic { pattern: Pattern },
}

impl MotifSpec {
    pub fn pattern(&self) -> Pattern {
        match self {
            MotifSpec::Triangle => Pattern::triangle(),
            MotifSpec::Wedge => Pattern::wedge(),
            MotifSpec::Generic { pattern } => pattern.clone(),
        }
    }
}

/// One occurrence of a pattern: sorted node set and the host edges that the
/// pattern edges map onto (each as `(min, max)`, sorted).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MotifInstance {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

pub fn enumerate_motif_instances(graph: &Graph, spec: &MotifSpec) -> Result<Vec<MotifInstance>> {
    enumerate_motif_instances_capped(graph, spec, DEFAULT_ORACLE_CAP)
}

/// All distinct instances of `spec` in `graph`. Two embeddings give the same
/// instance when they cover the same nodes with the same edges, so pattern
/// automorphisms are not counted separately.
pub fn enumerate_motif_instances_capped(
    graph: &Graph,
    spec: &MotifSpec,
    cap: usize,
) -> Result<Vec<MotifInstance>> {
    let n = graph.n_nodes();
    if n > cap {
        return Err(Error::OracleCapExceeded { n_nodes: n, cap });
    }
    let pattern = spec.pattern();
    pattern.validate()?;

    let mut adj = vec![vec![false; n]; n];
    for u in 0..n {
        for &v in graph.neighbors(u) {
            adj[u][v] = true;
        }
    }

    let order = pattern.bfs_order();
    // for each position in `order`, the earlier positions it must be adjacent to
    let constraints: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(i, &p)| (0..i).filter(|&j| pattern.adjacent(p, order[j])).collect())
        .collect();

    let mut found = BTreeSet::new();
    let mut assigned = Vec::with_capacity(order.len());
    search(&adj, &pattern, &order, &constraints, &mut assigned, &mut found);
    Ok(found.into_iter().collect())
}

fn search(
    adj: &[Vec<bool>],
    pattern: &Pattern,
    order: &[usize],
    constraints: &[Vec<usize>],
    assigned: &mut Vec<usize>,
    found: &mut BTreeSet<MotifInstance>,
) {
    let depth = assigned.len();
    if depth == order.len() {
        // image[p] is the host node playing pattern node p
        let mut image = vec![0; pattern.n_nodes];
        for (i, &p) in order.iter().enumerate() {
            image[p] = assigned[i];
        }
        let mut nodes = assigned.clone();
        nodes.sort_unstable();
        let mut edges: Vec<_> = pattern
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (image[a], image[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        found.insert(MotifInstance { nodes, edges });
        return;
    }
    for candidate in 0..adj.len() {
        if assigned.contains(&candidate) {
            continue;
        }
        if constraints[depth].iter().all(|&j| adj[assigned[j]][candidate]) {
            assigned.push(candidate);
            search(adj, pattern, order, constraints, assigned, found);
            assigned.pop();
        }
    }
}

pub fn motif_matrix_oracle(graph: &Graph, spec: &MotifSpec, semantics: MotifSemantics) -> Result<DenseMatrix> {
    motif_matrix_oracle_capped(graph, spec, semantics, DEFAULT_ORACLE_CAP)
}

/// Dense motif matrix accumulated instance by instance. The diagonal always
/// counts containment.
pub fn motif_matrix_oracle_capped(
    graph: &Graph,
    spec: &MotifSpec,
    semantics: MotifSemantics,
    cap: usize,
) -> Result<DenseMatrix> {
    let instances = enumerate_motif_instances_capped(graph, spec, cap)?;
    let n = graph.n_nodes();
    let mut m = DenseMatrix::zeros(n, n);
    for inst in &instances {
        for &a in &inst.nodes {
            m.set(a, a, m.get(a, a) + 1.0);
        }
        match semantics {
            MotifSemantics::CoOccurrence => {
                for &a in &inst.nodes {
                    for &b in &inst.nodes {
                        if a != b {
                            m.set(a, b, m.get(a, b) + 1.0);
                        }
                    }
                }
            }
            MotifSemantics::EdgeInInstance => {
                for &(a, b) in &inst.edges {
                    m.set(a, b, m.get(a, b) + 1.0);
                    m.set(b, a, m.get(b, a) + 1.0);
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, path, star};

    #[test]
    fn triangle_instances() {
        assert_eq!(enumerate_motif_instances(&complete(3), &MotifSpec::Triangle).unwrap().len(), 1);
        assert_eq!(enumerate_motif_instances(&complete(4), &MotifSpec::Triangle).unwrap().len(), 4);
        assert!(enumerate_motif_instances(&path(5), &MotifSpec::Triangle).unwrap().is_empty());
    }

    #[test]
    fn wedge_instances_on_k4() {
        // 4 centers x C(3,2) leaf pairs
        let inst = enumerate_motif_instances(&complete(4), &MotifSpec::Wedge).unwrap();
        assert_eq!(inst.len(), 12);
        let by_nodes: BTreeSet<_> = inst.iter().map(|i| i.nodes.clone()).collect();
        assert_eq!(by_nodes.len(), 4);
    }

    #[test]
    fn wedge_instances_on_star() {
        assert_eq!(enumerate_motif_instances(&star(4), &MotifSpec::Wedge).unwrap().len(), 6);
    }

    #[test]
    fn generic_four_cycle() {
        let square = Pattern::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], 0).unwrap();
        let spec = MotifSpec::Generic { pattern: square };
        // K4 holds three distinct 4-cycles
        assert_eq!(enumerate_motif_instances(&complete(4), &spec).unwrap().len(), 3);
    }

    #[test]
    fn empty_graph_gives_zero_matrix() {
        let (g, _) = Graph::from_edges(6, &[]).unwrap();
        let m = motif_matrix_oracle(&g, &MotifSpec::Wedge, MotifSemantics::CoOccurrence).unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn literal_semantics_on_path() {
        let m = motif_matrix_oracle(&path(3), &MotifSpec::Wedge, MotifSemantics::EdgeInInstance).unwrap();
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(0, 1), 1.0);
        let co = motif_matrix_oracle(&path(3), &MotifSpec::Wedge, MotifSemantics::CoOccurrence).unwrap();
        assert_eq!(co.get(0, 2), 1.0);
    }

    #[test]
    fn cap_is_enforced() {
        let g = path(10);
        assert!(matches!(
            enumerate_motif_instances_capped(&g, &MotifSpec::Triangle, 5),
            Err(Error::OracleCapExceeded { n_nodes: 10, cap: 5 })
        ));
    }

    #[test]
    fn invalid_patterns() {
        assert!(Pattern::new(1, vec![], 0).is_err());
        assert!(Pattern::new(6, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], 0).is_err());
        assert!(Pattern::new(3, vec![(0, 1)], 0).is_err());
        assert!(Pattern::new(3, vec![(0, 0), (1, 2)], 0).is_err());
    }
}
