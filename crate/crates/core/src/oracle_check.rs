//! Entrywise comparison of the fast motif kernels against brute-force
//! subgraph enumeration on random graphs.

use rand::Rng;
use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{build_adjacency, Graph};
use crate::motif::{motif_matrix, motif_matrix_oracle, MotifKind, MotifSemantics, MotifSpec};
use crate::random::{erdos_renyi, seeded};
use crate::sparse::SparseMatrix;

/// Largest graph the brute-force side is asked to enumerate.
pub const MAX_ORACLE_CHECK_NODES: usize = 30;
/// Mismatches listed in a report; the total is always counted.
const REPORTED_MISMATCHES: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheckOptions {
    pub n_graphs: usize,
    pub min_n: usize,
    pub max_n: usize,
    pub seed: u64,
    pub semantics: MotifSemantics,
}

impl Default for OracleCheckOptions {
    fn default() -> Self {
        Self {
            n_graphs: 50,
            min_n: 5,
            max_n: 25,
            seed: 1,
            semantics: MotifSemantics::CoOccurrence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub graph: usize,
    pub motif: &'static str,
    pub row: usize,
    pub col: usize,
    pub kernel: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheckReport {
    pub graphs_checked: usize,
    pub entries_compared: usize,
    pub total_mismatches: usize,
    pub mismatches: Vec<Mismatch>,
    /// Kernels that are expected to differ from the oracle in this mode,
    /// with the number of differing entries and the reason.
    pub intentionally_divergent: Vec<String>,
    pub passed: bool,
}

fn kind_name(kind: MotifKind) -> &'static str {
    match kind {
        MotifKind::Triangle => "triangle",
        MotifKind::Wedge => "wedge",
    }
}

fn spec_of(kind: MotifKind) -> MotifSpec {
    match kind {
        MotifKind::Triangle => MotifSpec::Triangle,
        MotifKind::Wedge => MotifSpec::Wedge,
    }
}

/// Coordinates where `kernel` and `oracle` differ (exact comparison: both
/// sides hold small integer counts).
fn diff(kernel: &SparseMatrix, oracle: &DenseMatrix) -> Vec<(usize, usize, f64, f64)> {
    let k = kernel.to_dense();
    let mut out = Vec::new();
    for r in 0..k.rows() {
        for c in 0..k.cols() {
            if k.get(r, c) != oracle.get(r, c) {
                out.push((r, c, k.get(r, c), oracle.get(r, c)));
            }
        }
    }
    out
}

/// Compares both kernels with the oracle on one graph.
pub fn check_graph(graph: &Graph, semantics: MotifSemantics, index: usize, report: &mut OracleCheckReport) -> Result<()> {
    let a = build_adjacency(graph);
    for kind in [MotifKind::Triangle, MotifKind::Wedge] {
        let kernel = motif_matrix(&a, kind, semantics)?;
        let oracle = motif_matrix_oracle(graph, &spec_of(kind), semantics)?;
        report.entries_compared += oracle.rows() * oracle.cols();
        for (row, col, k, o) in diff(&kernel, &oracle) {
            report.total_mismatches += 1;
            if report.mismatches.len() < REPORTED_MISMATCHES {
                report.mismatches.push(Mismatch {
                    graph: index,
                    motif: kind_name(kind),
                    row,
                    col,
                    kernel: k,
                    oracle: o,
                });
            }
        }
    }
    Ok(())
}

/// Samples `n_graphs` G(n, p) graphs with `n` uniform in `[min_n, max_n]`
/// and `p` uniform in `[0.1, 0.6]`, and compares kernels and oracle under
/// `options.semantics`.
///
/// Under [`MotifSemantics::EdgeInInstance`] the model's default wedge kernel
/// (co-occurrence) is additionally compared with the literal oracle; it is
/// expected to differ on wedge leaf pairs, and that difference is reported
/// as intentional rather than as a failure.
pub fn run_oracle_check(options: &OracleCheckOptions) -> Result<OracleCheckReport> {
    if options.max_n > MAX_ORACLE_CHECK_NODES {
        return Err(Error::Config(format!(
            "max_n = {} exceeds {MAX_ORACLE_CHECK_NODES}; brute-force enumeration is only meant for small graphs",
            options.max_n
        )));
    }
    if options.min_n == 0 || options.min_n > options.max_n {
        return Err(Error::Config(format!("need 1 <= min_n <= max_n, got {}..={}", options.min_n, options.max_n)));
    }
    let mut rng = seeded(options.seed);
    let mut report = OracleCheckReport {
        graphs_checked: 0,
        entries_compared: 0,
        total_mismatches: 0,
        mismatches: Vec::new(),
        intentionally_divergent: Vec::new(),
        passed: true,
    };
    let mut divergent_entries = 0usize;
    for index in 0..options.n_graphs {
        let n = rng.gen_range(options.min_n..=options.max_n);
        let p = rng.gen_range(0.1..=0.6);
        let graph = erdos_renyi(n, p, rng.gen());
        check_graph(&graph, options.semantics, index, &mut report)?;
        if options.semantics == MotifSemantics::EdgeInInstance {
            let default_kernel = motif_matrix(&build_adjacency(&graph), MotifKind::Wedge, MotifSemantics::CoOccurrence)?;
            let literal = motif_matrix_oracle(&graph, &MotifSpec::Wedge, MotifSemantics::EdgeInInstance)?;
            divergent_entries += diff(&default_kernel, &literal).len();
        }
        report.graphs_checked += 1;
    }
    if options.semantics == MotifSemantics::EdgeInInstance {
        report.intentionally_divergent.push(format!(
            "wedge (co-occurrence kernel): {divergent_entries} entries differ from the edge-in-instance oracle; \
             the model's kernel also counts a wedge for its two non-adjacent leaves, which the literal \
             edge-in-instance reading does not"
        ));
    }
    report.passed = report.total_mismatches == 0;
    Ok(report)
}
