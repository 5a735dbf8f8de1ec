use std::time::Instant;

use mgcmn::graph::{build_adjacency, Graph};
use mgcmn::motif::{
    clustering_coefficient, motif_matrix_oracle, motif_stats, triangle_motif_matrix, wedge_motif_matrix,
    wedge_motif_matrix_with, MotifSemantics, MotifSpec, Pattern,
};
use mgcmn::oracle_check::{run_oracle_check, OracleCheckOptions};
use mgcmn::random::erdos_renyi;
use proptest::prelude::*;

#[test]
fn fifty_random_graphs_match_brute_force() {
    let start = Instant::now();
    let report = run_oracle_check(&OracleCheckOptions::default()).unwrap();
    assert_eq!(report.graphs_checked, 50);
    assert!(report.passed, "{:?}", report.mismatches);
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

fn graph_from_bits(n: usize, bits: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if bits[k] {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    Graph::from_edges(n, &edges).unwrap().0
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    (1usize..11).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| graph_from_bits(n, &bits))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_equal_oracle(g in arb_graph()) {
        let a = build_adjacency(&g);
        let t = triangle_motif_matrix(&a).unwrap().to_dense();
        let w = wedge_motif_matrix(&a).unwrap().to_dense();
        let wl = wedge_motif_matrix_with(&a, MotifSemantics::EdgeInInstance).unwrap().to_dense();
        prop_assert_eq!(t, motif_matrix_oracle(&g, &MotifSpec::Triangle, MotifSemantics::CoOccurrence).unwrap());
        prop_assert_eq!(w, motif_matrix_oracle(&g, &MotifSpec::Wedge, MotifSemantics::CoOccurrence).unwrap());
        prop_assert_eq!(wl, motif_matrix_oracle(&g, &MotifSpec::Wedge, MotifSemantics::EdgeInInstance).unwrap());
    }

    #[test]
    fn sparsity_bounds(g in arb_graph()) {
        let a = build_adjacency(&g);
        let t = triangle_motif_matrix(&a).unwrap();
        for (r, c, _) in t.iter() {
            prop_assert!(r == c || a.contains(r, c));
        }
        let w = wedge_motif_matrix(&a).unwrap();
        let off_diagonal = w.iter().filter(|(r, c, _)| r != c).count();
        prop_assert!(off_diagonal <= 2 * g.n_edges() * g.max_degree());
    }
}

/// Triangles by triple loop, wedges as sum of C(d, 2).
fn naive_cc(g: &Graph) -> Option<f64> {
    let n = g.n_nodes();
    let mut triangles = 0u64;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                    triangles += 1;
                }
            }
        }
    }
    let wedges: u64 = (0..n).map(|v| g.neighbors(v).len() as u64).map(|d| d * d.saturating_sub(1) / 2).sum();
    (wedges > 0).then(|| 3.0 * triangles as f64 / wedges as f64)
}

#[test]
fn clustering_coefficient_matches_naive_count() {
    for seed in 0..20 {
        let g = erdos_renyi(30, 0.05 + 0.02 * seed as f64, seed);
        match naive_cc(&g) {
            Some(cc) => assert!((clustering_coefficient(&g).unwrap() - cc).abs() < 1e-15),
            None => assert!(clustering_coefficient(&g).is_err()),
        }
    }
}

#[test]
fn stats_report_bounds() {
    let g = erdos_renyi(60, 0.1, 3);
    let s = motif_stats(&g).unwrap();
    assert!(s.wedge_bound_holds && s.triangle_support_holds);
    assert_eq!(s.bound_2ed, (2 * g.n_edges() * g.max_degree()) as u64);
}

#[test]
fn generic_pattern_oracle_counts_four_cycles() {
    // C4 inside K4: three distinct 4-cycles, each containing every pair
    let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap().0;
    let c4 = Pattern::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], 0).unwrap();
    let m = motif_matrix_oracle(&k4, &MotifSpec::Generic { pattern: c4 }, MotifSemantics::CoOccurrence).unwrap();
    for r in 0..4 {
        for c in 0..4 {
            assert_eq!(m.get(r, c), 3.0);
        }
    }
}
