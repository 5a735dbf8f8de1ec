//! Checks against the published dataset statistics. Skipped unless
//! `MGCMN_DATA_DIR` points at a directory holding the raw files.

use std::path::PathBuf;

use mgcmn::data::{load_named, DatasetName, LoadOptions, DATA_DIR_ENV};
use mgcmn::motif::motif_stats;

struct Expected {
    name: &'static str,
    nodes: usize,
    edges: usize,
    features: usize,
    classes: usize,
    cc: f64,
}

const CITATION: [Expected; 3] = [
    Expected { name: "cora", nodes: 2708, edges: 5429, features: 1433, classes: 7, cc: 0.09350 },
    Expected { name: "citeseer", nodes: 3327, edges: 4732, features: 3703, classes: 6, cc: 0.14297 },
    Expected { name: "pubmed", nodes: 19717, edges: 44338, features: 500, classes: 3, cc: 0.05380 },
];

const EGO: [Expected; 4] = [
    Expected { name: "107", nodes: 1045, edges: 53498, features: 576, classes: 9, cc: 0.54431 },
    Expected { name: "414", nodes: 159, edges: 3386, features: 105, classes: 7, cc: 0.67137 },
    Expected { name: "1684", nodes: 792, edges: 28048, features: 319, classes: 16, cc: 0.45752 },
    Expected { name: "1912", nodes: 755, edges: 60050, features: 480, classes: 46, cc: 0.71837 },
];

const CITATION_CC_TOL: f64 = 5e-5;
const EGO_CC_TOL: f64 = 5e-4;

fn data_root() -> Option<PathBuf> {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(p) => Some(PathBuf::from(p)),
        None => {
            eprintln!("{DATA_DIR_ENV} not set; skipping real-dataset checks");
            None
        }
    }
}

fn check(root: &PathBuf, e: &Expected, citation: bool) {
    let name: DatasetName = e.name.parse().unwrap();
    let (d, splits) = load_named(root, &name, &LoadOptions::default()).unwrap_or_else(|err| panic!("{name}: {err}"));
    let s = d.summary();
    assert_eq!(s.nodes, e.nodes, "{name} nodes");
    assert_eq!(s.features, e.features, "{name} features");
    assert_eq!(s.classes, e.classes, "{name} classes");
    if citation {
        // the raw citation lists hold duplicates and dangling references, so
        // the undirected edge count only approximates the tabulated one
        let rel = (s.edges as f64 - e.edges as f64).abs() / e.edges as f64;
        if rel > 0.05 {
            panic!("{name}: {} undirected edges, tabulated {}", s.edges, e.edges);
        }
        eprintln!("{name}: {} undirected edges vs {} tabulated ({:.2}% off)", s.edges, e.edges, 100.0 * rel);
    } else {
        assert_eq!(s.edge_records, e.edges, "{name} edge records");
    }
    splits.validate(s.nodes).unwrap();

    let stats = motif_stats(&d.graph).unwrap();
    assert!(stats.triangle_support_holds, "{name}: triangle entry off the adjacency support");
    assert!(stats.wedge_bound_holds, "{name}: wedge support above 2|E|D");
    let cc = stats.clustering_coefficient.expect("graph has wedges");
    let tol = if citation { CITATION_CC_TOL } else { EGO_CC_TOL };
    assert!((cc - e.cc).abs() <= tol, "{name}: CC {cc:.5} vs {:.5} (tolerance {tol})", e.cc);
}

#[test]
fn citation_graph_statistics() {
    let Some(root) = data_root() else { return };
    for e in &CITATION {
        check(&root, e, true);
    }
}

#[test]
fn ego_network_statistics() {
    let Some(root) = data_root() else { return };
    for e in &EGO {
        check(&root, e, false);
    }
}
