use std::path::{Path, PathBuf};

use mgcmn::data::{load_generic, load_planetoid, make_splits, PlanetoidOptions, SplitSpec};
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn expected() -> Value {
    let text = std::fs::read_to_string(fixtures().join("planetoid/expected.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn as_usizes(v: &Value) -> Vec<usize> {
    v.as_array().unwrap().iter().map(|x| x.as_u64().unwrap() as usize).collect()
}

fn options(e: &Value, row_normalize: bool) -> PlanetoidOptions {
    PlanetoidOptions {
        row_normalize,
        validation_size: e["validation_size"].as_u64().unwrap() as usize,
    }
}

#[test]
fn planetoid_pickle_dialects_match_reference_loader() {
    let e = expected();
    for dialect in ["py2", "py3p2", "py3"] {
        let dir = fixtures().join("planetoid").join(dialect);
        let (d, s) = load_planetoid(&dir, "toy", &options(&e, true)).unwrap();
        let g = &d.graph;
        assert_eq!(g.n_nodes(), e["n_nodes"].as_u64().unwrap() as usize, "{dialect}");
        assert_eq!(g.feature_dim(), e["n_features"].as_u64().unwrap() as usize);
        assert_eq!(g.n_classes(), e["n_classes"].as_u64().unwrap() as usize);

        let edges: Vec<(usize, usize)> = e["edges"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (p[0].as_u64().unwrap() as usize, p[1].as_u64().unwrap() as usize))
            .collect();
        assert_eq!(g.edges().collect::<Vec<_>>(), edges, "{dialect}");
        assert_eq!(d.edge_stats.records, e["edge_records"].as_u64().unwrap() as usize);
        assert_eq!(d.edge_stats.self_loops, e["self_loop_records"].as_u64().unwrap() as usize);

        let labels: Vec<Option<usize>> =
            e["labels"].as_array().unwrap().iter().map(|l| l.as_u64().map(|x| x as usize)).collect();
        assert_eq!(g.labels(), &labels[..], "{dialect}");

        for (v, row) in e["normalized_features"].as_array().unwrap().iter().enumerate() {
            for (j, x) in row.as_array().unwrap().iter().enumerate() {
                assert!((g.features().get(v, j) - x.as_f64().unwrap()).abs() < 1e-12, "{dialect} ({v}, {j})");
            }
        }

        assert_eq!(s.train, as_usizes(&e["train"]));
        assert_eq!(s.validation, as_usizes(&e["validation"]));
        assert_eq!(s.test, as_usizes(&e["test"]));
    }
}

#[test]
fn planetoid_raw_features() {
    let e = expected();
    let dir = fixtures().join("planetoid/py3");
    let (d, _) = load_planetoid(&dir, "toy", &options(&e, false)).unwrap();
    for (v, row) in e["features"].as_array().unwrap().iter().enumerate() {
        let want: Vec<f64> = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(d.graph.features().row(v), &want[..]);
    }
}

#[test]
fn planetoid_missing_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures().join("planetoid/py3")).unwrap() {
        let p = entry.unwrap().path();
        if !p.to_string_lossy().ends_with(".ty") {
            std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
        }
    }
    let err = load_planetoid(dir.path(), "toy", &PlanetoidOptions::default()).unwrap_err();
    assert!(err.to_string().contains("ind.toy.ty"), "{err}");
}

#[test]
fn planetoid_corrupt_pickle_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures().join("planetoid/py3")).unwrap() {
        let p = entry.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    let x = dir.path().join("ind.toy.allx");
    let bytes = std::fs::read(&x).unwrap();
    std::fs::write(&x, &bytes[..bytes.len() / 2]).unwrap();
    let err = load_planetoid(dir.path(), "toy", &PlanetoidOptions::default()).unwrap_err();
    assert!(err.to_string().contains("ind.toy.allx"), "{err}");
}

fn generic(stem: &str) -> mgcmn::data::Dataset {
    let d = fixtures().join("generic");
    load_generic(
        &d.join(format!("{stem}.edges")),
        &d.join(format!("{stem}.features.csv")),
        &d.join(format!("{stem}.labels.csv")),
    )
    .unwrap()
}

#[test]
fn generic_k3_fixture() {
    let d = generic("k3");
    assert_eq!(d.graph.n_nodes(), 3);
    assert_eq!(d.graph.n_edges(), 3);
    assert_eq!(d.name, "k3");
}

#[test]
fn generic_two_communities_fixture() {
    let d = generic("two_communities");
    assert_eq!(d.graph.n_nodes(), 20);
    assert_eq!(d.graph.feature_dim(), 4);
    assert_eq!(d.class_names.as_deref(), Some(&["left".to_string(), "right".to_string()][..]));
    let spec = SplitSpec {
        per_class_train: 4,
        train_fraction: 0.0,
        val_fraction: 0.2,
        test_fraction: 0.4,
    };
    let a = make_splits(&d, &spec, 3).unwrap();
    assert_eq!(a, make_splits(&d, &spec, 3).unwrap());
    assert_eq!(a.train.len(), 8);
    assert_eq!((a.validation.len(), a.test.len()), (4, 8));
}
