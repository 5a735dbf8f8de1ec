use mgcmn::gradcheck::{run_gradcheck_on, GradcheckOptions, DEFAULT_TOLERANCE};
use mgcmn::graph::Graph;
use mgcmn::random::{erdos_renyi, seeded, uniform_matrix};
use rand::Rng;

fn random_graph(seed: u64) -> (Graph, Vec<usize>) {
    let mut rng = seeded(seed);
    let x = uniform_matrix(12, 6, 1.0, &mut rng).map(f64::abs).row_normalized();
    let labels = (0..12).map(|_| Some(rng.gen_range(0..3))).collect();
    let g = erdos_renyi(12, 0.35, seed).with_features(x).unwrap().with_labels(labels, 3).unwrap();
    let mask = (0..12).filter(|v| v % 3 != 2).collect();
    (g, mask)
}

#[test]
fn random_graphs_all_shapes() {
    for seed in 0..4 {
        let (g, mask) = random_graph(seed);
        for recipe in ["edge:1", "edge:8,triangle:1,wedge:2", "edge:4,triangle:1", "edge:1,wedge:1"] {
            let opts = GradcheckOptions {
                recipe: recipe.parse().unwrap(),
                seed,
                ..GradcheckOptions::default()
            };
            let r = run_gradcheck_on(&g, &mask, &opts).unwrap();
            assert!(r.passed, "seed {seed}, {recipe}: {r:#?}");
            assert!(r.max_relative_error < DEFAULT_TOLERANCE);
        }
    }
}

#[test]
fn wider_hidden_layers_and_no_weight_decay() {
    let (g, mask) = random_graph(9);
    for weight_decay in [0.0, 5e-4, 5e-2] {
        let opts = GradcheckOptions {
            hidden_dim: 16,
            weight_decay,
            ..GradcheckOptions::default()
        };
        let r = run_gradcheck_on(&g, &mask, &opts).unwrap();
        assert!(r.passed, "weight decay {weight_decay}: {r:#?}");
    }
}
