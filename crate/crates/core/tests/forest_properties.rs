mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use treexplain::dataset::{synthesize, Dataset, SynthConfig};
use treexplain::forest::{fit_forest, fit_tree, model_to_json, Forest, ForestParams, NodeKind, RegressionTree};

fn no_bootstrap(max_depth: usize, min_samples_leaf: usize) -> ForestParams {
    ForestParams {
        n_estimators: 1,
        max_depth,
        min_samples_leaf,
        bootstrap: false,
        feature_fraction: 1.0,
        seed: 0,
    }
}

fn tree_mse(tree: &RegressionTree, data: &Dataset) -> f64 {
    data.rows()
        .zip(data.targets())
        .map(|(x, y)| (tree.predict_unchecked(x) - y).powi(2))
        .sum::<f64>()
        / data.n_rows() as f64
}

fn leaf_range(tree: &RegressionTree) -> (f64, f64) {
    tree.nodes()
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Leaf))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| {
            (lo.min(n.value), hi.max(n.value))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fitted_nodes_are_consistent_and_predictions_bounded(
        seed in any::<u64>(),
        n_rows in 20usize..200,
        n_features in 1usize..6,
        depth in 1usize..12,
        min_leaf in 1usize..5,
        bootstrap in any::<bool>(),
        fraction in 0.3f64..=1.0,
    ) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n_rows, n_features);
        let params = ForestParams {
            n_estimators: 4,
            max_depth: depth,
            min_samples_leaf: min_leaf,
            bootstrap,
            feature_fraction: fraction,
            seed,
        };
        let forest = fit_forest(&data, &params).unwrap();
        for tree in forest.trees() {
            tree.check_node_statistics(1e-9).unwrap();
            prop_assert!(tree.depth() <= depth);
            let (lo, hi) = leaf_range(tree);
            for _ in 0..20 {
                let p = tree.predict(&random_input(&mut r, n_features)).unwrap();
                prop_assert!(lo <= p && p <= hi);
            }
        }
    }

    #[test]
    fn row_order_does_not_matter_without_bootstrap(seed in any::<u64>(), n_rows in 10usize..150, n_features in 1usize..5, depth in 1usize..10) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n_rows, n_features);
        let mut order: Vec<usize> = (0..n_rows).collect();
        order.shuffle(&mut r);
        let shuffled = data.select(&order);
        let params = no_bootstrap(depth, 1);
        let a = fit_tree(&data, &params, 0).unwrap();
        let b = fit_tree(&shuffled, &params, 0).unwrap();
        for _ in 0..50 {
            let x = random_input(&mut r, n_features);
            prop_assert!(close(a.predict(&x).unwrap(), b.predict(&x).unwrap(), 1e-9));
        }
    }

    #[test]
    fn deeper_trees_never_fit_worse(seed in any::<u64>(), n_rows in 10usize..150, n_features in 1usize..5) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n_rows, n_features);
        let mut previous = f64::INFINITY;
        for depth in 1..10 {
            let mse = tree_mse(&fit_tree(&data, &no_bootstrap(depth, 1), 0).unwrap(), &data);
            prop_assert!(mse <= previous + 1e-12 * previous.abs().max(1.0), "depth {depth}: {mse} > {previous}");
            previous = mse;
        }
    }
}

#[test]
fn training_twice_gives_identical_model_json() {
    let data = synthesize(&SynthConfig::new(500, 3, 3, vec![1.0, 0.7, 0.4], 0.05, 21)).unwrap();
    let params = ForestParams {
        n_estimators: 12,
        max_depth: 8,
        feature_fraction: 0.7,
        ..ForestParams::default()
    };
    let a = model_to_json(&fit_forest(&data, &params).unwrap()).unwrap();
    let b = model_to_json(&fit_forest(&data, &params).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = model_to_json(&fit_forest(&data, &ForestParams { seed: 1, ..params }).unwrap()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let data = synthesize(&SynthConfig::new(400, 2, 3, vec![1.0, 0.7, 0.4], 0.05, 4)).unwrap();
    let params = ForestParams {
        n_estimators: 8,
        max_depth: 6,
        ..ForestParams::default()
    };
    let fit_with = |threads: usize| -> Forest {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| fit_forest(&data, &params).unwrap())
    };
    assert_eq!(fit_with(1), fit_with(4));
}

#[test]
fn forest_prediction_is_mean_of_trees() {
    let mut r = rng(8);
    let forest = random_forest(&mut r, 7, 4, 6);
    for _ in 0..100 {
        let x = random_input(&mut r, 4);
        let mean = forest.trees().iter().map(|t| t.predict(&x).unwrap()).sum::<f64>() / 7.0;
        assert!(close(forest.predict(&x).unwrap(), mean, 1e-12));
    }
}
