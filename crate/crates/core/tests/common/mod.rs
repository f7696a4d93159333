//! Random models and inputs shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treexplain::dataset::{Dataset, SchemaConfig};
use treexplain::forest::{Forest, NodeKind, RegressionTree, TreeNode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random tree over `features` with consistent node statistics: every
/// internal node's cover is the sum of its children's and its value their
/// cover-weighted mean. Split thresholds lie in (0, 1).
pub fn random_tree(rng: &mut impl Rng, features: &[usize], n_features: usize, max_depth: usize) -> RegressionTree {
    let mut nodes = Vec::new();
    grow(rng, features, max_depth, 0, &mut nodes);
    RegressionTree::new(nodes, n_features).expect("generated tree is valid")
}

fn grow(rng: &mut impl Rng, features: &[usize], max_depth: usize, depth: usize, nodes: &mut Vec<TreeNode>) -> usize {
    let id = nodes.len();
    let split = depth < max_depth && !features.is_empty() && (depth == 0 || rng.random_bool(0.8));
    if !split {
        nodes.push(TreeNode::leaf(rng.random_range(-5.0..5.0), rng.random_range(1..=20)));
        return id;
    }
    nodes.push(TreeNode::leaf(0.0, 0));
    let feature = features[rng.random_range(0..features.len())];
    let threshold = rng.random_range(0.05..0.95);
    let left = grow(rng, features, max_depth, depth + 1, nodes);
    let right = grow(rng, features, max_depth, depth + 1, nodes);
    let (lc, rc) = (nodes[left].cover, nodes[right].cover);
    let value = (nodes[left].value * lc as f64 + nodes[right].value * rc as f64) / (lc + rc) as f64;
    nodes[id] = TreeNode::internal(feature, threshold, left, right, value, lc + rc);
    id
}

pub fn all_features(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

pub fn random_forest(rng: &mut impl Rng, n_trees: usize, n_features: usize, max_depth: usize) -> Forest {
    let features = all_features(n_features);
    let trees = (0..n_trees)
        .map(|_| random_tree(rng, &features, n_features, max_depth))
        .collect();
    Forest::from_trees(trees, names(n_features)).expect("generated forest is valid")
}

/// Inputs mix uniform draws with values on a 0.1 grid, so coordinates repeat.
pub fn random_input(rng: &mut impl Rng, n_features: usize) -> Vec<f64> {
    (0..n_features)
        .map(|_| {
            if rng.random_bool(0.3) {
                rng.random_range(0..=10) as f64 / 10.0
            } else {
                rng.random()
            }
        })
        .collect()
}

/// The same tree with features `a` and `b` exchanged in every split.
pub fn swap_features(tree: &RegressionTree, a: usize, b: usize) -> RegressionTree {
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| match n.kind {
            NodeKind::Leaf => *n,
            NodeKind::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                let f = if feature == a {
                    b
                } else if feature == b {
                    a
                } else {
                    feature
                };
                TreeNode::internal(f, threshold, left, right, n.value, n.cover)
            }
        })
        .collect();
    RegressionTree::new(nodes, tree.n_features()).unwrap()
}

/// Continuous random regression data with covariates only.
pub fn random_dataset(rng: &mut impl Rng, n_rows: usize, n_features: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n_rows)
        .map(|_| (0..n_features).map(|_| rng.random()).collect())
        .collect();
    let targets = rows
        .iter()
        .map(|r| r.iter().enumerate().map(|(j, v)| (j as f64 + 1.0) * v * v).sum::<f64>() + rng.random::<f64>() * 0.1)
        .collect();
    let schema = SchemaConfig::new(names(n_features), Vec::<String>::new(), "y");
    Dataset::from_rows(rows, targets, schema).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
