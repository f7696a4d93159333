//! CART regression trees and random forests.
//!
//! Every node keeps the number of in-bag training samples that reached it
//! (`cover`) and their mean target (`value`). Both attribution methods read
//! these statistics directly, so they are part of the model rather than a
//! training by-product.

mod io;
mod train;

pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use train::{fit_forest, fit_tree, tree_seed};

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

/// Split or leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    /// Samples with `x[feature] <= threshold` go to `left`.
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub value: f64,
    pub cover: u64,
}

impl TreeNode {
    pub fn leaf(value: f64, cover: u64) -> Self {
        TreeNode {
            kind: NodeKind::Leaf,
            value,
            cover,
        }
    }

    pub fn internal(feature: usize, threshold: f64, left: usize, right: usize, value: f64, cover: u64) -> Self {
        TreeNode {
            kind: NodeKind::Internal {
                feature,
                threshold,
                left,
                right,
            },
            value,
            cover,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf)
    }
}

/// A binary regression tree stored as a node array with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<TreeNode>,
    depth: usize,
    n_features: usize,
}

impl RegressionTree {
    /// Validates structure (single root, every other node with exactly one
    /// parent, all nodes reachable, features in range, positive covers).
    pub fn new(nodes: Vec<TreeNode>, n_features: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(argument("a tree needs at least one node"));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            if node.cover == 0 {
                return Err(argument(format!("node {id} has zero cover")));
            }
            if !node.value.is_finite() {
                return Err(argument(format!("node {id} has non-finite value")));
            }
            if let NodeKind::Internal {
                feature,
                threshold,
                left,
                right,
            } = node.kind
            {
                if feature >= n_features {
                    return Err(argument(format!(
                        "node {id} splits on feature {feature}, tree has {n_features} features"
                    )));
                }
                if threshold.is_nan() {
                    return Err(argument(format!("node {id} has NaN threshold")));
                }
                for child in [left, right] {
                    if child == 0 || child >= nodes.len() {
                        return Err(argument(format!("node {id} has invalid child {child}")));
                    }
                    parents[child] += 1;
                }
            }
        }
        if let Some(orphan) = (1..nodes.len()).find(|&i| parents[i] != 1) {
            return Err(argument(format!(
                "node {orphan} has {} parents, expected 1",
                parents[orphan]
            )));
        }
        // With one parent per non-root node, a walk from the root that visits
        // every node exactly once rules out cycles detached from the root.
        let mut depth = 0;
        let mut visited = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            visited += 1;
            if visited > nodes.len() {
                return Err(argument("tree contains a cycle"));
            }
            depth = depth.max(d);
            if let NodeKind::Internal { left, right, .. } = nodes[id].kind {
                stack.push((right, d + 1));
                stack.push((left, d + 1));
            }
        }
        if visited != nodes.len() {
            return Err(argument("tree has nodes unreachable from the root"));
        }
        Ok(RegressionTree {
            nodes,
            depth,
            n_features,
        })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut id = 0;
        while let NodeKind::Internal {
            feature,
            threshold,
            left,
            right,
        } = self.nodes[id].kind
        {
            id = if x[feature] <= threshold { left } else { right };
        }
        id
    }

    /// Leaf value for `x`. The caller guarantees `x.len() == n_features()`.
    pub fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.nodes[self.leaf_index(x)].value
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.n_features)?;
        Ok(self.predict_unchecked(x))
    }

    /// Cover-weighted mean of the leaf values.
    pub fn expected_value(&self) -> f64 {
        let total: f64 = self
            .nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| n.cover as f64 * n.value)
            .sum();
        total / self.nodes[0].cover as f64
    }

    /// Checks that every internal node's cover and value equal the
    /// cover-weighted combination of its children.
    pub fn check_node_statistics(&self, rel_tol: f64) -> Result<()> {
        for (id, node) in self.nodes.iter().enumerate() {
            if let NodeKind::Internal { left, right, .. } = node.kind {
                let (l, r) = (&self.nodes[left], &self.nodes[right]);
                if l.cover + r.cover != node.cover {
                    return Err(Error::Validation(format!(
                        "node {id}: cover {} != {} + {}",
                        node.cover, l.cover, r.cover
                    )));
                }
                let mean = (l.cover as f64 * l.value + r.cover as f64 * r.value) / node.cover as f64;
                if (mean - node.value).abs() > rel_tol * mean.abs().max(node.value.abs()).max(1.0) {
                    return Err(Error::Validation(format!(
                        "node {id}: value {} differs from children mean {mean}",
                        node.value
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<TreeNode>, depth: usize, n_features: usize) -> Self {
        RegressionTree {
            nodes,
            depth,
            n_features,
        }
    }
}

/// Forest hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub feature_fraction: f64,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_depth: 10,
            min_samples_leaf: 1,
            bootstrap: true,
            feature_fraction: 1.0,
            seed: crate::DEFAULT_SEED,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(argument("n_estimators must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(argument("max_depth must be at least 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(argument("min_samples_leaf must be at least 1"));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(argument(format!(
                "feature_fraction must be in (0, 1], got {}",
                self.feature_fraction
            )));
        }
        Ok(())
    }
}

/// An ensemble whose prediction is the unweighted mean of its trees.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<RegressionTree>,
    params: ForestParams,
    feature_names: Vec<String>,
}

impl Forest {
    pub fn new(trees: Vec<RegressionTree>, params: ForestParams, feature_names: Vec<String>) -> Result<Self> {
        params.validate()?;
        if trees.len() != params.n_estimators {
            return Err(argument(format!(
                "{} trees but n_estimators = {}",
                trees.len(),
                params.n_estimators
            )));
        }
        if let Some(t) = trees.iter().position(|t| t.n_features != feature_names.len()) {
            return Err(argument(format!(
                "tree {t} has {} features, forest has {}",
                trees[t].n_features,
                feature_names.len()
            )));
        }
        Ok(Forest {
            trees,
            params,
            feature_names,
        })
    }

    /// Wraps hand-built trees; `n_estimators` and `max_depth` are taken from the trees.
    pub fn from_trees(trees: Vec<RegressionTree>, feature_names: Vec<String>) -> Result<Self> {
        let params = ForestParams {
            n_estimators: trees.len(),
            max_depth: trees.iter().map(|t| t.depth).max().unwrap_or(0).max(1),
            bootstrap: false,
            ..ForestParams::default()
        };
        Forest::new(trees, params, feature_names)
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.predict_unchecked(x))
    }

    pub fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_unchecked(x)).sum();
        sum / self.trees.len() as f64
    }

    pub fn check_input(&self, x: &[f64]) -> Result<()> {
        check_input(x, self.n_features())
    }

    /// Largest depth over all trees.
    pub fn max_tree_depth(&self) -> usize {
        self.trees.iter().map(|t| t.depth).max().unwrap_or(0)
    }
}

fn check_input(x: &[f64], n_features: usize) -> Result<()> {
    if x.len() != n_features {
        return Err(argument(format!(
            "input has {} features, model expects {n_features}",
            x.len()
        )));
    }
    if let Some(j) = x.iter().position(|v| !v.is_finite()) {
        return Err(argument(format!("input feature {j} is not finite")));
    }
    Ok(())
}

/// Small tree used throughout the tests: root splits feature 0 at 0.5 into a
/// leaf (1.0, cover 2) and a node splitting feature 1 at 0.5 into leaves
/// (3.0, cover 1) and (5.0, cover 1).
#[cfg(test)]
pub(crate) fn small_tree() -> RegressionTree {
    RegressionTree::new(
        vec![
            TreeNode::internal(0, 0.5, 1, 2, 2.5, 4),
            TreeNode::leaf(1.0, 2),
            TreeNode::internal(1, 0.5, 3, 4, 4.0, 2),
            TreeNode::leaf(3.0, 1),
            TreeNode::leaf(5.0, 1),
        ],
        2,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routes_fixture() {
        let tree = small_tree();
        assert_eq!(tree.predict(&[0.7, 0.8]).unwrap(), 5.0);
        assert_eq!(tree.predict(&[0.7, 0.5]).unwrap(), 3.0);
        assert_eq!(tree.predict(&[0.5, 0.9]).unwrap(), 1.0);
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.n_leaves(), 3);
        assert_eq!(tree.expected_value(), 2.5);
        tree.check_node_statistics(1e-9).unwrap();
    }

    #[test]
    fn single_leaf_and_mean_of_trees() {
        let leaf = RegressionTree::new(vec![TreeNode::leaf(2.5, 3)], 2).unwrap();
        assert_eq!(leaf.predict(&[-1e6, 7.0]).unwrap(), 2.5);

        let other = RegressionTree::new(vec![TreeNode::leaf(4.0, 3)], 2).unwrap();
        let forest = Forest::from_trees(vec![leaf, other], vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(forest.predict(&[0.0, 0.0]).unwrap(), 3.25);
    }

    #[test]
    fn rejects_bad_inputs_and_structure() {
        let tree = small_tree();
        assert!(tree.predict(&[0.1]).is_err());
        assert!(tree.predict(&[0.1, f64::NAN]).is_err());

        // node 3 has two parents
        let shared = vec![
            TreeNode::internal(0, 0.5, 1, 2, 0.0, 2),
            TreeNode::internal(0, 0.2, 3, 3, 0.0, 1),
            TreeNode::leaf(0.0, 1),
            TreeNode::leaf(0.0, 1),
        ];
        assert!(RegressionTree::new(shared, 1).is_err());
        let cyclic = vec![
            TreeNode::leaf(0.0, 1),
            TreeNode::internal(0, 0.5, 2, 2, 0.0, 1),
            TreeNode::internal(0, 0.5, 1, 1, 0.0, 1),
        ];
        assert!(RegressionTree::new(cyclic, 1).is_err());
        assert!(RegressionTree::new(vec![TreeNode::internal(3, 0.5, 1, 2, 0.0, 2)], 2).is_err());
    }
}
