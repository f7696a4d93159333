//! Path-dependent Tree SHAP.
//!
//! A single depth-first pass per tree keeps, for the current root-to-node
//! path, the distinct split features seen so far together with the fraction
//! of coalitions that exclude (`zero`) or include (`one`) each of them and
//! the permutation weight of every subset size. At a leaf the weight of each
//! feature is recovered by "unwinding" it from the path. Runtime is
//! `O(L·D²)` per tree for `L` leaves and depth `D`.

use super::{check_input, Attribution, Method, TreeEnsemble};
use crate::error::Result;
use crate::forest::{NodeKind, RegressionTree};

/// Tree SHAP values for `x`, equal (up to rounding) to [`super::shapley_oracle`].
pub fn shap_attribute(model: &impl TreeEnsemble, x: &[f64]) -> Result<Attribution> {
    check_input(model, x)?;
    let trees = model.members();
    let mut contributions = vec![0.0; model.n_features()];
    let mut bias = 0.0;
    let mut path = Vec::new();
    for tree in trees {
        bias += tree.expected_value();
        let d = tree.depth();
        path.clear();
        path.resize((d + 2) * (d + 3) / 2, PathElement::default());
        let mut walk = Walk {
            tree,
            x,
            phi: &mut contributions,
            path: &mut path,
        };
        walk.recurse(0, 0, 0, 1.0, 1.0, ROOT_FEATURE);
    }
    let n = trees.len() as f64;
    contributions.iter_mut().for_each(|c| *c /= n);
    Ok(Attribution {
        bias: bias / n,
        contributions,
        method: Method::Shap,
    })
}

const ROOT_FEATURE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, Default)]
struct PathElement {
    feature: usize,
    zero: f64,
    one: f64,
    weight: f64,
}

struct Walk<'a> {
    tree: &'a RegressionTree,
    x: &'a [f64],
    phi: &'a mut [f64],
    /// Stack of path copies, one per recursion level.
    path: &'a mut Vec<PathElement>,
}

impl Walk<'_> {
    /// `parent` is the offset of the parent's path, which holds `depth`
    /// elements; this node's path is written right after it.
    fn recurse(&mut self, node_id: usize, parent: usize, depth: usize, zero: f64, one: f64, feature: usize) {
        let offset = parent + depth + 1;
        self.path.copy_within(parent..parent + depth + 1, offset);
        let mut depth = depth;
        extend(&mut self.path[offset..], depth, zero, one, feature);

        let tree = self.tree;
        let node = &tree.nodes()[node_id];
        match node.kind {
            NodeKind::Leaf => {
                let path = &self.path[offset..=offset + depth];
                for i in 1..=depth {
                    let w = unwound_sum(path, depth, i);
                    let el = path[i];
                    self.phi[el.feature] += w * (el.one - el.zero) * node.value;
                }
            }
            NodeKind::Internal {
                feature: split,
                threshold,
                left,
                right,
            } => {
                let (hot, cold) = if self.x[split] <= threshold {
                    (left, right)
                } else {
                    (right, left)
                };
                let (mut incoming_zero, mut incoming_one) = (1.0, 1.0);
                let path = &mut self.path[offset..];
                if let Some(k) = (1..=depth).find(|&k| path[k].feature == split) {
                    incoming_zero = path[k].zero;
                    incoming_one = path[k].one;
                    unwind(path, depth, k);
                    depth -= 1;
                }
                let nodes = tree.nodes();
                let cover = node.cover as f64;
                let hot_zero = nodes[hot].cover as f64 / cover;
                let cold_zero = nodes[cold].cover as f64 / cover;
                self.recurse(hot, offset, depth + 1, hot_zero * incoming_zero, incoming_one, split);
                self.recurse(cold, offset, depth + 1, cold_zero * incoming_zero, 0.0, split);
            }
        }
    }
}

/// Appends a feature to a path holding `depth` elements and updates the
/// subset-size weights.
fn extend(path: &mut [PathElement], depth: usize, zero: f64, one: f64, feature: usize) {
    path[depth] = PathElement {
        feature,
        zero,
        one,
        weight: if depth == 0 { 1.0 } else { 0.0 },
    };
    let len = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / len;
        path[i].weight = zero * path[i].weight * (depth - i) as f64 / len;
    }
}

/// Inverse of [`extend`] for element `index` of a path whose last index is `depth`.
fn unwind(path: &mut [PathElement], depth: usize, index: usize) {
    let PathElement { zero, one, .. } = path[index];
    let len = (depth + 1) as f64;
    let mut next = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next * len / ((i + 1) as f64 * one);
            next = tmp - path[i].weight * zero * (depth - i) as f64 / len;
        } else {
            path[i].weight = path[i].weight * len / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
}

/// Total weight the path would have after unwinding `index`, without modifying it.
fn unwound_sum(path: &[PathElement], depth: usize, index: usize) -> f64 {
    let PathElement { zero, one, .. } = path[index];
    let len = (depth + 1) as f64;
    let mut total = 0.0;
    if one != 0.0 {
        let mut next = path[depth].weight;
        for i in (0..depth).rev() {
            let tmp = next * len / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].weight - tmp * zero * ((depth - i) as f64 / len);
        }
    } else {
        for i in (0..depth).rev() {
            total += path[i].weight / (zero * ((depth - i) as f64 / len));
        }
    }
    total
}
