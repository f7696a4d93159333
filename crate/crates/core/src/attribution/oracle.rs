//! Path-dependent value function and exhaustive Shapley enumeration.

use super::{check_input, Attribution, Method, TreeEnsemble};
use crate::error::{argument, Error, Result};
use crate::forest::{NodeKind, RegressionTree};

/// Largest feature count [`shapley_oracle`] accepts.
pub const DEFAULT_ORACLE_LIMIT: usize = 15;

/// Expected model output given the features in `subset` are fixed to `x`.
///
/// At a split on a feature in `subset` the descent follows `x`; otherwise it
/// returns the cover-weighted average of both children. For an ensemble the
/// result is the mean over trees.
pub fn conditional_expectation(model: &impl TreeEnsemble, x: &[f64], subset: &[bool]) -> Result<f64> {
    check_input(model, x)?;
    if subset.len() != model.n_features() {
        return Err(argument(format!(
            "subset mask has {} entries, model has {} features",
            subset.len(),
            model.n_features()
        )));
    }
    let trees = model.members();
    let total: f64 = trees.iter().map(|t| expectation(t, 0, x, &|f| subset[f])).sum();
    Ok(total / trees.len() as f64)
}

fn expectation(tree: &RegressionTree, id: usize, x: &[f64], known: &impl Fn(usize) -> bool) -> f64 {
    let node = &tree.nodes()[id];
    match node.kind {
        NodeKind::Leaf => node.value,
        NodeKind::Internal {
            feature,
            threshold,
            left,
            right,
        } => {
            if known(feature) {
                let next = if x[feature] <= threshold { left } else { right };
                expectation(tree, next, x, known)
            } else {
                let (l, r) = (&tree.nodes()[left], &tree.nodes()[right]);
                (l.cover as f64 * expectation(tree, left, x, known)
                    + r.cover as f64 * expectation(tree, right, x, known))
                    / node.cover as f64
            }
        }
    }
}

/// Exact Shapley values by enumerating all `2^n` coalitions, with at most
/// [`DEFAULT_ORACLE_LIMIT`] features.
pub fn shapley_oracle(model: &impl TreeEnsemble, x: &[f64]) -> Result<Attribution> {
    shapley_oracle_with_limit(model, x, DEFAULT_ORACLE_LIMIT)
}

pub fn shapley_oracle_with_limit(model: &impl TreeEnsemble, x: &[f64], limit: usize) -> Result<Attribution> {
    check_input(model, x)?;
    let n = model.n_features();
    if n > limit || n >= 63 {
        return Err(Error::Capacity(format!(
            "exhaustive Shapley enumeration over {n} features exceeds the limit of {limit}"
        )));
    }
    let trees = model.members();
    let value: Vec<f64> = (0u64..1 << n)
        .map(|mask| {
            let known = |f: usize| mask >> f & 1 == 1;
            trees.iter().map(|t| expectation(t, 0, x, &known)).sum::<f64>() / trees.len() as f64
        })
        .collect();

    // weight(s) = s!(n-s-1)!/n! = 1 / (n * C(n-1, s))
    let weight: Vec<f64> = (0..n).map(|s| 1.0 / (n as f64 * binomial(n - 1, s))).collect();
    let mut contributions = vec![0.0; n];
    for mask in 0u64..1 << n {
        let size = mask.count_ones() as usize;
        for (i, phi) in contributions.iter_mut().enumerate() {
            if mask >> i & 1 == 0 {
                *phi += weight[size] * (value[(mask | 1 << i) as usize] - value[mask as usize]);
            }
        }
    }
    Ok(Attribution {
        bias: value[0],
        contributions,
        method: Method::Oracle,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}
