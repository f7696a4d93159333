use super::{check_input, Attribution, Method, TreeEnsemble};
use crate::error::Result;
use crate::forest::NodeKind;

/// Decision-path attribution.
///
/// The bias of a tree is its root value. Walking `x`'s path, each split on
/// feature `m` adds `value(child) - value(node)` to contribution `m`, so the
/// sum telescopes to the leaf value.
pub fn ti_attribute(model: &impl TreeEnsemble, x: &[f64]) -> Result<Attribution> {
    check_input(model, x)?;
    let trees = model.members();
    let mut bias = 0.0;
    let mut contributions = vec![0.0; model.n_features()];
    for tree in trees {
        let nodes = tree.nodes();
        bias += nodes[0].value;
        let mut id = 0;
        while let NodeKind::Internal {
            feature,
            threshold,
            left,
            right,
        } = nodes[id].kind
        {
            let child = if x[feature] <= threshold { left } else { right };
            contributions[feature] += nodes[child].value - nodes[id].value;
            id = child;
        }
    }
    let n = trees.len() as f64;
    contributions.iter_mut().for_each(|c| *c /= n);
    Ok(Attribution {
        bias: bias / n,
        contributions,
        method: Method::Ti,
    })
}
