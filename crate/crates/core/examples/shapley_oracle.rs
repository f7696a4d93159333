//! Check Tree SHAP against exhaustive Shapley enumeration on a hand-built
//! tree, where decision-path attributions differ from both.

use treexplain::attribution::{conditional_expectation, shap_attribute, shapley_oracle, ti_attribute};
use treexplain::forest::{RegressionTree, TreeNode};

fn main() -> treexplain::Result<()> {
    // x0 <= 0.5 -> 1.0 (cover 2); else x1 <= 0.5 -> 3.0 (1) | 5.0 (1)
    let tree = RegressionTree::new(
        vec![
            TreeNode::internal(0, 0.5, 1, 2, 2.5, 4),
            TreeNode::leaf(1.0, 2),
            TreeNode::internal(1, 0.5, 3, 4, 4.0, 2),
            TreeNode::leaf(3.0, 1),
            TreeNode::leaf(5.0, 1),
        ],
        2,
    )?;
    let x = [1.0, 1.0];

    for (label, subset) in [
        ("{}", [false, false]),
        ("{x0}", [true, false]),
        ("{x1}", [false, true]),
        ("{x0,x1}", [true, true]),
    ] {
        println!("E[f | {label}] = {}", conditional_expectation(&tree, &x, &subset)?);
    }

    let oracle = shapley_oracle(&tree, &x)?;
    let shap = shap_attribute(&tree, &x)?;
    let ti = ti_attribute(&tree, &x)?;
    println!("oracle    {:?}", oracle.contributions);
    println!("tree shap {:?}", shap.contributions);
    println!("ti        {:?}", ti.contributions);
    let gap = oracle
        .contributions
        .iter()
        .zip(&shap.contributions)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max |oracle - tree shap| = {gap:e}");
    Ok(())
}
