//! Spread of the largest attribution magnitudes per point, summarized by
//! the median over a test set.

use treexplain::attribution::Method;
use treexplain::dataset::{split, synthesize, SynthConfig};
use treexplain::evaluation::{report, top_k_variance, variance_report, Depth};
use treexplain::forest::{fit_forest, ForestParams};

fn main() -> treexplain::Result<()> {
    println!(
        "variance of top-3 of [5, -1, 3, 0.5] = {:.4}",
        top_k_variance(&[5.0, -1.0, 3.0, 0.5], Depth::Top(3))?
    );

    let data = synthesize(&SynthConfig::new(3000, 4, 3, vec![1.0, 0.7, 0.4], 0.05, 4))?;
    let (train, _val, test) = split(&data, (0.6, 0.2, 0.2), 4)?;
    let forest = fit_forest(
        &train,
        &ForestParams {
            n_estimators: 50,
            max_depth: 10,
            ..ForestParams::default()
        },
    )?;
    let r = variance_report(
        &forest,
        &test,
        &[Method::Shap, Method::Ti],
        &[Depth::All, Depth::Top(5), Depth::Top(3)],
    )?;
    print!("{}", report::variance_table(&r));
    Ok(())
}
