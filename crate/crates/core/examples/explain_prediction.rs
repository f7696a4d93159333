//! Explain one prediction with decision-path (TI) and Tree SHAP
//! attributions and compare the feature rankings they induce.

use treexplain::attribution::{attribute, Method};
use treexplain::dataset::{synthesize, SynthConfig};
use treexplain::forest::{fit_forest, ForestParams};

fn main() -> treexplain::Result<()> {
    let data = synthesize(&SynthConfig::new(2000, 3, 3, vec![1.0, 0.7, 0.4], 0.05, 3))?;
    let forest = fit_forest(
        &data,
        &ForestParams {
            n_estimators: 40,
            max_depth: 8,
            ..ForestParams::default()
        },
    )?;
    let x = data.row(11);
    let prediction = forest.predict(x)?;
    println!("x = {x:.3?}\nprediction = {prediction:.5}");

    for method in [Method::Ti, Method::Shap] {
        let a = attribute(&forest, x, method)?;
        println!("\n{} (bias {:.4}, total {:.5})", method.label(), a.bias, a.total());
        for &f in a.ranked().order() {
            println!("  {:<8} {:+.5}", forest.feature_names()[f], a.contributions[f]);
        }
    }
    Ok(())
}
