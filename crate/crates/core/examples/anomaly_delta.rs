//! Explain why one row's target is higher than a baseline row from the same
//! covariate template by ranking features on the attribution difference.

use treexplain::attribution::{attribute, delta_attribution, Method};
use treexplain::dataset::{build_templates, synthesize, SynthConfig};
use treexplain::evaluation::qualifying_pairs;
use treexplain::forest::{fit_forest, ForestParams};

fn main() -> treexplain::Result<()> {
    let data = synthesize(&SynthConfig::new(2000, 3, 3, vec![1.0, 0.7, 0.4], 0.05, 5))?;
    let forest = fit_forest(
        &data,
        &ForestParams {
            n_estimators: 50,
            max_depth: 10,
            ..ForestParams::default()
        },
    )?;

    let templates = build_templates(&data, None)?;
    let pairs = qualifying_pairs(&templates, &data);
    println!("{} pairs differ in exactly one treatment", pairs.len());

    for pair in pairs.iter().take(5) {
        let changed = &data.schema().treatment_columns[pair.treatment];
        print!(
            "rows {} -> {}: {} changed, target {:+.3};",
            pair.baseline,
            pair.anomaly,
            changed,
            data.targets()[pair.anomaly] - data.targets()[pair.baseline]
        );
        for method in [Method::Shap, Method::Ti] {
            let a = attribute(&forest, data.row(pair.anomaly), method)?;
            let b = attribute(&forest, data.row(pair.baseline), method)?;
            let delta = delta_attribution(&a, &b)?;
            let top = delta.ranked().top(1)[0];
            print!(" {} blames {}", method.label(), data.feature_names()[top]);
        }
        println!();
    }
    Ok(())
}
