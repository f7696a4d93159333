//! Does the top-ranked feature name the treatment that was changed?
//! Implicit accuracy uses pairs found in the data, explicit accuracy
//! perturbs each treatment of each test row.

use treexplain::attribution::Method;
use treexplain::dataset::{build_templates, split, synthesize, SynthConfig};
use treexplain::evaluation::{explicit_accuracy, implicit_accuracy, report};
use treexplain::forest::{fit_forest, ForestParams};

fn main() -> treexplain::Result<()> {
    let data = synthesize(&SynthConfig::new(3000, 3, 3, vec![1.0, 0.7, 0.4], 0.05, 2))?;
    let (train, _val, test) = split(&data, (0.6, 0.2, 0.2), 2)?;
    let forest = fit_forest(
        &train,
        &ForestParams {
            n_estimators: 50,
            max_depth: 10,
            ..ForestParams::default()
        },
    )?;
    let methods = [Method::Shap, Method::Ti];
    let ks = [1, 3];

    let templates = build_templates(&data, None)?;
    let implicit = methods
        .iter()
        .map(|&m| implicit_accuracy(&forest, &templates, &data, m, &ks))
        .collect::<treexplain::Result<Vec<_>>>()?;
    print!("{}", report::accuracy_table("Implicit", &implicit));

    let explicit = methods
        .iter()
        .map(|&m| explicit_accuracy(&forest, &test, m, &ks))
        .collect::<treexplain::Result<Vec<_>>>()?;
    print!("{}", report::accuracy_table("Explicit", &explicit));
    Ok(())
}
