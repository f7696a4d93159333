//! Fit a random forest, report train/validation error and round-trip the
//! model through its JSON file format.

use treexplain::dataset::{split, synthesize, SynthConfig};
use treexplain::forest::{fit_forest, load_model, save_model, ForestParams};

fn main() -> treexplain::Result<()> {
    let data = synthesize(&SynthConfig::new(3000, 3, 3, vec![1.0, 0.7, 0.4], 0.05, 1))?;
    let (train, val, _test) = split(&data, (0.6, 0.2, 0.2), 1)?;

    let params = ForestParams {
        n_estimators: 50,
        max_depth: 8,
        ..ForestParams::default()
    };
    let forest = fit_forest(&train, &params)?;

    for (name, part) in [("train", &train), ("val", &val)] {
        let mse = part
            .rows()
            .zip(part.targets())
            .map(|(x, y)| (forest.predict_unchecked(x) - y).powi(2))
            .sum::<f64>()
            / part.n_rows() as f64;
        println!("{name} MSE {mse:.5}");
    }
    let leaves: usize = forest.trees().iter().map(|t| t.n_leaves()).sum();
    println!(
        "{} trees, {leaves} leaves, deepest {}",
        forest.trees().len(),
        forest.max_tree_depth()
    );

    let path = std::env::temp_dir().join("treexplain-forest.json");
    save_model(&forest, &path)?;
    let reloaded = load_model(&path)?;
    let x = val.row(0);
    assert_eq!(forest.predict(x)?, reloaded.predict(x)?);
    println!(
        "reloaded model predicts {:.4} for the first validation row",
        reloaded.predict(x)?
    );
    Ok(())
}
