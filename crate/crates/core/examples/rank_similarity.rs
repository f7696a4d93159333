//! How similar are TI and Tree SHAP rankings? Rank-biased overlap on toy
//! lists, then the median over a test set at several depths.

use treexplain::attribution::{Method, RankedList};
use treexplain::dataset::{split, synthesize, SynthConfig};
use treexplain::evaluation::{rbo, report, similarity_report, Depth, RboParams};
use treexplain::forest::{fit_forest, ForestParams};

fn main() -> treexplain::Result<()> {
    let a = RankedList::from_order(vec![0, 1, 2])?;
    let b = RankedList::from_order(vec![1, 0, 2])?;
    println!("rbo([a,b,c], [b,a,c]) = {:.3}", rbo(&a, &b, RboParams::default())?);

    let data = synthesize(&SynthConfig::new(3000, 4, 3, vec![1.0, 0.7, 0.4], 0.05, 9))?;
    let (train, _val, test) = split(&data, (0.6, 0.2, 0.2), 9)?;
    let forest = fit_forest(
        &train,
        &ForestParams {
            n_estimators: 50,
            max_depth: 10,
            ..ForestParams::default()
        },
    )?;
    let depths = [Depth::All, Depth::Top(5), Depth::Top(3)];
    let r = similarity_report(&forest, &test, (Method::Shap, Method::Ti), 0.9, &depths)?;
    print!("{}", report::similarity_table(&r));
    Ok(())
}
