//! Per-instance attribution cost as the maximum tree depth grows.

use treexplain::attribution::Method;
use treexplain::bench::{depth_scaling, write_timing_csv};
use treexplain::dataset::{synthesize, SynthConfig};
use treexplain::forest::ForestParams;

fn main() -> treexplain::Result<()> {
    let data = synthesize(&SynthConfig::new(4000, 3, 3, vec![1.0, 0.7, 0.4], 0.05, 8))?;
    let probe = data.select(&(0..20).collect::<Vec<_>>());
    let base = ForestParams {
        n_estimators: 30,
        ..ForestParams::default()
    };
    let records = depth_scaling(&data, &probe, &[2, 4, 8, 12], &base, &[Method::Shap, Method::Ti], 3)?;
    for pair in records.chunks(2) {
        println!(
            "depth {:>2}: SHAP {:.2e} s, TI {:.2e} s, ratio {:.0}",
            pair[0].max_depth,
            pair[0].seconds_per_instance,
            pair[1].seconds_per_instance,
            pair[0].seconds_per_instance / pair[1].seconds_per_instance
        );
    }
    write_timing_csv(std::io::stdout().lock(), &records)
}
