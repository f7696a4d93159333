//! Synthesize a table, write it to CSV, read it back, deduplicate, split
//! 60/20/20 and group rows into covariate templates.

use treexplain::dataset::{build_templates, load_table, save_table, split, subsample_unique, synthesize, SynthConfig};

fn main() -> treexplain::Result<()> {
    let config = SynthConfig::new(1000, 3, 3, vec![1.0, 0.7, 0.4], 0.05, 7);
    let data = synthesize(&config)?;

    let dir = std::env::temp_dir().join("treexplain-dataset-pipeline");
    std::fs::create_dir_all(&dir)?;
    let schema = config.schema();
    schema.to_json_file(dir.join("schema.json"))?;
    save_table(&data, dir.join("data.csv"))?;
    let loaded = load_table(dir.join("data.csv"), &schema)?;
    println!(
        "{} rows x {} features: {:?}",
        loaded.n_rows(),
        loaded.n_features(),
        loaded.feature_names()
    );

    let reduced = subsample_unique(&loaded, 800, 7)?;
    let (train, val, test) = split(&reduced, (0.6, 0.2, 0.2), 7)?;
    println!("split: {} / {} / {}", train.n_rows(), val.n_rows(), test.n_rows());

    let templates = build_templates(&loaded, None)?;
    let sizes: Vec<usize> = templates.iter().map(|t| t.member_indices.len()).collect();
    println!(
        "{} templates, largest has {} rows",
        templates.len(),
        sizes.iter().max().copied().unwrap_or(0)
    );
    Ok(())
}
