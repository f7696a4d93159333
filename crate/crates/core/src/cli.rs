//! `treexplain` command line: train, attribute, evaluate and bench.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors.
//! Outputs go under `--out` with fixed file names per subcommand, except for
//! `train`, where `--out` is the model file itself.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::attribution::{
    attribute, delta_attribution, write_attributions_csv, write_attributions_json, write_deltas_csv, Method,
};
use crate::bench::{depth_scaling, time_attribution, write_series, write_timing_csv};
use crate::dataset::{
    build_templates, load_table, save_table, split, subsample_unique, synthesize, BinWidths, Dataset, SchemaConfig,
    SynthConfig,
};
use crate::error::{validation, Error, Result};
use crate::evaluation::{explicit_accuracy, implicit_accuracy, report, similarity_report, variance_report, Depth};
use crate::forest::{fit_forest, load_model, save_model, Forest, ForestParams};
use crate::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(
    name = "treexplain",
    version,
    about = "Tree-ensemble feature attribution and its evaluation"
)]
pub struct Cli {
    /// Worker threads for parallel sections (results do not depend on it).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic interventional dataset (data.csv + schema.json).
    Synth(SynthArgs),
    /// Subsample, split 60/20/20 and fit a random forest.
    Train(TrainArgs),
    /// Per-row attributions, or one delta attribution between two rows.
    Attribute(AttributeArgs),
    /// Evaluation reports.
    #[command(subcommand)]
    Evaluate(EvaluateCommand),
    /// Attribution timing.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
}

#[derive(Debug, Args)]
pub struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    pub estimators: usize,
    #[arg(long, default_value_t = 10)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub bootstrap: bool,
    #[arg(long, default_value_t = 1.0)]
    pub feature_fraction: f64,
    #[arg(long, env = "TREEXPLAIN_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

impl ForestArgs {
    fn params(&self) -> ForestParams {
        ForestParams {
            n_estimators: self.estimators,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_leaf,
            bootstrap: self.bootstrap,
            feature_fraction: self.feature_fraction,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 5000)]
    pub rows: usize,
    #[arg(long, default_value_t = 3)]
    pub covariates: usize,
    /// Per-treatment effect weights; their count sets the number of treatments.
    #[arg(long, value_delimiter = ',', default_value = "1.0,0.7,0.4")]
    pub weights: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, env = "TREEXPLAIN_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Reduce the data to this many rows, keeping distinct rows first.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Directory for train.csv, val.csv, test.csv and their schema.json.
    #[arg(long)]
    pub split_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodChoice {
    Ti,
    Shap,
    Both,
}

impl MethodChoice {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Ti => vec![Method::Ti],
            MethodChoice::Shap => vec![Method::Shap],
            MethodChoice::Both => vec![Method::Shap, Method::Ti],
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AttributeArgs {
    #[command(flatten)]
    pub common: ModelArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub method: MethodChoice,
    #[arg(long, requires = "anomaly_row")]
    pub baseline_row: Option<usize>,
    #[arg(long, requires = "baseline_row")]
    pub anomaly_row: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum EvaluateCommand {
    /// Median RBO between SHAP and TI rankings.
    Rbo {
        #[command(flatten)]
        common: ModelArgs,
        /// Evaluation depths (`all` or integers).
        #[arg(long, value_delimiter = ',', default_value = "all,5,3", value_parser = parse_depth)]
        k: Vec<Depth>,
        #[arg(long, default_value_t = 0.9)]
        p: f64,
    },
    /// Median variance of the top-k attribution magnitudes.
    Variance {
        #[command(flatten)]
        common: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "all,5,3", value_parser = parse_depth)]
        k: Vec<Depth>,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodChoice,
    },
    /// Accuracy on within-template pairs differing in one treatment.
    Implicit {
        #[command(flatten)]
        common: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,3", value_parser = clap::value_parser!(u64).range(1..))]
        top: Vec<u64>,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodChoice,
        /// Bin width for a continuous covariate, as `column=width`; repeatable.
        #[arg(long, value_parser = parse_bin)]
        bin: Vec<(String, f64)>,
    },
    /// Accuracy under explicit ±1 (mod cardinality) treatment interventions.
    Explicit {
        #[command(flatten)]
        common: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,3", value_parser = clap::value_parser!(u64).range(1..))]
        top: Vec<u64>,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodChoice,
    },
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Time attribution of the first `--probe` rows with an existing model.
    Time {
        #[command(flatten)]
        common: ModelArgs,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodChoice,
        #[arg(long)]
        probe: Option<usize>,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
    },
    /// Train one forest per depth and time both methods on a probe set.
    DepthScaling {
        #[command(flatten)]
        input: DataArgs,
        #[command(flatten)]
        forest: ForestArgs,
        /// Ascending list of maximum depths.
        #[arg(long, value_parser = parse_depths, default_value = "5,10,15,20")]
        depths: AscendingDepths,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodChoice,
        #[arg(long, default_value_t = 20)]
        probe: usize,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Strictly ascending depths, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AscendingDepths(pub Vec<usize>);

fn parse_depths(s: &str) -> std::result::Result<AscendingDepths, String> {
    let depths = s
        .split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|e| format!("`{d}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if depths.is_empty() || depths[0] == 0 || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("depths must be ascending and at least 1, got {depths:?}"));
    }
    Ok(AscendingDepths(depths))
}

fn parse_depth(s: &str) -> std::result::Result<Depth, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_bin(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, width) = s.split_once('=').ok_or("expected `column=width`")?;
    let width: f64 = width.parse().map_err(|e| format!("`{width}`: {e}"))?;
    if !(width.is_finite() && width > 0.0) {
        return Err(format!("bin width must be positive, got {width}"));
    }
    Ok((name.to_string(), width))
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Attribute(args) => cmd_attribute(args),
        Command::Evaluate(cmd) => cmd_evaluate(cmd),
        Command::Bench(cmd) => cmd_bench(cmd),
    }
}

fn load_data(args: &DataArgs) -> Result<Dataset> {
    let schema = SchemaConfig::from_json_file(&args.schema)?;
    load_table(&args.data, &schema)
}

fn load_model_for(args: &ModelArgs) -> Result<(Forest, Dataset)> {
    let data = load_data(&args.input)?;
    let model = load_model(&args.model)?;
    if model.feature_names() != data.feature_names() {
        return Err(validation(format!(
            "model features {:?} do not match data features {:?}",
            model.feature_names(),
            data.feature_names()
        )));
    }
    fs::create_dir_all(&args.out)?;
    Ok((model, data))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

fn mse(model: &Forest, data: &Dataset) -> f64 {
    let sum: f64 = data
        .rows()
        .zip(data.targets())
        .map(|(x, y)| (model.predict_unchecked(x) - y).powi(2))
        .sum();
    sum / data.n_rows() as f64
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let config = SynthConfig::new(
        args.rows,
        args.covariates,
        args.weights.len(),
        args.weights.clone(),
        args.noise,
        args.seed,
    );
    let data = synthesize(&config)?;
    fs::create_dir_all(&args.out)?;
    save_table(&data, args.out.join("data.csv"))?;
    config.schema().to_json_file(args.out.join("schema.json"))?;
    println!("wrote {} rows to {}", data.n_rows(), args.out.display());
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let params = args.forest.params();
    params.validate()?;
    let mut data = load_data(&args.input)?;
    if let Some(rows) = args.subsample {
        data = subsample_unique(&data, rows, params.seed)?;
    }
    let (train, val, test) = split(&data, (0.6, 0.2, 0.2), params.seed)?;
    if let Some(dir) = &args.split_out {
        fs::create_dir_all(dir)?;
        save_table(&train, dir.join("train.csv"))?;
        save_table(&val, dir.join("val.csv"))?;
        save_table(&test, dir.join("test.csv"))?;
        data.schema().as_stored().to_json_file(dir.join("schema.json"))?;
    }
    let model = fit_forest(&train, &params)?;
    save_model(&model, &args.out)?;
    println!(
        "rows: train {} / val {} / test {}",
        train.n_rows(),
        val.n_rows(),
        test.n_rows()
    );
    println!("train MSE: {:.6}", mse(&model, &train));
    if !val.is_empty() {
        println!("val MSE: {:.6}", mse(&model, &val));
    }
    println!("model written to {}", args.out.display());
    Ok(())
}

fn cmd_attribute(args: &AttributeArgs) -> Result<()> {
    let (model, data) = load_model_for(&args.common)?;
    let out = &args.common.out;
    let methods = args.method.methods();
    if let (Some(baseline), Some(anomaly)) = (args.baseline_row, args.anomaly_row) {
        for row in [baseline, anomaly] {
            if row >= data.n_rows() {
                return Err(Error::Argument(format!(
                    "row {row} is out of range ({} rows)",
                    data.n_rows()
                )));
            }
        }
        let deltas = methods
            .iter()
            .map(|&m| {
                let a = attribute(&model, data.row(anomaly), m)?;
                let b = attribute(&model, data.row(baseline), m)?;
                Ok((anomaly, baseline, delta_attribution(&a, &b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        write_deltas_csv(create(out, "delta.csv")?, model.feature_names(), &deltas)?;
        println!(
            "wrote {} delta rows to {}",
            deltas.len(),
            out.join("delta.csv").display()
        );
        return Ok(());
    }

    let per_method = methods
        .iter()
        .map(|&m| crate::evaluation::attribute_all(&model, &data, m))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(data.n_rows() * methods.len());
    for i in 0..data.n_rows() {
        for attributions in &per_method {
            rows.push((i, attributions[i].clone()));
        }
    }
    write_attributions_csv(create(out, "attributions.csv")?, model.feature_names(), &rows)?;
    write_attributions_json(create(out, "attributions.json")?, &rows)?;
    println!("wrote {} attribution rows to {}", rows.len(), out.display());
    Ok(())
}

fn ks(top: &[u64]) -> Vec<usize> {
    top.iter().map(|&k| k as usize).collect()
}

fn cmd_evaluate(cmd: &EvaluateCommand) -> Result<()> {
    match cmd {
        EvaluateCommand::Rbo { common, k, p } => {
            let (model, data) = load_model_for(common)?;
            let r = similarity_report(&model, &data, (Method::Shap, Method::Ti), *p, k)?;
            let text = report::similarity_table(&r);
            print!("{text}");
            write_text(&common.out, "rbo.txt", &text)?;
            write_json(&common.out, "rbo.json", &report::similarity_json(&r))
        }
        EvaluateCommand::Variance { common, k, method } => {
            let (model, data) = load_model_for(common)?;
            let r = variance_report(&model, &data, &method.methods(), k)?;
            let text = report::variance_table(&r);
            print!("{text}");
            write_text(&common.out, "variance.txt", &text)?;
            write_json(&common.out, "variance.json", &report::variance_json(&r))
        }
        EvaluateCommand::Implicit {
            common,
            top,
            method,
            bin,
        } => {
            let (model, data) = load_model_for(common)?;
            let bins: BinWidths = bin.iter().cloned().collect();
            let templates = build_templates(&data, (!bins.is_empty()).then_some(&bins))?;
            let reports = method
                .methods()
                .into_iter()
                .map(|m| implicit_accuracy(&model, &templates, &data, m, &ks(top)))
                .collect::<Result<Vec<_>>>()?;
            if reports[0].total_samples() == 0 {
                eprintln!("warning: no within-template pair differs in exactly one treatment");
            }
            emit_accuracy(
                &common.out,
                "implicit",
                "Implicit interventional attribution accuracy",
                &reports,
            )
        }
        EvaluateCommand::Explicit { common, top, method } => {
            let (model, data) = load_model_for(common)?;
            let reports = method
                .methods()
                .into_iter()
                .map(|m| explicit_accuracy(&model, &data, m, &ks(top)))
                .collect::<Result<Vec<_>>>()?;
            emit_accuracy(
                &common.out,
                "explicit",
                "Explicit interventional attribution accuracy",
                &reports,
            )
        }
    }
}

fn emit_accuracy(out: &Path, stem: &str, title: &str, reports: &[crate::evaluation::AccuracyReport]) -> Result<()> {
    for r in reports {
        for c in r.empty_cells().filter(|c| c.k == r.params.ks[0]) {
            eprintln!(
                "warning: {} has no qualifying samples for {}",
                c.treatment,
                r.method().label()
            );
        }
    }
    let text = report::accuracy_table(title, reports);
    print!("{text}");
    write_text(out, &format!("{stem}.txt"), &text)?;
    write_json(out, &format!("{stem}.json"), &report::accuracy_json(reports))
}

fn cmd_bench(cmd: &BenchCommand) -> Result<()> {
    match cmd {
        BenchCommand::Time {
            common,
            method,
            probe,
            repetitions,
        } => {
            let (model, data) = load_model_for(common)?;
            let n = probe.unwrap_or(data.n_rows()).min(data.n_rows());
            let instances = data.select(&(0..n).collect::<Vec<_>>());
            let records = method
                .methods()
                .into_iter()
                .map(|m| time_attribution(&model, &instances, m, *repetitions))
                .collect::<Result<Vec<_>>>()?;
            write_timing_csv(create(&common.out, "timing.csv")?, &records)?;
            for r in &records {
                println!(
                    "{}: {:.3e} s/instance over {} instances",
                    r.method.label(),
                    r.seconds_per_instance,
                    r.n_instances
                );
            }
            Ok(())
        }
        BenchCommand::DepthScaling {
            input,
            forest,
            depths,
            method,
            probe,
            repetitions,
            out,
        } => {
            let data = load_data(input)?;
            let n = (*probe).min(data.n_rows());
            let probe_set = data.select(&(0..n).collect::<Vec<_>>());
            let methods = method.methods();
            let records = depth_scaling(&data, &probe_set, &depths.0, &forest.params(), &methods, *repetitions)?;
            fs::create_dir_all(out)?;
            write_timing_csv(create(out, "depth_scaling.csv")?, &records)?;
            for m in methods {
                write_series(create(out, &format!("depth_scaling_{m}.dat"))?, &records, m)?;
            }
            for r in &records {
                println!(
                    "depth {:>3}  {:<8} {:.3e} s/instance",
                    r.max_depth,
                    r.method.label(),
                    r.seconds_per_instance
                );
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn depth_lists() {
        assert_eq!(parse_depths("5,10,15,20").unwrap().0, vec![5, 10, 15, 20]);
        assert!(parse_depths("10,5").is_err());
        assert!(parse_depths("0,5").is_err());
        assert!(parse_depths("5,5").is_err());
    }

    #[test]
    fn missing_schema_is_a_usage_error() {
        let err = Cli::try_parse_from(["treexplain", "train", "--data", "d.csv", "--out", "m.json"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = Cli::try_parse_from([
            "treexplain",
            "bench",
            "depth-scaling",
            "--data",
            "d",
            "--schema",
            "s",
            "--out",
            "o",
            "--depths",
            "20,5",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bins() {
        assert_eq!(parse_bin("age=0.5").unwrap(), ("age".to_string(), 0.5));
        assert!(parse_bin("age").is_err());
        assert!(parse_bin("age=-1").is_err());
    }
}
