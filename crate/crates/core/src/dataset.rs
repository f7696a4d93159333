//! Tabular data: schema, CSV ingestion, dedup-aware subsampling, seeded
//! splits, covariate templates and a synthetic interventional generator.
//!
//! Feature columns are always ordered covariates first, then treatments, in
//! the order the schema declares them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{argument, validation, Error, Result};

fn default_cardinality() -> u32 {
    3
}

/// Column roles of a tabular dataset.
///
/// Serialized as `{"covariates": [...], "treatments": [...], "target": "...", "log_target": bool}`
/// with an optional `treatment_cardinality` (default 3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaConfig {
    #[serde(rename = "covariates")]
    pub covariate_columns: Vec<String>,
    #[serde(rename = "treatments")]
    pub treatment_columns: Vec<String>,
    #[serde(rename = "target")]
    pub target_column: String,
    #[serde(rename = "log_target", default)]
    pub log_transform_target: bool,
    #[serde(default = "default_cardinality")]
    pub treatment_cardinality: u32,
}

impl SchemaConfig {
    pub fn new(
        covariates: impl IntoIterator<Item = impl Into<String>>,
        treatments: impl IntoIterator<Item = impl Into<String>>,
        target: impl Into<String>,
    ) -> Self {
        SchemaConfig {
            covariate_columns: covariates.into_iter().map(Into::into).collect(),
            treatment_columns: treatments.into_iter().map(Into::into).collect(),
            target_column: target.into(),
            log_transform_target: false,
            treatment_cardinality: default_cardinality(),
        }
    }

    pub fn with_log_target(mut self, log: bool) -> Self {
        self.log_transform_target = log;
        self
    }

    pub fn with_cardinality(mut self, cardinality: u32) -> Self {
        self.treatment_cardinality = cardinality;
        self
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path)?;
        let schema: SchemaConfig = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// Checks that column roles are disjoint and the cardinality is positive.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for name in self.covariate_columns.iter().chain(&self.treatment_columns) {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("column `{name}` declared more than once")));
            }
        }
        if seen.contains(self.target_column.as_str()) {
            return Err(Error::Schema(format!(
                "target column `{}` is also declared as a feature",
                self.target_column
            )));
        }
        if seen.is_empty() {
            return Err(Error::Schema("schema declares no feature columns".into()));
        }
        if self.treatment_cardinality == 0 {
            return Err(Error::Schema("treatment_cardinality must be positive".into()));
        }
        Ok(())
    }

    /// Feature names in matrix order: covariates, then treatments.
    pub fn feature_names(&self) -> Vec<String> {
        self.covariate_columns
            .iter()
            .chain(&self.treatment_columns)
            .cloned()
            .collect()
    }

    /// Schema describing targets that are already in model space.
    ///
    /// Tables written by [`save_table`] hold transformed targets, so they must be
    /// reloaded with this schema to avoid applying the log twice.
    pub fn as_stored(&self) -> Self {
        SchemaConfig {
            log_transform_target: false,
            ..self.clone()
        }
    }
}

/// A validated feature matrix with targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    targets: Vec<f64>,
    feature_names: Vec<String>,
    schema: SchemaConfig,
}

impl Dataset {
    /// Builds a dataset from row vectors, validating every invariant.
    pub fn from_rows(rows: Vec<Vec<f64>>, targets: Vec<f64>, schema: SchemaConfig) -> Result<Self> {
        schema.validate()?;
        let n_features = schema.covariate_columns.len() + schema.treatment_columns.len();
        if rows.len() != targets.len() {
            return Err(validation(format!(
                "{} feature rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(validation(format!(
                    "row {i} has {} values, schema declares {n_features} features",
                    row.len()
                )));
            }
            features.extend_from_slice(row);
        }
        Self::from_flat(features, targets, schema)
    }

    fn from_flat(features: Vec<f64>, targets: Vec<f64>, schema: SchemaConfig) -> Result<Self> {
        let feature_names = schema.feature_names();
        let data = Dataset {
            n_features: feature_names.len(),
            features,
            targets,
            feature_names,
            schema,
        };
        data.validate()?;
        Ok(data)
    }

    fn validate(&self) -> Result<()> {
        if self.features.len() != self.targets.len() * self.n_features {
            return Err(validation("feature matrix size does not match target count"));
        }
        let treatments = self.treatment_indices();
        let card = f64::from(self.schema.treatment_cardinality);
        for i in 0..self.n_rows() {
            let row = self.row(i);
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(validation(format!(
                    "non-finite value in row {i}, column `{}`",
                    self.feature_names[j]
                )));
            }
            if !self.targets[i].is_finite() {
                return Err(validation(format!("non-finite target in row {i}")));
            }
            for &j in &treatments {
                let v = row[j];
                if v.fract() != 0.0 || v < 0.0 || v >= card {
                    return Err(validation(format!(
                        "treatment `{}` in row {i} is {v}, expected an integer in [0, {card})",
                        self.feature_names[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact on an empty slice with chunk size 0 would panic
        self.features.chunks_exact(self.n_features.max(1)).take(self.n_rows())
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn schema(&self) -> &SchemaConfig {
        &self.schema
    }

    pub fn covariate_indices(&self) -> std::ops::Range<usize> {
        0..self.schema.covariate_columns.len()
    }

    pub fn treatment_indices(&self) -> Vec<usize> {
        (self.schema.covariate_columns.len()..self.n_features).collect()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            targets.push(self.targets[i]);
        }
        Dataset {
            features,
            n_features: self.n_features,
            targets,
            feature_names: self.feature_names.clone(),
            schema: self.schema.clone(),
        }
    }
}

/// Reads a CSV table with a header row and extracts the schema's columns.
///
/// The target is replaced by its natural log when `schema.log_transform_target` is set.
pub fn load_table(path: impl AsRef<Path>, schema: &SchemaConfig) -> Result<Dataset> {
    let file = File::open(path)?;
    read_table(BufReader::new(file), schema)
}

pub fn read_table<R: std::io::Read>(reader: R, schema: &SchemaConfig) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let position = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let names = schema.feature_names();
    let columns = names.iter().map(|n| position(n)).collect::<Result<Vec<_>>>()?;
    let target_col = position(&schema.target_column)?;

    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).unwrap_or("").trim();
            raw.parse::<f64>().map_err(|e| Error::Parse {
                row: row_idx + 1,
                column: name.to_string(),
                message: format!("`{raw}`: {e}"),
            })
        };
        for (col, name) in columns.iter().zip(&names) {
            features.push(cell(*col, name)?);
        }
        let mut y = cell(target_col, &schema.target_column)?;
        if schema.log_transform_target {
            if y <= 0.0 {
                return Err(validation(format!(
                    "target `{}` in row {} is {y}; log transform needs positive values",
                    schema.target_column,
                    row_idx + 1
                )));
            }
            y = y.ln();
        }
        targets.push(y);
    }
    Dataset::from_flat(features, targets, schema.clone())
}

/// Writes the feature columns and the (stored, possibly log-transformed) target.
///
/// Values use the shortest decimal form that parses back to the same `f64`.
pub fn save_table(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_table(data, BufWriter::new(file))
}

pub fn write_table<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = data.feature_names.iter().map(String::as_str).collect();
    header.push(&data.schema.target_column);
    wtr.write_record(&header)?;
    for (row, y) in data.rows().zip(&data.targets) {
        let record = row.iter().chain(std::iter::once(y)).map(|v| v.to_string());
        wtr.write_record(record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reduces `data` to `target_rows` rows while keeping as many distinct feature
/// rows as possible.
///
/// The first occurrence of every distinct feature row is treated as unique. If
/// the unique rows fit the budget they are all kept and the remainder is filled
/// by seeded sampling of duplicates; otherwise a seeded sample of the unique
/// rows is taken. Output preserves input row order.
pub fn subsample_unique(data: &Dataset, target_rows: usize, seed: u64) -> Result<Dataset> {
    if target_rows == 0 {
        return Err(argument("target_rows must be positive"));
    }
    if target_rows > data.n_rows() {
        return Err(argument(format!(
            "target_rows {target_rows} exceeds row count {}",
            data.n_rows()
        )));
    }
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(data.n_rows());
    let mut unique = Vec::new();
    let mut duplicates = Vec::new();
    for (i, row) in data.rows().enumerate() {
        let key: Vec<u64> = row.iter().map(|v| canonical_bits(*v)).collect();
        if seen.insert(key) {
            unique.push(i);
        } else {
            duplicates.push(i);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = if unique.len() <= target_rows {
        let fill = target_rows - unique.len();
        let mut chosen = unique;
        chosen.extend(duplicates.choose_multiple(&mut rng, fill).copied());
        chosen
    } else {
        unique.choose_multiple(&mut rng, target_rows).copied().collect()
    };
    chosen.sort_unstable();
    Ok(data.select(&chosen))
}

// -0.0 and 0.0 compare equal, so they must hash equal too.
fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// Seeded shuffle followed by a contiguous train/validation/test partition.
///
/// Validation and test sizes are `floor(n * fraction)`; the remainder goes to train.
pub fn split(data: &Dataset, fractions: (f64, f64, f64), seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let (train_f, val_f, test_f) = fractions;
    for f in [train_f, val_f, test_f] {
        if !(f.is_finite() && f > 0.0) {
            return Err(argument(format!("split fractions must be positive, got {f}")));
        }
    }
    if (train_f + val_f + test_f - 1.0).abs() > 1e-9 {
        return Err(argument(format!(
            "split fractions must sum to 1, got {}",
            train_f + val_f + test_f
        )));
    }
    let n = data.n_rows();
    let (n_val, n_test) = (split_size(n, val_f), split_size(n, test_f));
    let n_train = n - n_val - n_test;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, rest) = order.split_at(n_train);
    let (val, test) = rest.split_at(n_val);
    Ok((data.select(train), data.select(val), data.select(test)))
}

// The epsilon absorbs products such as 0.29 * 100 = 28.999999999999996.
fn split_size(n: usize, fraction: f64) -> usize {
    ((n as f64) * fraction + 1e-9).floor() as usize
}

/// Rows sharing the same (binned) covariate values.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub covariate_key: Vec<CovariateKey>,
    pub member_indices: Vec<usize>,
}

/// One component of a template key: an exact value or a bin index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CovariateKey {
    Exact(u64),
    Bin(i64),
}

/// Per-covariate bin widths keyed by column name; unlisted columns match exactly.
pub type BinWidths = BTreeMap<String, f64>;

/// Groups rows into templates by covariate values.
///
/// Templates are returned in order of their first member; members are in row order.
pub fn build_templates(data: &Dataset, binning: Option<&BinWidths>) -> Result<Vec<Template>> {
    let covariates = &data.schema.covariate_columns;
    if covariates.is_empty() {
        return Err(Error::Schema("templates need at least one covariate column".into()));
    }
    let widths: Vec<Option<f64>> = covariates
        .iter()
        .map(|name| binning.and_then(|b| b.get(name).copied()))
        .collect();
    if let Some(b) = binning {
        for (name, w) in b {
            if !covariates.contains(name) {
                return Err(Error::Schema(format!("bin width given for unknown covariate `{name}`")));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(argument(format!("bin width for `{name}` must be positive, got {w}")));
            }
        }
    }

    let mut index: HashMap<Vec<CovariateKey>, usize> = HashMap::new();
    let mut templates: Vec<Template> = Vec::new();
    for (i, row) in data.rows().enumerate() {
        let key: Vec<CovariateKey> = row[data.covariate_indices()]
            .iter()
            .zip(&widths)
            .map(|(&v, w)| match w {
                Some(w) => CovariateKey::Bin((v / w).floor() as i64),
                None => CovariateKey::Exact(canonical_bits(v)),
            })
            .collect();
        match index.get(&key) {
            Some(&t) => templates[t].member_indices.push(i),
            None => {
                index.insert(key.clone(), templates.len());
                templates.push(Template {
                    covariate_key: key,
                    member_indices: vec![i],
                });
            }
        }
    }
    Ok(templates)
}

/// Parameters of the synthetic interventional generator.
///
/// Rows come in blocks that share one covariate draw (a "query" run under
/// several treatment settings), so exact-match templates exist. Marginally
/// every covariate is uniform on `[0, 1)` and every treatment uniform on
/// `{0, .., 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_rows: usize,
    pub n_covariates: usize,
    pub n_treatments: usize,
    pub effect_weights: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
    /// Multiplier on the covariate response `g`; zero makes the target depend on treatments only.
    pub covariate_scale: f64,
    /// Rows generated per covariate draw.
    pub rows_per_query: usize,
}

impl SynthConfig {
    pub fn new(
        n_rows: usize,
        n_covariates: usize,
        n_treatments: usize,
        effect_weights: Vec<f64>,
        noise_sd: f64,
        seed: u64,
    ) -> Self {
        SynthConfig {
            n_rows,
            n_covariates,
            n_treatments,
            effect_weights,
            noise_sd,
            seed,
            covariate_scale: 1.0,
            rows_per_query: 8,
        }
    }

    pub fn covariate_scale(mut self, scale: f64) -> Self {
        self.covariate_scale = scale;
        self
    }

    pub fn rows_per_query(mut self, rows: usize) -> Self {
        self.rows_per_query = rows;
        self
    }

    pub fn schema(&self) -> SchemaConfig {
        SchemaConfig::new(
            (0..self.n_covariates).map(|k| format!("cov{k}")),
            (0..self.n_treatments).map(|j| format!("treat{j}")),
            "target",
        )
    }
}

/// Smooth covariate response shared by all synthetic datasets.
pub fn covariate_response(covariates: &[f64]) -> f64 {
    covariates
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let amplitude = 0.5 / (k + 1) as f64;
            amplitude * (std::f64::consts::PI * c).sin()
        })
        .sum()
}

/// Generates `target = Σ w_j·t_j + scale·g(covariates) + N(0, noise_sd²)`.
pub fn synthesize(config: &SynthConfig) -> Result<Dataset> {
    if config.n_rows == 0 || config.n_treatments + config.n_covariates == 0 {
        return Err(argument("synthetic datasets need rows and features"));
    }
    if config.effect_weights.len() != config.n_treatments {
        return Err(argument(format!(
            "{} effect weights for {} treatments",
            config.effect_weights.len(),
            config.n_treatments
        )));
    }
    if config.noise_sd.is_nan() || config.noise_sd < 0.0 || config.rows_per_query == 0 {
        return Err(argument("noise_sd must be non-negative and rows_per_query positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise_sd).map_err(|e| argument(e.to_string()))?;
    let n_features = config.n_covariates + config.n_treatments;

    let mut features = Vec::with_capacity(config.n_rows * n_features);
    let mut targets = Vec::with_capacity(config.n_rows);
    let mut covariates = vec![0.0; config.n_covariates];
    for i in 0..config.n_rows {
        if i % config.rows_per_query == 0 {
            covariates.iter_mut().for_each(|c| *c = rng.random::<f64>());
        }
        features.extend_from_slice(&covariates);
        let mut y = config.covariate_scale * covariate_response(&covariates);
        for w in &config.effect_weights {
            let t = f64::from(rng.random_range(0..3u32));
            features.push(t);
            y += w * t;
        }
        if config.noise_sd > 0.0 {
            y += noise.sample(&mut rng);
        }
        targets.push(y);
    }
    Dataset::from_flat(features, targets, config.schema())
}
