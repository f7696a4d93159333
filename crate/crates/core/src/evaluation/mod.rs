//! Evaluation of attribution methods: ranking agreement (RBO), the spread of
//! attribution magnitudes, and implicit/explicit interventional accuracy.

mod accuracy;
mod rbo;
pub mod report;
mod similarity;

pub use accuracy::{
    explicit_accuracy, implicit_accuracy, intervene, qualifying_pairs, single_treatment_difference, AccuracyCell,
    AccuracyParams, AccuracyReport, AverageRate, InterventionPair,
};
pub use rbo::{rbo, Depth, RboParams};
pub use similarity::{
    attribution_variance, similarity_report, top_k_variance, variance_report, SimilarityReport, VarianceReport,
};

use rayon::prelude::*;

use crate::attribution::{attribute, Attribution, Method, TreeEnsemble};
use crate::dataset::Dataset;
use crate::error::Result;

/// Attributions of every row, computed in parallel and returned in row order.
pub fn attribute_all(model: &impl TreeEnsemble, data: &Dataset, method: Method) -> Result<Vec<Attribution>> {
    (0..data.n_rows())
        .into_par_iter()
        .map(|i| attribute(model, data.row(i), method))
        .collect()
}

/// Lower-middle median; NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[(sorted.len() - 1) / 2]
}
