//! Agreement between two methods' rankings, and the spread of attribution magnitudes.

use rayon::prelude::*;
use serde::Serialize;

use super::rbo::{rbo, Depth, RboParams};
use super::{attribute_all, median};
use crate::attribution::{rank_features, Method, TreeEnsemble};
use crate::dataset::Dataset;
use crate::error::{argument, Result};

/// Median RBO between two methods at several depths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub methods: (Method, Method),
    pub p: f64,
    pub depths: Vec<Depth>,
    pub medians: Vec<f64>,
    /// `per_point[i][j]`: RBO of test point `j` at `depths[i]`.
    #[serde(skip)]
    pub per_point: Vec<Vec<f64>>,
}

/// Ranks both methods' attributions of every test point and reports the
/// median RBO at each depth.
pub fn similarity_report(
    model: &impl TreeEnsemble,
    test: &Dataset,
    methods: (Method, Method),
    p: f64,
    depths: &[Depth],
) -> Result<SimilarityReport> {
    if test.is_empty() {
        return Err(argument("similarity needs a non-empty test set"));
    }
    let a = attribute_all(model, test, methods.0)?;
    let b = attribute_all(model, test, methods.1)?;
    let ranked: Vec<_> = a.par_iter().zip(&b).map(|(x, y)| (x.ranked(), y.ranked())).collect();
    let per_point = depths
        .iter()
        .map(|&depth| {
            ranked
                .iter()
                .map(|(x, y)| rbo(x, y, RboParams { p, depth }))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityReport {
        methods,
        p,
        depths: depths.to_vec(),
        medians: per_point.iter().map(|v| median(v)).collect(),
        per_point,
    })
}

/// Population variance of the `k` largest magnitudes in `values`.
pub fn top_k_variance(values: &[f64], depth: Depth) -> Result<f64> {
    let k = depth.resolve(values.len())?;
    let ranked = rank_features(values);
    let top = &ranked.magnitudes()[..k];
    let mean = top.iter().sum::<f64>() / k as f64;
    Ok(top.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / k as f64)
}

/// Median over the test set of the top-`k` attribution-magnitude variance.
pub fn attribution_variance(model: &impl TreeEnsemble, test: &Dataset, method: Method, depth: Depth) -> Result<f64> {
    if test.is_empty() {
        return Err(argument("variance needs a non-empty test set"));
    }
    let attributions = attribute_all(model, test, method)?;
    variance_of(&attributions, depth)
}

fn variance_of(attributions: &[crate::attribution::Attribution], depth: Depth) -> Result<f64> {
    let per_point = attributions
        .iter()
        .map(|a| top_k_variance(&a.contributions, depth))
        .collect::<Result<Vec<_>>>()?;
    Ok(median(&per_point))
}

/// Median attribution variance for several methods and depths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub methods: Vec<Method>,
    pub depths: Vec<Depth>,
    /// `medians[i][j]`: depth `i`, method `j`.
    pub medians: Vec<Vec<f64>>,
}

pub fn variance_report(
    model: &impl TreeEnsemble,
    test: &Dataset,
    methods: &[Method],
    depths: &[Depth],
) -> Result<VarianceReport> {
    if test.is_empty() {
        return Err(argument("variance needs a non-empty test set"));
    }
    let attributions = methods
        .iter()
        .map(|&m| attribute_all(model, test, m))
        .collect::<Result<Vec<_>>>()?;
    let medians = depths
        .iter()
        .map(|&d| {
            attributions
                .iter()
                .map(|a| variance_of(a, d))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceReport {
        methods: methods.to_vec(),
        depths: depths.to_vec(),
        medians,
    })
}
