//! Per-prediction feature attributions.
//!
//! Two methods are provided:
//!
//! * [`ti_attribute`] splits a prediction along its decision path: each
//!   traversed split credits its feature with the change in node value.
//! * [`shap_attribute`] computes Shapley values of the path-dependent value
//!   function ([`conditional_expectation`]) in polynomial time.
//!
//! [`shapley_oracle`] evaluates the same Shapley values by enumerating every
//! coalition and exists to check [`shap_attribute`].
//!
//! Both methods satisfy `bias + Σ contributions = prediction`. Forest
//! attributions are the unweighted mean of the per-tree attributions.

mod oracle;
mod output;
mod shap;
mod ti;

pub use oracle::{conditional_expectation, shapley_oracle, shapley_oracle_with_limit, DEFAULT_ORACLE_LIMIT};
pub use output::{write_attributions_csv, write_attributions_json, write_deltas_csv, AttributionRecord};
pub use shap::shap_attribute;
pub use ti::ti_attribute;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::forest::{Forest, RegressionTree};

/// Anything made of regression trees whose output is the mean tree output.
pub trait TreeEnsemble: Sync {
    fn members(&self) -> &[RegressionTree];
    fn n_features(&self) -> usize;
}

impl TreeEnsemble for RegressionTree {
    fn members(&self) -> &[RegressionTree] {
        std::slice::from_ref(self)
    }

    fn n_features(&self) -> usize {
        RegressionTree::n_features(self)
    }
}

impl TreeEnsemble for Forest {
    fn members(&self) -> &[RegressionTree] {
        self.trees()
    }

    fn n_features(&self) -> usize {
        Forest::n_features(self)
    }
}

fn check_input(model: &impl TreeEnsemble, x: &[f64]) -> Result<()> {
    if x.len() != model.n_features() {
        return Err(argument(format!(
            "input has {} features, model expects {}",
            x.len(),
            model.n_features()
        )));
    }
    if let Some(j) = x.iter().position(|v| !v.is_finite()) {
        return Err(argument(format!("input feature {j} is not finite")));
    }
    Ok(())
}

/// Attribution method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Decision-path decomposition.
    Ti,
    /// Path-dependent Tree SHAP.
    Shap,
    /// Exhaustive Shapley enumeration.
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ti => "ti",
            Method::Shap => "shap",
            Method::Oracle => "oracle",
        }
    }

    /// Column header used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::Ti => "TI",
            Method::Shap => "SHAP-TE",
            Method::Oracle => "Oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ti" => Ok(Method::Ti),
            "shap" => Ok(Method::Shap),
            "oracle" => Ok(Method::Oracle),
            other => Err(argument(format!("unknown attribution method `{other}`"))),
        }
    }
}

/// Attributes one prediction with the chosen method.
pub fn attribute(model: &impl TreeEnsemble, x: &[f64], method: Method) -> Result<Attribution> {
    match method {
        Method::Ti => ti_attribute(model, x),
        Method::Shap => shap_attribute(model, x),
        Method::Oracle => shapley_oracle(model, x),
    }
}

/// A bias term plus one signed contribution per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub bias: f64,
    pub contributions: Vec<f64>,
    pub method: Method,
}

impl Attribution {
    /// `bias + Σ contributions`, which equals the model prediction.
    pub fn total(&self) -> f64 {
        self.bias + self.contributions.iter().sum::<f64>()
    }

    pub fn ranked(&self) -> RankedList {
        rank_features(&self.contributions)
    }
}

/// Contribution differences between an anomalous and a baseline prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaAttribution {
    pub deltas: Vec<f64>,
    pub method: Method,
}

impl DeltaAttribution {
    pub fn ranked(&self) -> RankedList {
        rank_features(&self.deltas)
    }
}

/// `anomaly.contributions - baseline.contributions`, elementwise.
pub fn delta_attribution(anomaly: &Attribution, baseline: &Attribution) -> Result<DeltaAttribution> {
    if anomaly.method != baseline.method {
        return Err(argument(format!(
            "cannot subtract a {} attribution from a {} attribution",
            baseline.method, anomaly.method
        )));
    }
    if anomaly.contributions.len() != baseline.contributions.len() {
        return Err(argument(format!(
            "attributions have {} and {} features",
            anomaly.contributions.len(),
            baseline.contributions.len()
        )));
    }
    Ok(DeltaAttribution {
        deltas: anomaly
            .contributions
            .iter()
            .zip(&baseline.contributions)
            .map(|(a, b)| a - b)
            .collect(),
        method: anomaly.method,
    })
}

/// Feature indices ordered by descending magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    order: Vec<usize>,
    magnitudes: Vec<f64>,
}

impl RankedList {
    /// Builds a ranking from an explicit order. `order` must be a permutation of `0..n`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &f in &order {
            if f >= order.len() || std::mem::replace(&mut seen[f], true) {
                return Err(argument("ranking must contain each feature exactly once"));
            }
        }
        let n = order.len();
        Ok(RankedList {
            order,
            magnitudes: (0..n).rev().map(|v| v as f64).collect(),
        })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn top(&self, k: usize) -> &[usize] {
        &self.order[..k.min(self.order.len())]
    }

    /// Whether `feature` is among the first `k` entries.
    pub fn in_top(&self, feature: usize, k: usize) -> bool {
        self.top(k).contains(&feature)
    }
}

/// Sorts features by descending `|value|`; equal magnitudes keep ascending index order.
pub fn rank_features(values: &[f64]) -> RankedList {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps index order among ties
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    let magnitudes = order.iter().map(|&i| values[i].abs()).collect();
    RankedList { order, magnitudes }
}
