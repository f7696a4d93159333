//! Interventional attribution accuracy.
//!
//! Both measures explain a prediction gap with the delta of two attributions
//! and count a hit when the treatment that actually changed is among the
//! first `k` ranked features.
//!
//! * Implicit: pairs of rows inside a template that differ in exactly one
//!   treatment.
//! * Explicit: every test row is paired with copies of itself where one
//!   treatment is moved by `±1` modulo the treatment cardinality.

use rayon::prelude::*;
use serde::Serialize;

use super::attribute_all;
use crate::attribution::{attribute, delta_attribution, Attribution, Method, TreeEnsemble};
use crate::dataset::{Dataset, Template};
use crate::error::{argument, validation, Result};

/// Hit counts of one treatment at one `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyCell {
    pub treatment: String,
    pub k: usize,
    pub hits: usize,
    pub samples: usize,
    /// `hits / samples`; `None` when no sample qualified.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageRate {
    pub k: usize,
    /// Mean of the non-empty per-treatment rates.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyParams {
    pub method: Method,
    pub ks: Vec<usize>,
}

/// Per-treatment Top-k hit rates of one method.
///
/// Serializes as `{metric, params, cells: [{treatment, k, hits, samples, rate}], averages}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub metric: String,
    pub params: AccuracyParams,
    pub cells: Vec<AccuracyCell>,
    pub averages: Vec<AverageRate>,
}

impl AccuracyReport {
    pub fn method(&self) -> Method {
        self.params.method
    }

    pub fn cell(&self, treatment: &str, k: usize) -> Option<&AccuracyCell> {
        self.cells.iter().find(|c| c.treatment == treatment && c.k == k)
    }

    pub fn average(&self, k: usize) -> Option<f64> {
        self.averages.iter().find(|a| a.k == k).and_then(|a| a.rate)
    }

    /// Cells without a single qualifying sample.
    pub fn empty_cells(&self) -> impl Iterator<Item = &AccuracyCell> {
        self.cells.iter().filter(|c| c.samples == 0)
    }

    pub fn total_samples(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        self.cells
            .iter()
            .filter(|c| seen.insert(&c.treatment))
            .map(|c| c.samples)
            .sum()
    }
}

/// Hits per (treatment, k) and samples per treatment.
#[derive(Debug, Clone)]
struct Tally {
    hits: Vec<Vec<usize>>,
    samples: Vec<usize>,
}

impl Tally {
    fn new(n_treatments: usize, n_ks: usize) -> Self {
        Tally {
            hits: vec![vec![0; n_ks]; n_treatments],
            samples: vec![0; n_treatments],
        }
    }

    fn record(&mut self, treatment: usize, deltas: &[f64], feature: usize, ks: &[usize]) {
        let ranked = crate::attribution::rank_features(deltas);
        self.samples[treatment] += 1;
        for (slot, &k) in ks.iter().enumerate() {
            if ranked.in_top(feature, k) {
                self.hits[treatment][slot] += 1;
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.hits.iter_mut().zip(other.hits) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.samples.iter_mut().zip(other.samples).for_each(|(x, y)| *x += y);
        self
    }

    fn into_report(self, metric: &str, method: Method, names: &[String], ks: &[usize]) -> AccuracyReport {
        let mut cells = Vec::new();
        for (t, name) in names.iter().enumerate() {
            for (slot, &k) in ks.iter().enumerate() {
                let (hits, samples) = (self.hits[t][slot], self.samples[t]);
                cells.push(AccuracyCell {
                    treatment: name.clone(),
                    k,
                    hits,
                    samples,
                    rate: (samples > 0).then(|| hits as f64 / samples as f64),
                });
            }
        }
        let averages = ks
            .iter()
            .map(|&k| {
                let rates: Vec<f64> = cells.iter().filter(|c| c.k == k).filter_map(|c| c.rate).collect();
                AverageRate {
                    k,
                    rate: (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64),
                }
            })
            .collect();
        AccuracyReport {
            metric: metric.to_string(),
            params: AccuracyParams {
                method,
                ks: ks.to_vec(),
            },
            cells,
            averages,
        }
    }
}

fn check_ks(ks: &[usize]) -> Result<()> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(argument("top-k list must be non-empty with every k >= 1"));
    }
    Ok(())
}

fn check_model(model: &impl TreeEnsemble, data: &Dataset) -> Result<()> {
    if model.n_features() != data.n_features() {
        return Err(validation(format!(
            "model has {} features, data has {}",
            model.n_features(),
            data.n_features()
        )));
    }
    Ok(())
}

/// A qualifying within-template pair, oriented so `anomaly` has the higher
/// target (the later row on ties). `treatment` is the position in the
/// schema's treatment list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterventionPair {
    pub anomaly: usize,
    pub baseline: usize,
    pub treatment: usize,
}

/// Whether rows `a` and `b` differ in exactly one treatment, and which.
pub fn single_treatment_difference(data: &Dataset, a: usize, b: usize) -> Option<usize> {
    let (ra, rb) = (data.row(a), data.row(b));
    let mut differing = data
        .treatment_indices()
        .into_iter()
        .enumerate()
        .filter(|&(_, j)| ra[j] != rb[j]);
    match (differing.next(), differing.next()) {
        (Some((t, _)), None) => Some(t),
        _ => None,
    }
}

/// Every unordered within-template pair differing in exactly one treatment.
pub fn qualifying_pairs(templates: &[Template], data: &Dataset) -> Vec<InterventionPair> {
    let targets = data.targets();
    templates
        .par_iter()
        .flat_map_iter(|template| {
            let members = &template.member_indices;
            let mut pairs = Vec::new();
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    if let Some(treatment) = single_treatment_difference(data, a, b) {
                        let b_is_anomaly = targets[b] > targets[a] || (targets[b] == targets[a] && b > a);
                        let (anomaly, baseline) = if b_is_anomaly { (b, a) } else { (a, b) };
                        pairs.push(InterventionPair {
                            anomaly,
                            baseline,
                            treatment,
                        });
                    }
                }
            }
            pairs
        })
        .collect()
}

/// Implicit interventional accuracy over within-template pairs.
pub fn implicit_accuracy(
    model: &impl TreeEnsemble,
    templates: &[Template],
    data: &Dataset,
    method: Method,
    ks: &[usize],
) -> Result<AccuracyReport> {
    check_ks(ks)?;
    check_model(model, data)?;
    let names = &data.schema().treatment_columns;
    let treatment_features = data.treatment_indices();
    let pairs = qualifying_pairs(templates, data);

    // attribute only the rows that appear in a pair
    let mut needed: Vec<usize> = pairs.iter().flat_map(|p| [p.anomaly, p.baseline]).collect();
    needed.sort_unstable();
    needed.dedup();
    let attributions: Vec<Attribution> = attribute_all(model, &data.select(&needed), method)?;
    let slot = |row: usize| needed.binary_search(&row).expect("row was attributed");

    let tally = pairs
        .par_iter()
        .fold(
            || Tally::new(names.len(), ks.len()),
            |mut tally, pair| {
                let anomaly = &attributions[slot(pair.anomaly)];
                let baseline = &attributions[slot(pair.baseline)];
                let delta = delta_attribution(anomaly, baseline).expect("same model and method");
                tally.record(pair.treatment, &delta.deltas, treatment_features[pair.treatment], ks);
                tally
            },
        )
        .reduce(|| Tally::new(names.len(), ks.len()), Tally::merge);
    Ok(tally.into_report("implicit", method, names, ks))
}

/// `(value + step) mod cardinality` on an integer-valued treatment.
pub fn intervene(value: f64, step: i64, cardinality: u32) -> f64 {
    ((value as i64 + step).rem_euclid(i64::from(cardinality))) as f64
}

/// Explicit interventional accuracy: both `±1` interventions on every
/// treatment of every test row, each counted as one sample.
pub fn explicit_accuracy(
    model: &impl TreeEnsemble,
    test: &Dataset,
    method: Method,
    ks: &[usize],
) -> Result<AccuracyReport> {
    check_ks(ks)?;
    check_model(model, test)?;
    let names = &test.schema().treatment_columns;
    let treatment_features = test.treatment_indices();
    let cardinality = test.schema().treatment_cardinality;
    for (i, row) in test.rows().enumerate() {
        for &j in &treatment_features {
            let v = row[j];
            if v.fract() != 0.0 || v < 0.0 || v >= f64::from(cardinality) {
                return Err(validation(format!(
                    "treatment value {v} in row {i} is outside 0..{cardinality}"
                )));
            }
        }
    }

    let tally = (0..test.n_rows())
        .into_par_iter()
        .map(|i| -> Result<Tally> {
            let x = test.row(i);
            let original = attribute(model, x, method)?;
            let mut tally = Tally::new(names.len(), ks.len());
            let mut shifted = x.to_vec();
            for (t, &feature) in treatment_features.iter().enumerate() {
                for step in [1, -1] {
                    shifted[feature] = intervene(x[feature], step, cardinality);
                    let intervened = attribute(model, &shifted, method)?;
                    let delta = delta_attribution(&intervened, &original)?;
                    tally.record(t, &delta.deltas, feature, ks);
                }
                shifted[feature] = x[feature];
            }
            Ok(tally)
        })
        .try_reduce(|| Tally::new(names.len(), ks.len()), |a, b| Ok(a.merge(b)))?;
    Ok(tally.into_report("explicit", method, names, ks))
}
