//! Wall-clock cost of attribution, per instance and as trees get deeper.
//!
//! Timed sections run on the calling thread only. Each measurement makes one
//! untimed warm-up pass and keeps the fastest of `repetitions` timed passes.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::attribution::{attribute, Attribution, Method};
use crate::dataset::Dataset;
use crate::error::{argument, Result};
use crate::forest::{fit_forest, Forest, ForestParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRecord {
    pub method: Method,
    pub max_depth: usize,
    pub n_instances: usize,
    pub seconds_per_instance: f64,
    pub total_seconds: f64,
}

impl TimingRecord {
    pub fn new(method: Method, max_depth: usize, n_instances: usize, total_seconds: f64) -> Self {
        TimingRecord {
            method,
            max_depth,
            n_instances,
            seconds_per_instance: total_seconds / n_instances as f64,
            total_seconds,
        }
    }
}

/// Fastest of the measured durations.
pub fn best_of(durations: &[f64]) -> f64 {
    durations.iter().copied().fold(f64::INFINITY, f64::min)
}

fn attribute_rows(model: &Forest, instances: &Dataset, method: Method) -> Result<Vec<Attribution>> {
    instances.rows().map(|x| attribute(model, x, method)).collect()
}

/// Times `method` over every instance and also returns the attributions it produced.
pub fn time_attribution_collect(
    model: &Forest,
    instances: &Dataset,
    method: Method,
    repetitions: usize,
) -> Result<(TimingRecord, Vec<Attribution>)> {
    if instances.is_empty() || repetitions == 0 {
        return Err(argument("timing needs at least one instance and one repetition"));
    }
    let outputs = attribute_rows(model, instances, method)?;
    let mut durations = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        let run = attribute_rows(model, instances, method)?;
        durations.push(start.elapsed().as_secs_f64());
        std::hint::black_box(run);
    }
    let record = TimingRecord::new(
        method,
        model.params().max_depth,
        instances.n_rows(),
        best_of(&durations),
    );
    Ok((record, outputs))
}

pub fn time_attribution(
    model: &Forest,
    instances: &Dataset,
    method: Method,
    repetitions: usize,
) -> Result<TimingRecord> {
    time_attribution_collect(model, instances, method, repetitions).map(|(record, _)| record)
}

/// Trains one forest per depth with otherwise fixed parameters and times
/// every method on the same probe set. Records are ordered by depth, then method.
pub fn depth_scaling(
    train: &Dataset,
    probe: &Dataset,
    depths: &[usize],
    base: &ForestParams,
    methods: &[Method],
    repetitions: usize,
) -> Result<Vec<TimingRecord>> {
    if depths.is_empty() || depths[0] == 0 || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(argument(format!(
            "depths must be ascending and at least 1, got {depths:?}"
        )));
    }
    let mut records = Vec::with_capacity(depths.len() * methods.len());
    for &max_depth in depths {
        let params = ForestParams {
            max_depth,
            ..base.clone()
        };
        let forest = fit_forest(train, &params)?;
        for &method in methods {
            records.push(time_attribution(&forest, probe, method, repetitions)?);
        }
    }
    Ok(records)
}

/// CSV with columns `method,max_depth,n_instances,sec_per_instance,total_sec`.
pub fn write_timing_csv<W: Write>(writer: W, records: &[TimingRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["method", "max_depth", "n_instances", "sec_per_instance", "total_sec"])?;
    for r in records {
        wtr.write_record([
            r.method.to_string(),
            r.max_depth.to_string(),
            r.n_instances.to_string(),
            r.seconds_per_instance.to_string(),
            r.total_seconds.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Two-column `max_depth sec_per_instance` series for one method, gnuplot style.
pub fn write_series<W: Write>(mut writer: W, records: &[TimingRecord], method: Method) -> Result<()> {
    writeln!(writer, "# {} max_depth sec_per_instance", method.label())?;
    for r in records.iter().filter(|r| r.method == method) {
        writeln!(writer, "{} {}", r.max_depth, r.seconds_per_instance)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, SynthConfig};

    #[test]
    fn per_instance_is_total_over_count() {
        let r = TimingRecord::new(Method::Ti, 5, 10, 1.0);
        assert_eq!(r.seconds_per_instance, 0.1);
    }

    #[test]
    fn best_of_never_grows_with_more_runs() {
        let runs = [0.5, 0.7, 0.3, 0.4, 0.9];
        let bests: Vec<f64> = (1..=runs.len()).map(|n| best_of(&runs[..n])).collect();
        assert!(bests.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(bests.last(), Some(&0.3));
    }

    #[test]
    fn depth_scaling_shape_and_errors() {
        let data = synthesize(&SynthConfig::new(200, 2, 2, vec![1.0, 0.5], 0.1, 1)).unwrap();
        let probe = data.select(&[0, 1, 2]);
        let base = ForestParams {
            n_estimators: 3,
            ..ForestParams::default()
        };
        let methods = [Method::Ti, Method::Shap];
        let records = depth_scaling(&data, &probe, &[1, 2, 4], &base, &methods, 1).unwrap();
        assert_eq!(records.len(), 6);
        assert_eq!(records[5].max_depth, 4);
        assert_eq!(records[5].method, Method::Shap);
        assert!(records.iter().all(|r| r.total_seconds > 0.0 && r.n_instances == 3));
        assert!(depth_scaling(&data, &probe, &[4, 2], &base, &methods, 1).is_err());
        assert!(depth_scaling(&data, &probe, &[0, 2], &base, &methods, 1).is_err());

        let mut csv = Vec::new();
        write_timing_csv(&mut csv, &records).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("method,max_depth,n_instances,sec_per_instance,total_sec\n"));
    }
}
