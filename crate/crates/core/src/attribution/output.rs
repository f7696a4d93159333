//! Batch attribution files.
//!
//! CSV columns are `row_id,method,bias,contrib_<feature>...`; numbers use the
//! shortest decimal that parses back to the same `f64`.

use std::io::Write;

use serde::Serialize;

use super::{Attribution, DeltaAttribution, Method};
use crate::error::{argument, Result};

/// One attributed row, as written to the JSON array form.
#[derive(Debug, Clone, Serialize)]
pub struct AttributionRecord<'a> {
    pub row_id: usize,
    pub method: Method,
    pub bias: f64,
    pub contributions: &'a [f64],
}

pub fn write_attributions_csv<W: Write>(
    writer: W,
    feature_names: &[String],
    rows: &[(usize, Attribution)],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["row_id".to_string(), "method".to_string(), "bias".to_string()];
    header.extend(feature_names.iter().map(|f| format!("contrib_{f}")));
    wtr.write_record(&header)?;
    for (row_id, a) in rows {
        check_width(feature_names, a.contributions.len())?;
        let mut record = vec![row_id.to_string(), a.method.to_string(), a.bias.to_string()];
        record.extend(a.contributions.iter().map(f64::to_string));
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_attributions_json<W: Write>(writer: W, rows: &[(usize, Attribution)]) -> Result<()> {
    let records: Vec<AttributionRecord<'_>> = rows
        .iter()
        .map(|(row_id, a)| AttributionRecord {
            row_id: *row_id,
            method: a.method,
            bias: a.bias,
            contributions: &a.contributions,
        })
        .collect();
    serde_json::to_writer_pretty(writer, &records)?;
    Ok(())
}

/// Columns `anomaly_row,baseline_row,method,delta_<feature>...`.
pub fn write_deltas_csv<W: Write>(
    writer: W,
    feature_names: &[String],
    rows: &[(usize, usize, DeltaAttribution)],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![
        "anomaly_row".to_string(),
        "baseline_row".to_string(),
        "method".to_string(),
    ];
    header.extend(feature_names.iter().map(|f| format!("delta_{f}")));
    wtr.write_record(&header)?;
    for (anomaly, baseline, d) in rows {
        check_width(feature_names, d.deltas.len())?;
        let mut record = vec![anomaly.to_string(), baseline.to_string(), d.method.to_string()];
        record.extend(d.deltas.iter().map(f64::to_string));
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

fn check_width(feature_names: &[String], width: usize) -> Result<()> {
    if width != feature_names.len() {
        return Err(argument(format!(
            "attribution has {width} contributions for {} feature names",
            feature_names.len()
        )));
    }
    Ok(())
}
