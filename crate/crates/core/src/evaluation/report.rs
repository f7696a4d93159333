//! Aligned text tables and JSON documents for evaluation reports.

use serde_json::{json, Value};

use super::{AccuracyReport, SimilarityReport, VarianceReport};

fn render(title: &str, rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = format!("{title}\n");
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn percent(rate: Option<f64>) -> String {
    rate.map_or_else(|| "--".to_string(), |r| format!("{:.0}%", r * 100.0))
}

pub fn similarity_table(report: &SimilarityReport) -> String {
    let title = format!(
        "Median rank-biased overlap of {} and {} (p = {})",
        report.methods.0.label(),
        report.methods.1.label(),
        report.p
    );
    let mut rows = vec![vec!["k".to_string(), "RBO".to_string()]];
    for (depth, m) in report.depths.iter().zip(&report.medians) {
        rows.push(vec![depth.to_string(), format!("{m:.2}")]);
    }
    render(&title, &rows)
}

pub fn similarity_json(report: &SimilarityReport) -> Value {
    json!({
        "metric": "rbo",
        "params": {"p": report.p, "methods": [report.methods.0, report.methods.1]},
        "rows": report.depths.iter().zip(&report.medians)
            .map(|(d, m)| json!({"k": d, "median": m, "points": report.per_point.first().map_or(0, Vec::len)}))
            .collect::<Vec<_>>(),
    })
}

pub fn variance_table(report: &VarianceReport) -> String {
    let mut header = vec!["k".to_string()];
    header.extend(report.methods.iter().map(|m| m.label().to_string()));
    let mut rows = vec![header];
    for (depth, medians) in report.depths.iter().zip(&report.medians) {
        let mut row = vec![depth.to_string()];
        row.extend(medians.iter().map(|v| format!("{v:.2e}")));
        rows.push(row);
    }
    render("Median variance of attribution magnitudes", &rows)
}

pub fn variance_json(report: &VarianceReport) -> Value {
    json!({
        "metric": "variance",
        "params": {"methods": report.methods},
        "rows": report.depths.iter().zip(&report.medians)
            .map(|(d, m)| json!({
                "k": d,
                "medians": report.methods.iter().zip(m).map(|(method, v)| json!({"method": method, "median": v})).collect::<Vec<_>>(),
            }))
            .collect::<Vec<_>>(),
    })
}

/// Side-by-side accuracy table: one column per (k, method), one row per treatment.
pub fn accuracy_table(title: &str, reports: &[AccuracyReport]) -> String {
    let Some(first) = reports.first() else {
        return format!("{title}\n(no reports)\n");
    };
    let ks = &first.params.ks;
    let mut header = vec!["Treatment".to_string()];
    let mut sub = vec![String::new()];
    for k in ks {
        for (i, r) in reports.iter().enumerate() {
            header.push(if i == 0 { format!("Top-{k}") } else { String::new() });
            sub.push(r.method().label().to_string());
        }
    }
    header.push("Samples".to_string());
    sub.push(String::new());
    let mut rows = vec![header, sub];

    let mut treatments: Vec<&str> = Vec::new();
    for c in &first.cells {
        if !treatments.contains(&c.treatment.as_str()) {
            treatments.push(&c.treatment);
        }
    }
    for t in &treatments {
        let mut row = vec![t.to_string()];
        for &k in ks {
            for r in reports {
                row.push(percent(r.cell(t, k).and_then(|c| c.rate)));
            }
        }
        row.push(first.cell(t, ks[0]).map_or(0, |c| c.samples).to_string());
        rows.push(row);
    }
    let mut avg = vec!["Average".to_string()];
    for &k in ks {
        for r in reports {
            avg.push(percent(r.average(k)));
        }
    }
    rows.push(avg);
    render(title, &rows)
}

pub fn accuracy_json(reports: &[AccuracyReport]) -> Value {
    Value::Array(
        reports
            .iter()
            .map(|r| serde_json::to_value(r).expect("report serializes"))
            .collect(),
    )
}
