//! Deterministic text renderings of an evaluation report.

use std::fmt::Write;

use super::{EvalReport, MetricKrcc};
use crate::error::Result;

const SUMMARY_ROWS: [&str; 4] = ["average", "min", "max", "std"];

fn summary_values(report: &EvalReport, row: usize) -> Vec<f64> {
    report
        .summaries
        .iter()
        .map(|s| [s.average, s.min, s.max, s.std][row])
        .collect()
}

/// Long-format CSV with columns `set_id,metric,krcc`, followed by summary rows.
pub fn to_csv(report: &EvalReport) -> String {
    let mut out = String::from("set_id,metric,krcc\n");
    for set in &report.sets {
        for (name, v) in MetricKrcc::NAMES.iter().zip(set.krcc.values()) {
            let _ = writeln!(out, "{},{name},{v:.6}", set.set_id);
        }
    }
    for (row, label) in SUMMARY_ROWS.iter().enumerate() {
        for (name, v) in MetricKrcc::NAMES.iter().zip(summary_values(report, row)) {
            let _ = writeln!(out, "{label},{name},{v:.6}");
        }
    }
    out
}

/// Markdown table with one row per set plus summary rows. The TMQI-2 column
/// is not computed here and is marked `external`.
pub fn to_markdown(report: &EvalReport) -> String {
    let mut out = String::from("| Image Set | TMQI-3 | TMQI-2 | TMQI-1 | F | N | L |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    let row = |out: &mut String, label: &str, v: [f64; 5]| {
        let _ = writeln!(
            out,
            "| {label} | {:.4} | external | {:.4} | {:.4} | {:.4} | {:.4} |",
            v[0], v[1], v[2], v[3], v[4]
        );
    };
    for set in &report.sets {
        row(&mut out, &set.set_id.to_string(), set.krcc.values());
    }
    for (i, label) in ["Average", "Min", "Max", "Std"].iter().enumerate() {
        let v = summary_values(report, i);
        row(&mut out, label, [v[0], v[1], v[2], v[3], v[4]]);
    }
    for s in &report.skipped {
        let _ = writeln!(out, "\nSkipped set {}: {}", s.set_id, s.reason);
    }
    out
}

/// Pretty-printed JSON with every per-image breakdown.
pub fn per_image_json(report: &EvalReport) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map_err(|e| crate::Error::InvalidParams(format!("cannot serialize report: {e}")))
}
