//! Study report rendering: markdown, csv, or full-precision json.

use crate::metrics::{MeanStd, MetricsReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: String,
    pub metrics: MetricsReport,
    pub sensors_in_range: Option<MeanStd>,
    pub detections_per_frame: Option<MeanStd>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub name: String,
    pub trials: usize,
    pub cases: Vec<CaseReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Md,
    Csv,
    Json,
}

const COLUMNS: [&str; 14] = [
    "precision",
    "recall",
    "fpr",
    "fnr",
    "map",
    "hota",
    "mota",
    "motp",
    "ftr",
    "mtr",
    "ade",
    "fde",
    "sensors_in_range",
    "dets_per_frame",
];

fn column_values(case: &CaseReport) -> [Option<MeanStd>; 14] {
    let m = &case.metrics;
    [
        m.precision,
        m.recall,
        m.false_positive_rate,
        m.false_negative_rate,
        m.map,
        m.hota,
        m.mota,
        m.motp,
        m.false_track_rate,
        m.missed_track_rate,
        m.ade,
        m.fde,
        case.sensors_in_range,
        case.detections_per_frame,
    ]
}

fn cell(v: Option<MeanStd>) -> String {
    match v {
        Some(ms) => format!("{:.2} +/- {:.2}", ms.mean, ms.std),
        None => "N/A".to_string(),
    }
}

/// Text formats round to 2 decimals and use "N/A" for undefined metrics;
/// json keeps full precision (undefined metrics are null).
pub fn render_report(report: &StudyReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::from("case,");
            out.push_str(&COLUMNS.join(","));
            out.push('\n');
            for case in &report.cases {
                out.push_str(&case.id);
                for v in column_values(case) {
                    out.push(',');
                    out.push_str(&cell(v));
                }
                out.push('\n');
            }
            out
        }
        ReportFormat::Md => {
            let mut out = format!("# {} ({} trials)\n\n", report.name, report.trials);
            out.push_str("| case |");
            for c in COLUMNS {
                out.push_str(&format!(" {c} |"));
            }
            out.push_str("\n|------|");
            for _ in COLUMNS {
                out.push_str("------|");
            }
            out.push('\n');
            for case in &report.cases {
                out.push_str(&format!("| {} |", case.id));
                for v in column_values(case) {
                    out.push_str(&format!(" {} |", cell(v)));
                }
                out.push('\n');
            }
            out
        }
    }
}
