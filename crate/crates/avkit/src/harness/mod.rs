//! Configuration-table-driven trade-study runner and report generator.

mod config;
mod report;
mod run;

pub use config::{
    CaseConfig, EgoSensorConfig, InfrastructureConfig, NoiseLevel, NoiseSpec, PredictionParams,
    TradeStudyConfig,
};
pub use report::{render_report, CaseReport, ReportFormat, StudyReport};
pub use run::{
    aggregate_case, run_study, run_trial, DetectionLogRecord, TrackLogRecord, TrialOutput,
    TrialStats, TruthLogRecord,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("case {case:?} trial {trial} frame {frame}: {message}")]
    Trial {
        case: String,
        trial: usize,
        frame: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
