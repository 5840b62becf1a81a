//! Sequence-level evaluation: matching, CLEAR-MOT, HOTA, AP, and
//! trajectory displacement errors.
//!
//! Undefined values (empty denominators) are carried as NaN within a trial
//! and surface as nulls when reports are serialized.

mod ap;
mod clearmot;
mod displacement;
mod hota;
mod matching;

pub use ap::{average_precision, mean_average_precision, ScoredDetection, TruthBox};
pub use clearmot::{clear_mot, track_rates, ClearMot, TrackRates};
pub use displacement::displacement_errors;
pub use hota::{alpha_grid, hota, HotaBreakdown};
pub use matching::{match_frame, scope_filter, LabeledBox};

use crate::scene::OcclusionScore;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("predicted and actual trajectories share no timestamps")]
    EmptyOverlap,
    #[error("truth and prediction logs have different frame counts: {truth} vs {prediction}")]
    FrameCountMismatch { truth: usize, prediction: usize },
}

/// Restricts evaluation to truths an ego-mounted sensor could plausibly see.
#[derive(Debug, Clone, Copy)]
pub struct EvalScope {
    pub ego_position: Vector3<f64>,
    pub max_range_m: f64,
    pub max_occlusion: OcclusionScore,
}

impl EvalScope {
    pub fn standard(ego_position: Vector3<f64>) -> Self {
        EvalScope {
            ego_position,
            max_range_m: 100.0,
            max_occlusion: OcclusionScore::Partial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub truth_id: u64,
    pub prediction_id: u64,
    pub iou: f64,
    pub center_distance: f64,
}

/// Outcome of matching one frame.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FrameEval {
    pub matches: Vec<MatchedPair>,
    pub false_negatives: Vec<u64>,
    pub false_positives: Vec<u64>,
}

/// A metric aggregated across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// NaN <-> null sentinel so undefined metrics survive a JSON round trip.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Single-trial metric values. NaN marks quantities whose denominator was
/// empty for this trial; they serialize as null.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrialMetrics {
    #[serde(with = "nan_as_null")]
    pub precision: f64,
    #[serde(with = "nan_as_null")]
    pub recall: f64,
    #[serde(with = "nan_as_null")]
    pub false_positive_rate: f64,
    #[serde(with = "nan_as_null")]
    pub false_negative_rate: f64,
    #[serde(with = "nan_as_null")]
    pub map: f64,
    #[serde(with = "nan_as_null")]
    pub hota: f64,
    #[serde(with = "nan_as_null")]
    pub mota: f64,
    #[serde(with = "nan_as_null")]
    pub motp: f64,
    #[serde(with = "nan_as_null")]
    pub false_track_rate: f64,
    #[serde(with = "nan_as_null")]
    pub missed_track_rate: f64,
    #[serde(with = "nan_as_null")]
    pub ade: f64,
    #[serde(with = "nan_as_null")]
    pub fde: f64,
}

/// Trial-aggregated report. A metric undefined in every trial is None and
/// serializes as null.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct MetricsReport {
    pub precision: Option<MeanStd>,
    pub recall: Option<MeanStd>,
    pub false_positive_rate: Option<MeanStd>,
    pub false_negative_rate: Option<MeanStd>,
    pub map: Option<MeanStd>,
    pub hota: Option<MeanStd>,
    pub mota: Option<MeanStd>,
    pub motp: Option<MeanStd>,
    pub false_track_rate: Option<MeanStd>,
    pub missed_track_rate: Option<MeanStd>,
    pub ade: Option<MeanStd>,
    pub fde: Option<MeanStd>,
}

/// Mean and sample standard deviation over the defined (non-NaN) values.
/// Returns None when no value is defined.
pub fn aggregate(values: &[f64]) -> Option<MeanStd> {
    let defined: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if defined.is_empty() {
        return None;
    }
    let n = defined.len() as f64;
    let mean = defined.iter().sum::<f64>() / n;
    let std = if defined.len() < 2 {
        0.0
    } else {
        (defined.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(MeanStd { mean, std })
}

impl MetricsReport {
    pub fn from_trials(trials: &[TrialMetrics]) -> Self {
        let pick = |f: fn(&TrialMetrics) -> f64| {
            aggregate(&trials.iter().map(f).collect::<Vec<_>>())
        };
        MetricsReport {
            precision: pick(|t| t.precision),
            recall: pick(|t| t.recall),
            false_positive_rate: pick(|t| t.false_positive_rate),
            false_negative_rate: pick(|t| t.false_negative_rate),
            map: pick(|t| t.map),
            hota: pick(|t| t.hota),
            mota: pick(|t| t.mota),
            motp: pick(|t| t.motp),
            false_track_rate: pick(|t| t.false_track_rate),
            missed_track_rate: pick(|t| t.missed_track_rate),
            ade: pick(|t| t.ade),
            fde: pick(|t| t.fde),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_ignores_nan() {
        let agg = aggregate(&[1.0, f64::NAN, 3.0]).unwrap();
        assert!((agg.mean - 2.0).abs() < 1e-12);
        assert!((agg.std - 2.0f64.sqrt()).abs() < 1e-12);
        assert!(aggregate(&[f64::NAN, f64::NAN]).is_none());
        let single = aggregate(&[5.0]).unwrap();
        assert_eq!(single.std, 0.0);
    }

    #[test]
    fn trial_metrics_nan_round_trips_as_null() {
        let m = TrialMetrics {
            precision: 0.75,
            recall: f64::NAN,
            false_positive_rate: 0.25,
            false_negative_rate: f64::NAN,
            map: 1.0,
            hota: 0.5,
            mota: 0.5,
            motp: 0.1,
            false_track_rate: 0.0,
            missed_track_rate: 0.0,
            ade: f64::NAN,
            fde: f64::NAN,
        };
        let json = serde_json::to_value(m).unwrap();
        assert!(json["recall"].is_null());
        assert_eq!(json["precision"], 0.75);
        let back: TrialMetrics = serde_json::from_value(json).unwrap();
        assert!(back.recall.is_nan());
        assert_eq!(back.precision, 0.75);
    }

    #[test]
    fn report_serializes_undefined_as_null() {
        let report = MetricsReport {
            precision: Some(MeanStd { mean: 0.5, std: 0.1 }),
            ..Default::default()
        };
        let json = serde_json::to_value(&report).unwrap();
        assert!(json["motp"].is_null());
        assert!((json["precision"]["mean"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        let back: MetricsReport = serde_json::from_value(json).unwrap();
        assert!(back.motp.is_none());
        assert_eq!(back.precision.unwrap().mean, 0.5);
    }
}
