//! Trade-study configuration schema.
//!
//! A study file is JSON:
//! ```json
//! {
//!   "name": "c1",
//!   "scenario": { "seed": 0, "map_extent": 200.0, ... },
//!   "infrastructure": { "count": 40, "height_m": 15.0, ... },
//!   "trials": 10,
//!   "master_seed": 7,
//!   "iou_threshold": 0.3,
//!   "cases": [ { "id": "base", "collaboration": false, ... } ]
//! }
//! ```
//! Every case field has a default, so a case can be as small as
//! `{ "id": "base", "collaboration": false }`.

use super::HarnessError;
use crate::sim::{NoiseModel, ScenarioConfig};
use crate::tracking::TrackerParams;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

/// Qualitative noise names used by the study tables, mapped to sigma here so
/// rows can be written verbatim. Yaw sigma scales as sigma / 10 rad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseLevel {
    None,
    Low,
    Med,
    High,
}

impl NoiseLevel {
    pub fn sigma_m(self) -> f64 {
        match self {
            NoiseLevel::None => 0.0,
            NoiseLevel::Low => 0.1,
            NoiseLevel::Med => 0.3,
            NoiseLevel::High => 0.5,
        }
    }
}

/// Either a named level or an explicit sigma in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    Level(NoiseLevel),
    SigmaM(f64),
}

impl NoiseSpec {
    pub fn sigma_m(self) -> f64 {
        match self {
            NoiseSpec::Level(l) => l.sigma_m(),
            NoiseSpec::SigmaM(s) => s,
        }
    }

    pub fn to_model(self) -> NoiseModel {
        let s = self.sigma_m();
        NoiseModel::isotropic(s, s / 10.0)
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::Level(NoiseLevel::None)
    }
}

fn default_infra_count() -> usize {
    40
}
fn default_infra_height() -> f64 {
    15.0
}
fn default_infra_pitch() -> f64 {
    30f64.to_radians()
}
fn default_infra_azimuth() -> f64 {
    FRAC_PI_2
}
fn default_infra_range() -> f64 {
    70.0
}
fn default_rate() -> f64 {
    10.0
}

/// Static roadside sensor population shared by every case.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct InfrastructureConfig {
    pub count: usize,
    pub height_m: f64,
    pub pitch_rad: f64,
    /// Half of the horizontal field of view, radians.
    pub fov_azimuth_half_angle: f64,
    pub range_m: f64,
    pub rate_hz: f64,
    pub p_miss: f64,
    pub false_alarms_per_frame: f64,
}

impl Default for InfrastructureConfig {
    fn default() -> Self {
        InfrastructureConfig {
            count: default_infra_count(),
            height_m: default_infra_height(),
            pitch_rad: default_infra_pitch(),
            fov_azimuth_half_angle: default_infra_azimuth(),
            range_m: default_infra_range(),
            rate_hz: default_rate(),
            p_miss: 0.05,
            false_alarms_per_frame: 0.1,
        }
    }
}

/// Ego-mounted detector. Omnidirectional but range-limited.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EgoSensorConfig {
    pub range_m: f64,
    pub rate_hz: f64,
    pub noise: NoiseSpec,
    pub p_miss: f64,
    pub false_alarms_per_frame: f64,
}

impl Default for EgoSensorConfig {
    fn default() -> Self {
        EgoSensorConfig {
            range_m: 25.0,
            rate_hz: default_rate(),
            noise: NoiseSpec::Level(NoiseLevel::Low),
            p_miss: 0.05,
            false_alarms_per_frame: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictionParams {
    pub horizon_s: f64,
    pub step_s: f64,
    /// Predict every this many frames (prediction at every frame is wasteful
    /// for metric purposes).
    pub every_frames: usize,
}

impl Default for PredictionParams {
    fn default() -> Self {
        PredictionParams { horizon_s: 3.0, step_s: 0.5, every_frames: 10 }
    }
}

/// One row of the trade-study table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseConfig {
    pub id: String,
    pub collaboration: bool,
    #[serde(default)]
    pub tracker: TrackerParams,
    #[serde(default)]
    pub prediction: PredictionParams,
    #[serde(default)]
    pub ego_sensor: EgoSensorConfig,
    /// Noise applied to infrastructure detections (named level or sigma).
    #[serde(default)]
    pub infra_noise: NoiseSpec,
    /// Overrides the study-level infrastructure detection rate.
    #[serde(default)]
    pub infra_rate_hz: Option<f64>,
    #[serde(default = "default_comm_range")]
    pub comm_range_m: f64,
    /// Cross-sensor duplicate suppression radius fed to detection fusion.
    #[serde(default = "default_fusion_radius")]
    pub fusion_radius_m: f64,
}

fn default_comm_range() -> f64 {
    100.0
}

fn default_fusion_radius() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeStudyConfig {
    pub name: String,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub infrastructure: InfrastructureConfig,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_iou_threshold")]
    pub iou_threshold: f64,
    pub cases: Vec<CaseConfig>,
}

fn default_iou_threshold() -> f64 {
    0.3
}

impl TradeStudyConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |field: &str, why: String| {
            Err(HarnessError::Config(format!("{field}: {why}")))
        };
        if self.name.is_empty() {
            return bad("name", "must be non-empty".into());
        }
        if self.trials == 0 {
            return bad("trials", "must be >= 1".into());
        }
        self.scenario
            .validate()
            .map_err(|e| HarnessError::Config(format!("scenario: {e}")))?;
        if self.iou_threshold <= 0.0 || self.iou_threshold > 1.0 {
            return bad("iou_threshold", format!("{} not in (0, 1]", self.iou_threshold));
        }
        if self.infrastructure.range_m <= 0.0 {
            return bad("infrastructure.range_m", "must be positive".into());
        }
        let mut seen = HashSet::new();
        for case in &self.cases {
            if case.id.is_empty() {
                return bad("cases[].id", "must be non-empty".into());
            }
            if !seen.insert(case.id.as_str()) {
                return bad("cases[].id", format!("duplicate case id {:?}", case.id));
            }
            if case.comm_range_m <= 0.0 {
                return bad(
                    "cases[].comm_range_m",
                    format!("case {:?}: must be positive", case.id),
                );
            }
            if case.fusion_radius_m < 0.0 {
                return bad(
                    "cases[].fusion_radius_m",
                    format!("case {:?}: must be non-negative", case.id),
                );
            }
            if case.ego_sensor.noise.sigma_m() < 0.0 || case.infra_noise.sigma_m() < 0.0 {
                return bad("cases[].noise", format!("case {:?}: sigma < 0", case.id));
            }
            if case.prediction.horizon_s <= 0.0
                || case.prediction.step_s <= 0.0
                || case.prediction.every_frames == 0
            {
                return bad(
                    "cases[].prediction",
                    format!("case {:?}: horizon, step, and cadence must be positive", case.id),
                );
            }
            for (label, rate) in [
                ("ego_sensor.rate_hz", case.ego_sensor.rate_hz),
                ("infra_rate_hz", case.infra_rate_hz.unwrap_or(self.infrastructure.rate_hz)),
            ] {
                let ratio = self.scenario.frame_rate_hz / rate;
                if rate <= 0.0 || (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
                    return bad(
                        "cases[]",
                        format!(
                            "case {:?}: {label} = {rate} must evenly divide the scenario rate {}",
                            case.id, self.scenario.frame_rate_hz
                        ),
                    );
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let study: TradeStudyConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        study.validate()?;
        Ok(study)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> TradeStudyConfig {
        TradeStudyConfig {
            name: "t".into(),
            scenario: ScenarioConfig::default(),
            infrastructure: InfrastructureConfig::default(),
            trials: 1,
            master_seed: 0,
            iou_threshold: 0.3,
            cases: vec![CaseConfig {
                id: "a".into(),
                collaboration: true,
                tracker: TrackerParams::default(),
                prediction: PredictionParams::default(),
                ego_sensor: EgoSensorConfig::default(),
                infra_noise: NoiseSpec::default(),
                infra_rate_hz: None,
                comm_range_m: 100.0,
                fusion_radius_m: 2.0,
            }],
        }
    }

    #[test]
    fn minimal_study_valid() {
        minimal().validate().unwrap();
    }

    #[test]
    fn duplicate_case_ids_rejected() {
        let mut s = minimal();
        s.cases.push(s.cases[0].clone());
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn zero_trials_rejected() {
        let mut s = minimal();
        s.trials = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn non_divisible_rate_rejected() {
        let mut s = minimal();
        s.cases[0].infra_rate_hz = Some(3.0); // 10 / 3 not integral
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("evenly divide"), "{err}");
    }

    #[test]
    fn noise_names_parse() {
        let spec: NoiseSpec = serde_json::from_str("\"high\"").unwrap();
        assert_eq!(spec.sigma_m(), 0.5);
        let spec: NoiseSpec = serde_json::from_str("\"none\"").unwrap();
        assert_eq!(spec.sigma_m(), 0.0);
        let spec: NoiseSpec = serde_json::from_str("0.25").unwrap();
        assert_eq!(spec.sigma_m(), 0.25);
    }

    #[test]
    fn sparse_case_json_gets_defaults() {
        let json = r#"{
            "name": "t",
            "scenario": {
                "seed": 0, "map_extent": 200.0, "num_objects": 5,
                "speed_range": [2.0, 8.0],
                "motion_mix": {"constant_velocity": 0.5, "coordinated_turn": 0.3, "stationary": 0.2},
                "duration_frames": 10, "frame_rate_hz": 10.0, "ego_speed": 5.0
            },
            "trials": 2,
            "master_seed": 9,
            "cases": [{ "id": "base", "collaboration": false }]
        }"#;
        let study = TradeStudyConfig::from_json(json).unwrap();
        assert_eq!(study.cases[0].ego_sensor.range_m, 25.0);
        assert_eq!(study.cases[0].comm_range_m, 100.0);
        assert_eq!(study.infrastructure.count, 40);
        assert_eq!(study.iou_threshold, 0.3);
    }
}
