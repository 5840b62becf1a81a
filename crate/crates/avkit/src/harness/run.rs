//! Trial and study execution.

use super::config::{CaseConfig, TradeStudyConfig};
use super::report::{CaseReport, StudyReport};
use super::HarnessError;
use crate::geometry::{FrameForest, WORLD};
use crate::metrics::{
    clear_mot, displacement_errors, hota, match_frame, mean_average_precision, scope_filter,
    track_rates, EvalScope, FrameEval, LabeledBox, MetricsError, MetricsReport, ScoredDetection,
    TrialMetrics, TruthBox,
};
use crate::prediction::kinematic_predict;
use crate::scene::{BoundingBox3D, Detection, Dimensions, FovSpec, ObjectType};
use crate::sim::{
    derive_seed, generate_scenario, place_infrastructure, sense, sensors_in_range, CommModel,
    SensorModel,
};
use crate::tracking::{preprocess_remote, Tracker, TrackStatus};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Radius around the ego within which remote detections are kept.
const PREPROCESS_RADIUS_M: f64 = 100.0;

/// Ids below this are reserved for ego-mounted sensors so infrastructure RNG
/// streams can never collide with scenario or placement streams.
const INFRA_ID_BASE: u32 = 100;

#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
pub struct TrialStats {
    /// Mean count of infrastructure sensors within comm range, per frame.
    pub sensors_in_range_per_frame: f64,
    /// Mean count of detections fed to the tracker, per tracker step.
    pub detections_per_frame: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruthLogRecord {
    pub frame: usize,
    pub timestamp: f64,
    pub objects: Vec<crate::scene::ObjectState>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionLogRecord {
    pub frame: usize,
    pub timestamp: f64,
    pub sensors_in_range: Vec<u32>,
    /// World-frame detections after remote preprocessing.
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackStateRecord {
    pub id: u64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub yaw: f64,
    pub dimensions: [f64; 3],
    pub hits: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackLogRecord {
    pub frame: usize,
    pub timestamp: f64,
    pub tracks: Vec<TrackStateRecord>,
}

/// Everything produced by one (case, trial) unit.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub metrics: TrialMetrics,
    pub stats: TrialStats,
    pub truth_log: Vec<TruthLogRecord>,
    pub detection_log: Vec<DetectionLogRecord>,
    pub track_log: Vec<TrackLogRecord>,
}

/// Cross-sensor fusion: several sensors reporting the same object would
/// otherwise spawn shadow tracks. Keeps the highest-confidence detection and
/// suppresses others within `radius_m` of it (ties broken by input order).
pub fn fuse_detections(detections: Vec<Detection>, radius_m: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .confidence
            .total_cmp(&detections[a].confidence)
            .then(a.cmp(&b))
    });
    let mut kept: Vec<Detection> = Vec::with_capacity(detections.len());
    for i in order {
        let c = detections[i].bbox.center;
        if kept.iter().all(|k| (k.bbox.center - c).norm() > radius_m) {
            kept.push(detections[i].clone());
        }
    }
    // Deterministic downstream order regardless of confidence draws.
    kept.sort_by(|a, b| {
        (a.bbox.center.x, a.bbox.center.y)
            .partial_cmp(&(b.bbox.center.x, b.bbox.center.y))
            .expect("finite centers")
    });
    kept
}

fn trial_err(case: &str, trial: usize, frame: usize, message: impl ToString) -> HarnessError {
    HarnessError::Trial {
        case: case.to_string(),
        trial,
        frame,
        message: message.to_string(),
    }
}

/// Runs one case on one trial seed: scenario, sensing, tracking, prediction,
/// logging, metrics. Pure function of (study, case, trial index).
pub fn run_trial(
    study: &TradeStudyConfig,
    case: &CaseConfig,
    trial: usize,
) -> Result<TrialOutput, HarnessError> {
    let seed = derive_seed(study.master_seed, trial as u64);
    let mut scenario_cfg = study.scenario.clone();
    scenario_cfg.seed = seed;
    let err = |frame: usize, m: &dyn std::fmt::Display| trial_err(&case.id, trial, frame, m);

    let truth = generate_scenario(&scenario_cfg).map_err(|e| err(0, &e))?;
    let sites = place_infrastructure(
        study.infrastructure.count,
        scenario_cfg.map_extent,
        study.infrastructure.height_m,
        study.infrastructure.pitch_rad,
        seed,
    );
    let site_positions: Vec<(u32, nalgebra::Vector3<f64>)> = sites
        .iter()
        .enumerate()
        .map(|(i, s)| (INFRA_ID_BASE + i as u32, s.position))
        .collect();
    let comm = CommModel { range_m: case.comm_range_m, latency_frames: 0 };
    let infra_rate = case.infra_rate_hz.unwrap_or(study.infrastructure.rate_hz);

    let ego_template = SensorModel {
        id: 0,
        mount: WORLD, // rebound per frame
        fov: FovSpec {
            azimuth_half_angle: PI,
            elevation_half_angle: FRAC_PI_2,
            max_range: case.ego_sensor.range_m,
        },
        rate_hz: case.ego_sensor.rate_hz,
        noise: case.ego_sensor.noise.to_model(),
        p_miss: case.ego_sensor.p_miss,
        false_alarms_per_frame: case.ego_sensor.false_alarms_per_frame,
        lidar_lines: Some(64),
    };
    let ego_stride = ego_template
        .frame_stride(scenario_cfg.frame_rate_hz)
        .map_err(|e| err(0, &e))?;
    let infra_fov = FovSpec {
        azimuth_half_angle: study.infrastructure.fov_azimuth_half_angle,
        elevation_half_angle: FRAC_PI_2,
        max_range: study.infrastructure.range_m,
    };
    let infra_stride = (scenario_cfg.frame_rate_hz / infra_rate).round() as usize;

    let mut tracker = Tracker::new(case.tracker.clone());
    let mut truth_log = Vec::new();
    let mut detection_log = Vec::new();
    let mut track_log = Vec::new();
    // Per evaluated frame: scoped truths, confirmed-track boxes, match result.
    let mut scoped_truth_frames: Vec<Vec<LabeledBox>> = Vec::new();
    let mut track_frames: Vec<Vec<LabeledBox>> = Vec::new();
    let mut frame_evals: Vec<FrameEval> = Vec::new();
    let mut ap_dets: Vec<ScoredDetection> = Vec::new();
    let mut ap_truths: Vec<TruthBox> = Vec::new();
    let mut sensors_in_range_sum = 0usize;
    let mut detections_sum = 0usize;
    let mut ades = Vec::new();
    let mut fdes = Vec::new();

    for frame in 0..scenario_cfg.duration_frames {
        if frame % ego_stride != 0 {
            continue;
        }
        let timestamp = truth.timestamp(frame);
        let ego_pose = truth.ego[frame];
        let objects = &truth.frames[frame];

        // Per-frame forest: world -> ego, world -> each infrastructure site.
        let mut forest = FrameForest::new();
        let ego_frame = forest
            .add_simple(WORLD, ego_pose.position, ego_pose.rotation)
            .map_err(|e| err(frame, &e))?;
        let mut ego_sensor = ego_template.clone();
        ego_sensor.mount = ego_frame;

        let mut detections =
            sense(&ego_sensor, objects, &forest, seed, frame, timestamp).map_err(|e| err(frame, &e))?;
        let in_range = if case.collaboration {
            sensors_in_range(&ego_pose.position, &site_positions, &comm)
        } else {
            Vec::new()
        };
        sensors_in_range_sum += in_range.len();
        if case.collaboration && frame % infra_stride == 0 {
            let mut remote_raw = Vec::new();
            for &sensor_id in &in_range {
                let site = &sites[(sensor_id - INFRA_ID_BASE) as usize];
                let mount = forest
                    .add_simple(WORLD, site.position, site.rotation)
                    .map_err(|e| err(frame, &e))?;
                let sensor = SensorModel {
                    id: sensor_id,
                    mount,
                    fov: infra_fov,
                    rate_hz: infra_rate,
                    noise: case.infra_noise.to_model(),
                    p_miss: study.infrastructure.p_miss,
                    false_alarms_per_frame: study.infrastructure.false_alarms_per_frame,
                    lidar_lines: Some(64),
                };
                remote_raw
                    .extend(sense(&sensor, objects, &forest, seed, frame, timestamp).map_err(|e| err(frame, &e))?);
            }
            detections.extend(
                preprocess_remote(&remote_raw, &forest, ego_frame, PREPROCESS_RADIUS_M)
                    .map_err(|e| err(frame, &e))?,
            );
        }
        // The tracker works in the world frame.
        let detections: Vec<Detection> = fuse_detections(detections, case.fusion_radius_m)
            .into_iter()
            .map(|d| {
                let to_world = forest.transform_between(d.bbox.frame, WORLD)?;
                Ok(Detection { bbox: d.bbox.transformed(&to_world), ..d })
            })
            .collect::<Result<_, crate::geometry::GeometryError>>()
            .map_err(|e| err(frame, &e))?;
        detections_sum += detections.len();

        let confirmed = tracker.step(&detections, timestamp).map_err(|e| err(frame, &e))?;

        // Evaluation bookkeeping.
        let eval_index = scoped_truth_frames.len();
        let scope = EvalScope::standard(ego_pose.position);
        let truth_boxes: Vec<LabeledBox> = objects
            .iter()
            .map(|o| LabeledBox { id: o.id, bbox: o.bbox })
            .collect();
        let scoped = scope_filter(&truth_boxes, &scope);
        let track_boxes: Vec<LabeledBox> = confirmed
            .iter()
            .map(|t| {
                let [h, w, l] = t.dimensions();
                LabeledBox {
                    id: t.id,
                    bbox: BoundingBox3D::new(
                        t.position(),
                        Dimensions::new(h, w, l),
                        crate::geometry::Rotation::from_yaw(t.yaw()),
                        WORLD,
                    ),
                }
            })
            .collect();
        let eval = match_frame(&scoped, &track_boxes, study.iou_threshold, None);

        for d in &detections {
            ap_dets.push(ScoredDetection {
                frame: eval_index,
                object_type: ObjectType::Car,
                confidence: d.confidence,
                bbox: d.bbox,
            });
        }
        for t in &scoped {
            ap_truths.push(TruthBox {
                frame: eval_index,
                object_type: ObjectType::Car,
                bbox: t.bbox,
            });
        }

        // Trajectory prediction against the truth future, on a fixed cadence.
        if eval_index % case.prediction.every_frames == 0 {
            for m in &eval.matches {
                let track = confirmed.iter().find(|t| t.id == m.prediction_id);
                let track = match track {
                    Some(t) => t,
                    None => continue,
                };
                let traj = kinematic_predict(track, case.prediction.horizon_s, case.prediction.step_s)
                    .map_err(|e| err(frame, &e))?;
                let steps_per_wp =
                    (case.prediction.step_s * scenario_cfg.frame_rate_hz).round() as usize;
                let actual: Vec<(f64, nalgebra::Vector3<f64>)> = (1..=traj.waypoints.len())
                    .filter_map(|k| {
                        let fk = frame + k * steps_per_wp;
                        let states = truth.frames.get(fk)?;
                        let obj = states.iter().find(|o| o.id == m.truth_id)?;
                        Some((truth.timestamp(fk), obj.bbox.center))
                    })
                    .collect();
                match displacement_errors(&traj, &actual) {
                    Ok((ade, fde)) => {
                        ades.push(ade);
                        fdes.push(fde);
                    }
                    // Near the scenario end there is no future to compare to.
                    Err(MetricsError::EmptyOverlap) => {}
                    Err(e) => return Err(err(frame, &e)),
                }
            }
        }

        truth_log.push(TruthLogRecord { frame, timestamp, objects: objects.clone() });
        detection_log.push(DetectionLogRecord {
            frame,
            timestamp,
            sensors_in_range: in_range,
            detections,
        });
        track_log.push(TrackLogRecord {
            frame,
            timestamp,
            tracks: tracker
                .tracks()
                .iter()
                .filter(|t| t.status == TrackStatus::Confirmed)
                .map(|t| TrackStateRecord {
                    id: t.id,
                    position: t.position().into(),
                    velocity: t.velocity().into(),
                    yaw: t.yaw(),
                    dimensions: t.dimensions(),
                    hits: t.hits,
                })
                .collect(),
        });
        scoped_truth_frames.push(scoped);
        track_frames.push(track_boxes);
        frame_evals.push(eval);
    }

    let steps = frame_evals.len().max(1) as f64;
    let stats = TrialStats {
        sensors_in_range_per_frame: sensors_in_range_sum as f64 / steps,
        detections_per_frame: detections_sum as f64 / steps,
    };

    let clear = clear_mot(&frame_evals);
    let rates = track_rates(&frame_evals);
    let tp = (clear.ground_truths - clear.false_negatives) as f64;
    let ratio = |num: f64, den: f64| if den == 0.0 { f64::NAN } else { num / den };
    let precision = ratio(tp, tp + clear.false_positives as f64);
    let recall = ratio(tp, clear.ground_truths as f64);
    let h = hota(&scoped_truth_frames, &track_frames, None);
    let metrics = TrialMetrics {
        precision,
        recall,
        false_positive_rate: 1.0 - precision,
        false_negative_rate: 1.0 - recall,
        map: mean_average_precision(&ap_dets, &ap_truths, study.iou_threshold),
        hota: h.hota,
        mota: clear.mota,
        motp: clear.motp,
        false_track_rate: rates.false_track_rate,
        missed_track_rate: rates.missed_track_rate,
        ade: mean_or_nan(&ades),
        fde: mean_or_nan(&fdes),
    };
    Ok(TrialOutput { metrics, stats, truth_log, detection_log, track_log })
}

fn mean_or_nan(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Runs every (case x trial) unit, invoking `on_trial` for each completed
/// unit (e.g. to write logs), and aggregates per case. Units run in parallel;
/// the result is independent of worker count because each unit is a pure
/// function of (study, case, trial) and aggregation happens in index order.
pub fn run_study<F>(study: &TradeStudyConfig, on_trial: F) -> Result<StudyReport, HarnessError>
where
    F: Fn(&CaseConfig, usize, &TrialOutput) -> Result<(), HarnessError> + Sync,
{
    study.validate()?;
    let units: Vec<(usize, usize)> = (0..study.cases.len())
        .flat_map(|c| (0..study.trials).map(move |t| (c, t)))
        .collect();
    let mut results: Vec<((usize, usize), (TrialMetrics, TrialStats))> = units
        .par_iter()
        .map(|&(c, t)| {
            let out = run_trial(study, &study.cases[c], t)?;
            on_trial(&study.cases[c], t, &out)?;
            Ok(((c, t), (out.metrics, out.stats)))
        })
        .collect::<Result<_, HarnessError>>()?;
    results.sort_by_key(|(k, _)| *k);

    let cases = study
        .cases
        .iter()
        .enumerate()
        .map(|(c, case)| {
            let trials: Vec<(TrialMetrics, TrialStats)> = results
                .iter()
                .filter(|((ci, _), _)| *ci == c)
                .map(|(_, v)| *v)
                .collect();
            aggregate_case(&case.id, &trials)
        })
        .collect();
    Ok(StudyReport { name: study.name.clone(), trials: study.trials, cases })
}

/// Aggregates per-trial values into one report row (mean +/- sample std).
pub fn aggregate_case(id: &str, trials: &[(TrialMetrics, TrialStats)]) -> CaseReport {
    let metrics: Vec<TrialMetrics> = trials.iter().map(|(m, _)| *m).collect();
    CaseReport {
        id: id.to_string(),
        metrics: MetricsReport::from_trials(&metrics),
        sensors_in_range: crate::metrics::aggregate(
            &trials.iter().map(|(_, s)| s.sensors_in_range_per_frame).collect::<Vec<_>>(),
        ),
        detections_per_frame: crate::metrics::aggregate(
            &trials.iter().map(|(_, s)| s.detections_per_frame).collect::<Vec<_>>(),
        ),
    }
}
