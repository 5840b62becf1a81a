//! Multi-object tracker: gated assignment association plus track lifecycle,
//! with collaborative preprocessing of remote detections.

use super::hungarian::{assign, FORBIDDEN};
use super::kalman::{ProcessNoise, Track, TrackStatus};
use super::TrackingError;
use crate::geometry::{FrameForest, FrameId};
use crate::scene::{iou_bev, Detection};
use serde::{Deserialize, Serialize};

/// Association cost switch: center distance (default) or BEV IoU.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum AssociationCost {
    CenterDistance,
    BevIou { min_iou: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackerParams {
    /// Association gate: max center distance in meters.
    pub gate_m: f64,
    /// Hits needed to promote Tentative -> Confirmed.
    pub confirm_hits: u32,
    /// Consecutive misses before deletion.
    pub delete_misses: u32,
    pub process_noise: ProcessNoise,
    pub association_cost: AssociationCost,
}

impl Default for TrackerParams {
    fn default() -> Self {
        TrackerParams {
            gate_m: 4.0,
            confirm_hits: 3,
            delete_misses: 4,
            process_noise: ProcessNoise::default(),
            association_cost: AssociationCost::CenterDistance,
        }
    }
}

/// Outcome of one association pass. The three lists partition the inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationResult {
    /// (track id, detection index)
    pub matched: Vec<(u64, usize)>,
    pub unmatched_tracks: Vec<u64>,
    pub unmatched_detections: Vec<usize>,
}

/// Optimal gated assignment on center distance (or 1 - IoU), ties broken by
/// (lower track id, lower detection index).
pub fn associate(tracks: &[Track], detections: &[Detection], gate_m: f64) -> AssociationResult {
    associate_with_cost(tracks, detections, gate_m, AssociationCost::CenterDistance)
}

pub fn associate_with_cost(
    tracks: &[Track],
    detections: &[Detection],
    gate_m: f64,
    cost_mode: AssociationCost,
) -> AssociationResult {
    let cost: Vec<Vec<f64>> = tracks
        .iter()
        .map(|t| {
            detections
                .iter()
                .map(|d| match cost_mode {
                    AssociationCost::CenterDistance => {
                        let dist = (t.position() - d.bbox.center).norm();
                        if dist > gate_m {
                            FORBIDDEN
                        } else {
                            dist
                        }
                    }
                    AssociationCost::BevIou { min_iou } => {
                        let track_box = crate::scene::BoundingBox3D::new(
                            t.position(),
                            crate::scene::Dimensions::new(
                                t.dimensions()[0].max(1e-3),
                                t.dimensions()[1].max(1e-3),
                                t.dimensions()[2].max(1e-3),
                            ),
                            crate::geometry::Rotation::from_yaw(t.yaw()),
                            d.bbox.frame,
                        );
                        let iou = iou_bev(&track_box, &d.bbox);
                        if iou < min_iou {
                            FORBIDDEN
                        } else {
                            1.0 - iou
                        }
                    }
                })
                .collect()
        })
        .collect();
    let pairs = assign(&cost, tracks.len(), detections.len());
    let matched: Vec<(u64, usize)> = pairs.iter().map(|&(i, j)| (tracks[i].id, j)).collect();
    let matched_tracks: Vec<usize> = pairs.iter().map(|&(i, _)| i).collect();
    let matched_dets: Vec<usize> = pairs.iter().map(|&(_, j)| j).collect();
    AssociationResult {
        matched,
        unmatched_tracks: tracks
            .iter()
            .enumerate()
            .filter(|(i, _)| !matched_tracks.contains(i))
            .map(|(_, t)| t.id)
            .collect(),
        unmatched_detections: (0..detections.len()).filter(|j| !matched_dets.contains(j)).collect(),
    }
}

/// The tracker state machine. One instance is single-threaded; run one per
/// trial for parallel studies.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub params: TrackerParams,
    tracks: Vec<Track>,
    next_id: u64,
    last_timestamp: Option<f64>,
}

impl Tracker {
    pub fn new(params: TrackerParams) -> Self {
        Tracker { params, tracks: Vec::new(), next_id: 1, last_timestamp: None }
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// One tracking cycle: predict, associate, update, manage lifecycle.
    /// Detections must already be expressed in the tracker's working frame.
    /// Returns the confirmed tracks.
    pub fn step(
        &mut self,
        detections: &[Detection],
        timestamp: f64,
    ) -> Result<Vec<Track>, TrackingError> {
        if let Some(last) = self.last_timestamp {
            if timestamp < last {
                return Err(TrackingError::NonMonotoneTimestamp { last, got: timestamp });
            }
            let dt = timestamp - last;
            for t in &mut self.tracks {
                t.predict(dt, &self.params.process_noise);
            }
        }
        self.last_timestamp = Some(timestamp);

        let result = associate_with_cost(
            &self.tracks,
            detections,
            self.params.gate_m,
            self.params.association_cost,
        );

        for &(track_id, det_idx) in &result.matched {
            let track = self.tracks.iter_mut().find(|t| t.id == track_id).expect("matched id");
            track.update(&detections[det_idx])?;
            if track.status == TrackStatus::Tentative && track.hits >= self.params.confirm_hits {
                track.status = TrackStatus::Confirmed;
            }
        }
        for track_id in &result.unmatched_tracks {
            let track = self.tracks.iter_mut().find(|t| t.id == *track_id).expect("unmatched id");
            track.consecutive_misses += 1;
            if track.consecutive_misses >= self.params.delete_misses {
                track.status = TrackStatus::Deleted;
            }
        }
        for &det_idx in &result.unmatched_detections {
            let det = &detections[det_idx];
            let mut track = Track::from_detection(self.next_id, det, crate::scene::ObjectType::Car);
            track.last_update = timestamp;
            if self.params.confirm_hits <= 1 {
                track.status = TrackStatus::Confirmed;
            }
            self.tracks.push(track);
            self.next_id += 1;
        }
        self.tracks.retain(|t| t.status != TrackStatus::Deleted);

        Ok(self
            .tracks
            .iter()
            .filter(|t| t.status == TrackStatus::Confirmed)
            .cloned()
            .collect())
    }
}

/// Transforms remote detections into the ego frame and drops those beyond the
/// preprocessing radius (inclusive boundary).
pub fn preprocess_remote(
    detections: &[Detection],
    forest: &FrameForest,
    ego_frame: FrameId,
    radius_m: f64,
) -> Result<Vec<Detection>, TrackingError> {
    let mut out = Vec::with_capacity(detections.len());
    for det in detections {
        let to_ego = forest.transform_between(det.bbox.frame, ego_frame)?;
        let bbox = det.bbox.transformed(&to_ego);
        if bbox.center.norm() <= radius_m {
            out.push(Detection { bbox, ..det.clone() });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rotation, WORLD};
    use crate::scene::{BoundingBox3D, DetectionCovariance, Dimensions};
    use nalgebra::Vector3;

    fn det_at(x: f64, y: f64, ts: f64) -> Detection {
        let mut cov = DetectionCovariance::identity() * 0.01;
        cov[(4, 4)] = 1e-6;
        cov[(5, 5)] = 1e-6;
        Detection {
            bbox: BoundingBox3D::new(
                Vector3::new(x, y, 0.75),
                Dimensions::new(1.5, 1.8, 4.2),
                Rotation::identity(),
                WORLD,
            ),
            covariance: cov,
            sensor_id: 0,
            timestamp: ts,
            confidence: 1.0,
        }
    }

    #[test]
    fn single_pair_within_gate_matches() {
        let track = Track::from_detection(1, &det_at(0.0, 0.0, 0.0), crate::scene::ObjectType::Car);
        let dets = vec![det_at(1.0, 0.0, 0.1)];
        let r = associate(&[track], &dets, 4.0);
        assert_eq!(r.matched, vec![(1, 0)]);
        assert!(r.unmatched_tracks.is_empty());
        assert!(r.unmatched_detections.is_empty());
    }

    #[test]
    fn beyond_gate_all_unmatched() {
        let track = Track::from_detection(1, &det_at(0.0, 0.0, 0.0), crate::scene::ObjectType::Car);
        let dets = vec![det_at(10.0, 0.0, 0.1)];
        let r = associate(&[track], &dets, 4.0);
        assert!(r.matched.is_empty());
        assert_eq!(r.unmatched_tracks, vec![1]);
        assert_eq!(r.unmatched_detections, vec![0]);
    }

    #[test]
    fn association_partitions_inputs() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..200 {
            let n_tracks = rng.gen_range(0..6);
            let n_dets = rng.gen_range(0..6);
            let tracks: Vec<Track> = (0..n_tracks)
                .map(|i| {
                    Track::from_detection(
                        i as u64 + 1,
                        &det_at(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), 0.0),
                        crate::scene::ObjectType::Car,
                    )
                })
                .collect();
            let dets: Vec<Detection> = (0..n_dets)
                .map(|_| det_at(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), 0.1))
                .collect();
            let r = associate(&tracks, &dets, 5.0);
            let mut track_ids: Vec<u64> = r.matched.iter().map(|(id, _)| *id).collect();
            track_ids.extend(&r.unmatched_tracks);
            track_ids.sort_unstable();
            let mut expected: Vec<u64> = tracks.iter().map(|t| t.id).collect();
            expected.sort_unstable();
            assert_eq!(track_ids, expected);
            let mut det_ids: Vec<usize> = r.matched.iter().map(|(_, j)| *j).collect();
            det_ids.extend(&r.unmatched_detections);
            det_ids.sort_unstable();
            assert_eq!(det_ids, (0..n_dets).collect::<Vec<_>>());
        }
    }

    #[test]
    fn lifecycle_confirm_at_third_frame() {
        let mut tracker = Tracker::new(TrackerParams::default());
        for frame in 0..5 {
            let ts = frame as f64 * 0.1;
            let confirmed = tracker.step(&[det_at(5.0, 0.0, ts)], ts).unwrap();
            if frame < 2 {
                assert!(confirmed.is_empty(), "frame {frame}");
            } else {
                assert_eq!(confirmed.len(), 1, "frame {frame}");
            }
        }
    }

    #[test]
    fn lifecycle_delete_after_k_misses() {
        let mut tracker = Tracker::new(TrackerParams::default());
        for frame in 0..3 {
            let ts = frame as f64 * 0.1;
            tracker.step(&[det_at(5.0, 0.0, ts)], ts).unwrap();
        }
        assert_eq!(tracker.tracks().len(), 1);
        // 4 misses: survives the first 3, deleted on the 4th.
        for frame in 3..7 {
            let ts = frame as f64 * 0.1;
            tracker.step(&[], ts).unwrap();
            if frame < 6 {
                assert_eq!(tracker.tracks().len(), 1, "frame {frame}");
            }
        }
        assert!(tracker.tracks().is_empty());
    }

    #[test]
    fn empty_step_on_empty_tracker() {
        let mut tracker = Tracker::new(TrackerParams::default());
        assert!(tracker.step(&[], 0.0).unwrap().is_empty());
    }

    #[test]
    fn deterministic_track_ids() {
        let run = || {
            let mut tracker = Tracker::new(TrackerParams::default());
            let mut ids = Vec::new();
            for frame in 0..10 {
                let ts = frame as f64 * 0.1;
                let dets = vec![det_at(5.0 + 0.1 * frame as f64, 0.0, ts), det_at(-5.0, 2.0, ts)];
                let confirmed = tracker.step(&dets, ts).unwrap();
                ids.push(confirmed.iter().map(|t| t.id).collect::<Vec<_>>());
            }
            ids
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn remote_preprocessing_radius() {
        let mut forest = FrameForest::new();
        let ego = forest
            .add_simple(WORLD, Vector3::zeros(), Rotation::identity())
            .unwrap();
        let sensor = forest
            .add_simple(WORLD, Vector3::new(50.0, 0.0, 15.0), Rotation::identity())
            .unwrap();
        let mk = |x: f64| {
            let mut d = det_at(0.0, 0.0, 0.0);
            d.bbox.frame = sensor;
            d.bbox.center = Vector3::new(x, 0.0, -15.0); // back on the ground plane
            d
        };
        // World x = 50 + x_local; ego at origin.
        let kept = preprocess_remote(&[mk(50.0)], &forest, ego, 100.0).unwrap();
        assert_eq!(kept.len(), 1, "100.0 m is inside the inclusive boundary");
        assert_eq!(kept[0].bbox.frame, ego);
        assert!((kept[0].bbox.center - Vector3::new(100.0, 0.0, 0.0)).norm() < 1e-10);
        let dropped = preprocess_remote(&[mk(100.0)], &forest, ego, 100.0).unwrap();
        assert!(dropped.is_empty(), "150 m is outside");
    }
}
