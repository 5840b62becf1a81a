//! Kinematic trajectory prediction from confirmed tracks.

use crate::tracking::{Track, TrackStatus};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum PredictionError {
    #[error("horizon and step must be positive (horizon {horizon}, step {step})")]
    InvalidHorizon { horizon: f64, step: f64 },
    #[error("track {0} is not confirmed")]
    NotConfirmed(u64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictedTrajectory {
    pub track_id: u64,
    pub horizon_s: f64,
    pub step_s: f64,
    /// (timestamp, position) per step; `floor(horizon / step)` entries with
    /// strictly increasing timestamps.
    pub waypoints: Vec<(f64, Vector3<f64>)>,
}

/// Constant-velocity rollout: waypoint `k` sits at `position + velocity * k * step`.
pub fn kinematic_predict(
    track: &Track,
    horizon_s: f64,
    step_s: f64,
) -> Result<PredictedTrajectory, PredictionError> {
    if horizon_s <= 0.0 || step_s <= 0.0 {
        return Err(PredictionError::InvalidHorizon { horizon: horizon_s, step: step_s });
    }
    if track.status != TrackStatus::Confirmed {
        return Err(PredictionError::NotConfirmed(track.id));
    }
    let count = (horizon_s / step_s + 1e-9).floor() as usize;
    let position = track.position();
    let velocity = track.velocity();
    let waypoints = (1..=count)
        .map(|k| {
            let dt = k as f64 * step_s;
            (track.last_update + dt, position + velocity * dt)
        })
        .collect();
    Ok(PredictedTrajectory { track_id: track.id, horizon_s, step_s, waypoints })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{BoundingBox3D, Detection, DetectionCovariance, Dimensions, ObjectType};
    use crate::geometry::{Rotation, WORLD};

    fn confirmed_track(velocity: Vector3<f64>) -> Track {
        let det = Detection {
            bbox: BoundingBox3D::new(
                Vector3::new(1.0, 2.0, 0.75),
                Dimensions::new(1.5, 1.8, 4.2),
                Rotation::identity(),
                WORLD,
            ),
            covariance: DetectionCovariance::identity() * 0.01,
            sensor_id: 0,
            timestamp: 0.0,
            confidence: 1.0,
        };
        let mut t = Track::from_detection(1, &det, ObjectType::Car);
        t.status = TrackStatus::Confirmed;
        t.state[3] = velocity.x;
        t.state[4] = velocity.y;
        t.state[5] = velocity.z;
        t
    }

    #[test]
    fn zero_velocity_stays_put() {
        let t = confirmed_track(Vector3::zeros());
        let traj = kinematic_predict(&t, 3.0, 0.5).unwrap();
        assert_eq!(traj.waypoints.len(), 6);
        for (_, p) in &traj.waypoints {
            assert_eq!(*p, Vector3::new(1.0, 2.0, 0.75));
        }
    }

    #[test]
    fn constant_velocity_closed_form() {
        let mut t = confirmed_track(Vector3::new(2.0, 0.0, 0.0));
        t.state[0] = 0.0;
        t.state[1] = 0.0;
        let traj = kinematic_predict(&t, 3.0, 1.0).unwrap();
        let xs: Vec<f64> = traj.waypoints.iter().map(|(_, p)| p.x).collect();
        assert_eq!(xs, vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn matches_euler_integration() {
        let t = confirmed_track(Vector3::new(1.3, -0.4, 0.0));
        let traj = kinematic_predict(&t, 2.0, 0.25).unwrap();
        let mut p = t.position();
        for (k, (ts, wp)) in traj.waypoints.iter().enumerate() {
            p += t.velocity() * 0.25;
            assert!((wp - p).norm() < 1e-12, "step {k}");
            assert!((ts - (0.25 * (k as f64 + 1.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_equivariant() {
        let t = confirmed_track(Vector3::new(1.0, 1.0, 0.0));
        let mut shifted = t.clone();
        shifted.state[0] += 10.0;
        shifted.state[1] -= 5.0;
        let a = kinematic_predict(&t, 3.0, 0.5).unwrap();
        let b = kinematic_predict(&shifted, 3.0, 0.5).unwrap();
        for ((_, pa), (_, pb)) in a.waypoints.iter().zip(&b.waypoints) {
            assert!((pb - pa - Vector3::new(10.0, -5.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn concatenation_property() {
        // Predicting h1 then h2 from the rolled state equals h1 + h2 directly.
        let t = confirmed_track(Vector3::new(2.0, 1.0, 0.0));
        let full = kinematic_predict(&t, 4.0, 1.0).unwrap();
        let first = kinematic_predict(&t, 2.0, 1.0).unwrap();
        let mut rolled = t.clone();
        let (ts, pos) = first.waypoints.last().copied().unwrap();
        rolled.state[0] = pos.x;
        rolled.state[1] = pos.y;
        rolled.state[2] = pos.z;
        rolled.last_update = ts;
        let second = kinematic_predict(&rolled, 2.0, 1.0).unwrap();
        let combined: Vec<Vector3<f64>> = first
            .waypoints
            .iter()
            .chain(&second.waypoints)
            .map(|(_, p)| *p)
            .collect();
        for ((_, pa), pb) in full.waypoints.iter().zip(&combined) {
            assert!((pa - pb).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_unconfirmed_and_bad_horizon() {
        let mut t = confirmed_track(Vector3::zeros());
        assert!(kinematic_predict(&t, 0.0, 0.5).is_err());
        assert!(kinematic_predict(&t, 1.0, 0.0).is_err());
        t.status = TrackStatus::Tentative;
        assert!(kinematic_predict(&t, 1.0, 0.5).is_err());
    }
}
