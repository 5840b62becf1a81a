//! Kalman-filter multi-object tracking with assignment-based association,
//! track lifecycle management, and collaborative (V2I) fusion of remote
//! detections.

pub mod hungarian;
mod kalman;
mod tracker;

pub use kalman::{ProcessNoise, StateCovariance, StateVector, Track, TrackStatus};
pub use tracker::{
    associate, associate_with_cost, preprocess_remote, AssociationCost, AssociationResult,
    Tracker, TrackerParams,
};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum TrackingError {
    #[error("innovation covariance for track {track} is singular or ill-conditioned")]
    SingularInnovation { track: u64 },
    #[error("timestamps must be non-decreasing: last {last}, got {got}")]
    NonMonotoneTimestamp { last: f64, got: f64 },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}
