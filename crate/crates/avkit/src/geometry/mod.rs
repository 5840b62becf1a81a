//! Reference frames, rotations, handedness, calibrations, and automatic
//! transform resolution along the frame chain.

mod camera;
mod euler;
mod frame;
mod rotation;
mod transform;

pub use camera::CameraCalibration;
pub use euler::{euler_to_rotation, rotation_to_euler, Axis, CompositionMode, EulerConvention};
pub use frame::{FrameForest, FrameId, Handedness, ReferenceFrame, TranslationOrder, WORLD};
pub use rotation::Rotation;
pub use transform::Transform;

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("cycle detected while resolving frame {frame:?}")]
    CycleDetected { frame: FrameId },
    #[error("frame {frame:?} is missing from the forest")]
    OrphanFrame { frame: FrameId },
    #[error("frames {a:?} and {b:?} belong to disjoint forests")]
    DisjointForests { a: FrameId, b: FrameId },
    #[error("transform endpoint mismatch: expected {expected:?}, found {found:?}")]
    EndpointMismatch { expected: FrameId, found: FrameId },
    #[error("invalid Euler axis order {axes:?}: adjacent axes repeat")]
    InvalidEulerOrder { axes: [Axis; 3] },
    #[error("rotation is within tolerance of the convention's gimbal-lock singularity")]
    GimbalLock { representative: [f64; 3] },
    #[error("point behind camera (depth {depth})")]
    BehindCamera { depth: f64 },
    #[error("invalid camera calibration: {0}")]
    InvalidCalibration(String),
    #[error("frame serialization: {0}")]
    Serialization(String),
}
