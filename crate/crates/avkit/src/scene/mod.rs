//! Canonical object, box, detection, and sensor-data types shared by all
//! pipeline stages, plus geometric predicates (IoU, FOV, occlusion).

mod fov;
mod iou;
mod occlusion;

pub use fov::{in_fov, FovSpec};
pub use iou::{iou_3d, iou_bev};
pub use occlusion::occlusion_score;

use crate::geometry::{FrameId, Rotation, Transform};
use nalgebra::{SMatrix, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObjectType {
    Car,
    Truck,
    Pedestrian,
    Cyclist,
    Other,
}

/// Box dimensions in meters, `(height, width, length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub height: f64,
    pub width: f64,
    pub length: f64,
}

impl Dimensions {
    pub fn new(height: f64, width: f64, length: f64) -> Self {
        assert!(height > 0.0 && width > 0.0 && length > 0.0, "dimensions must be positive");
        Dimensions { height, width, length }
    }

    pub fn volume(&self) -> f64 {
        self.height * self.width * self.length
    }
}

/// An oriented 3D box whose center is expressed in an attached frame.
/// Length runs along the box's local +x, width along +y, height along +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox3D {
    pub center: Vector3<f64>,
    pub dimensions: Dimensions,
    pub orientation: Rotation,
    pub frame: FrameId,
}

impl BoundingBox3D {
    pub fn new(center: Vector3<f64>, dimensions: Dimensions, orientation: Rotation, frame: FrameId) -> Self {
        BoundingBox3D { center, dimensions, orientation, frame }
    }

    /// The 8 corners in the box's attached frame.
    pub fn corners(&self) -> [Vector3<f64>; 8] {
        let (h, w, l) = (self.dimensions.height, self.dimensions.width, self.dimensions.length);
        let mut out = [Vector3::zeros(); 8];
        let mut i = 0;
        for sx in [-0.5, 0.5] {
            for sy in [-0.5, 0.5] {
                for sz in [-0.5, 0.5] {
                    let local = Vector3::new(sx * l, sy * w, sz * h);
                    out[i] = self.center + self.orientation.apply(&local);
                    i += 1;
                }
            }
        }
        out
    }

    /// Re-expresses the box through a rigid transform whose source endpoint
    /// matches the box's frame. Volume is preserved exactly.
    pub fn transformed(&self, t: &Transform) -> BoundingBox3D {
        debug_assert_eq!(t.from, self.frame);
        BoundingBox3D {
            center: t.apply(&self.center),
            dimensions: self.dimensions,
            orientation: t.rotation.compose(&self.orientation),
            frame: t.to,
        }
    }

    /// Heading of the box's +x axis projected onto the ground plane.
    pub fn yaw(&self) -> f64 {
        self.orientation.yaw()
    }
}

/// Full 9-DOF object description in a reference frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectState {
    pub id: u64,
    pub object_type: ObjectType,
    #[serde(rename = "box")]
    pub bbox: BoundingBox3D,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
    pub timestamp: f64,
}

/// Measurement covariance layout: (x, y, z, yaw, vertical extent, horizontal extent).
pub type DetectionCovariance = SMatrix<f64, 6, 6>;

/// A noisy, sensor-attributed box observation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: BoundingBox3D,
    pub covariance: DetectionCovariance,
    pub sensor_id: u32,
    pub timestamp: f64,
    pub confidence: f64,
}

impl Detection {
    /// Checks symmetry and positive semi-definiteness of the covariance.
    pub fn covariance_is_valid(&self) -> bool {
        let c = &self.covariance;
        if (c - c.transpose()).norm() > 1e-9 {
            return false;
        }
        c.symmetric_eigenvalues().iter().all(|l| *l >= -1e-9)
    }
}

/// Ordinal visibility category of an object from a sensor's viewpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OcclusionScore {
    None,
    Partial,
    Most,
    Complete,
    Unknown,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FrameForest, WORLD};

    #[test]
    fn occlusion_ordering() {
        assert!(OcclusionScore::None < OcclusionScore::Partial);
        assert!(OcclusionScore::Partial < OcclusionScore::Most);
        assert!(OcclusionScore::Most < OcclusionScore::Complete);
    }

    #[test]
    fn transform_preserves_volume() {
        let mut forest = FrameForest::new();
        let f = forest
            .add_simple(WORLD, Vector3::new(3.0, -2.0, 1.0), Rotation::from_yaw(0.8))
            .unwrap();
        let b = BoundingBox3D::new(
            Vector3::new(1.0, 1.0, 0.5),
            Dimensions::new(1.5, 1.8, 4.2),
            Rotation::from_yaw(0.3),
            f,
        );
        let t = forest.resolve_to_world(f).unwrap();
        let b2 = b.transformed(&t);
        assert!((b.dimensions.volume() - b2.dimensions.volume()).abs() < 1e-9);
        assert_eq!(b2.frame, WORLD);
    }

    #[test]
    fn detection_covariance_validity() {
        let b = BoundingBox3D::new(
            Vector3::zeros(),
            Dimensions::new(1.0, 1.0, 1.0),
            Rotation::identity(),
            WORLD,
        );
        let det = Detection {
            bbox: b,
            covariance: DetectionCovariance::identity(),
            sensor_id: 0,
            timestamp: 0.0,
            confidence: 1.0,
        };
        assert!(det.covariance_is_valid());
        let mut bad = det.clone();
        bad.covariance[(0, 0)] = -1.0;
        assert!(!bad.covariance_is_valid());
    }
}
