//! Field-of-view membership test.

use crate::geometry::Transform;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Angular cone and range of a sensor. The sensor looks along its frame's +x
/// axis; azimuth is measured in the x-y plane, elevation from that plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FovSpec {
    pub azimuth_half_angle: f64,
    pub elevation_half_angle: f64,
    pub max_range: f64,
}

impl FovSpec {
    /// Whether a sensor-frame point lies inside the cone. The range boundary
    /// is inclusive.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        let range = p.norm();
        if range > self.max_range {
            return false;
        }
        if range == 0.0 {
            return true;
        }
        let azimuth = p.y.atan2(p.x);
        let elevation = p.z.atan2((p.x * p.x + p.y * p.y).sqrt());
        azimuth.abs() <= self.azimuth_half_angle + 1e-12
            && elevation.abs() <= self.elevation_half_angle + 1e-12
    }
}

/// Whether a point expressed elsewhere is in view, given the transform from
/// its frame into the sensor frame.
pub fn in_fov(point: &Vector3<f64>, into_sensor: &Transform, fov: &FovSpec) -> bool {
    fov.contains(&into_sensor.apply(point))
}
