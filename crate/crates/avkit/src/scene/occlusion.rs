//! Box-ray occlusion scoring.
//!
//! Rays are cast from the sensor origin to the target box's 8 corners plus
//! its center; the fraction blocked by other boxes maps onto the ordinal
//! occlusion score.

use super::{BoundingBox3D, OcclusionScore};
use nalgebra::Vector3;

/// Spares the target's own surface and the occluder the ray ends inside of.
const RAY_T_MIN: f64 = 1e-9;
const RAY_T_MAX: f64 = 1.0 - 1e-6;

/// Whether the open segment `origin -> end` passes through `bbox`.
fn segment_hits_box(origin: &Vector3<f64>, end: &Vector3<f64>, bbox: &BoundingBox3D) -> bool {
    let inv_rot = bbox.orientation.inverse();
    let p0 = inv_rot.apply(&(origin - bbox.center));
    let p1 = inv_rot.apply(&(end - bbox.center));
    let d = p1 - p0;
    let half = Vector3::new(
        bbox.dimensions.length * 0.5,
        bbox.dimensions.width * 0.5,
        bbox.dimensions.height * 0.5,
    );
    let mut t_enter = RAY_T_MIN;
    let mut t_exit = RAY_T_MAX;
    for i in 0..3 {
        if d[i].abs() < 1e-15 {
            if p0[i].abs() > half[i] {
                return false;
            }
            continue;
        }
        let mut t0 = (-half[i] - p0[i]) / d[i];
        let mut t1 = (half[i] - p0[i]) / d[i];
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return false;
        }
    }
    true
}

/// Fraction of the 9 sample rays blocked by `occluders`, mapped to the score:
/// 0 -> None, (0, 0.5] -> Partial, (0.5, 1) -> Most, 1 -> Complete.
///
/// All geometry must be expressed in one common frame. The target itself must
/// not appear among the occluders.
pub fn occlusion_score(
    target: &BoundingBox3D,
    sensor_origin: &Vector3<f64>,
    occluders: &[BoundingBox3D],
) -> OcclusionScore {
    let mut points: Vec<Vector3<f64>> = target.corners().to_vec();
    points.push(target.center);
    let blocked = points
        .iter()
        .filter(|p| occluders.iter().any(|o| segment_hits_box(sensor_origin, p, o)))
        .count();
    let f = blocked as f64 / points.len() as f64;
    if f == 0.0 {
        OcclusionScore::None
    } else if f <= 0.5 {
        OcclusionScore::Partial
    } else if f < 1.0 {
        OcclusionScore::Most
    } else {
        OcclusionScore::Complete
    }
}
