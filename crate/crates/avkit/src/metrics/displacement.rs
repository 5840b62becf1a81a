//! Trajectory displacement errors.

use super::MetricsError;
use crate::prediction::PredictedTrajectory;
use nalgebra::Vector3;

const TIMESTAMP_TOL: f64 = 1e-6;

/// ADE and FDE of a predicted trajectory against actual future positions.
/// Waypoints are paired by timestamp; the comparison covers the overlap of
/// the two time ranges and errs if it is empty.
pub fn displacement_errors(
    predicted: &PredictedTrajectory,
    actual: &[(f64, Vector3<f64>)],
) -> Result<(f64, f64), MetricsError> {
    let mut errors = Vec::new();
    for &(t, p) in &predicted.waypoints {
        if let Some((_, a)) = actual
            .iter()
            .find(|(ta, _)| (ta - t).abs() <= TIMESTAMP_TOL)
        {
            errors.push((p - a).norm());
        }
    }
    match errors.last() {
        Some(&fde) => {
            let ade = errors.iter().sum::<f64>() / errors.len() as f64;
            Ok((ade, fde))
        }
        None => Err(MetricsError::EmptyOverlap),
    }
}
