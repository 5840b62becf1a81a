//! Simulated box detectors and the V2I communication model.

use super::rng::stream;
use super::SimError;
use crate::geometry::{FrameForest, FrameId, Rotation, WORLD};
use crate::scene::{
    occlusion_score, BoundingBox3D, Detection, DetectionCovariance, Dimensions, FovSpec,
    ObjectState, OcclusionScore,
};
use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

/// Gaussian detection noise, per sensor-frame axis plus yaw.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_xyz: [f64; 3],
    pub sigma_yaw: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel { sigma_xyz: [0.0; 3], sigma_yaw: 0.0 }
    }

    pub fn isotropic(sigma: f64, sigma_yaw: f64) -> Self {
        NoiseModel { sigma_xyz: [sigma; 3], sigma_yaw }
    }
}

/// Small floor keeping measurement covariances usable for fusion even when a
/// term is simulated noise-free.
const MIN_VARIANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensorModel {
    pub id: u32,
    /// Frame the sensor reports in; boresight along the frame's +x.
    pub mount: FrameId,
    pub fov: FovSpec,
    pub rate_hz: f64,
    pub noise: NoiseModel,
    pub p_miss: f64,
    /// Poisson mean of clutter boxes per sensing frame.
    pub false_alarms_per_frame: f64,
    /// Inert metadata mirroring hardware descriptions; no detector analogue.
    pub lidar_lines: Option<u32>,
}

impl SensorModel {
    /// Frames between successive sensor firings.
    pub fn frame_stride(&self, scenario_rate_hz: f64) -> Result<usize, SimError> {
        let ratio = scenario_rate_hz / self.rate_hz;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return Err(SimError::InvalidConfig(format!(
                "sensor {} rate {} Hz must evenly divide scenario rate {} Hz",
                self.id, self.rate_hz, scenario_rate_hz
            )));
        }
        Ok(ratio.round() as usize)
    }

    fn covariance(&self) -> DetectionCovariance {
        let mut c = DetectionCovariance::zeros();
        for (i, s) in self.noise.sigma_xyz.iter().enumerate() {
            c[(i, i)] = (s * s).max(MIN_VARIANCE);
        }
        c[(3, 3)] = (self.noise.sigma_yaw * self.noise.sigma_yaw).max(MIN_VARIANCE);
        c[(4, 4)] = MIN_VARIANCE;
        c[(5, 5)] = MIN_VARIANCE;
        c
    }
}

/// Simulates one sensing pass. Detections are expressed in the sensor's
/// frame and keep the sensor's covariance. The RNG is keyed by
/// (seed, sensor id, frame), so adding or reordering sensors cannot change
/// another sensor's draws.
pub fn sense(
    sensor: &SensorModel,
    truths: &[ObjectState],
    forest: &FrameForest,
    seed: u64,
    frame_idx: usize,
    timestamp: f64,
) -> Result<Vec<Detection>, SimError> {
    let world_to_sensor = forest.transform_between(WORLD, sensor.mount)?;
    let sensor_to_world = forest.resolve_to_world(sensor.mount)?;
    let origin_world = sensor_to_world.translation;

    let mut rng = stream(seed, sensor.id as u64 + 1, frame_idx as u64);
    let covariance = sensor.covariance();
    let mut detections = Vec::new();

    for (i, obj) in truths.iter().enumerate() {
        let center_sensor = world_to_sensor.apply(&obj.bbox.center);
        if !sensor.fov.contains(&center_sensor) {
            continue;
        }
        let occluders: Vec<BoundingBox3D> = truths
            .iter()
            .enumerate()
            .filter(|(j, other)| {
                *j != i && (other.bbox.center - origin_world).norm() <= sensor.fov.max_range * 2.0
            })
            .map(|(_, other)| other.bbox)
            .collect();
        if occlusion_score(&obj.bbox, &origin_world, &occluders) >= OcclusionScore::Complete {
            continue;
        }
        if rng.gen::<f64>() < sensor.p_miss {
            continue;
        }
        let mut center = center_sensor;
        for (axis, sigma) in sensor.noise.sigma_xyz.iter().enumerate() {
            if *sigma > 0.0 {
                center[axis] += Normal::new(0.0, *sigma).unwrap().sample(&mut rng);
            }
        }
        let mut orientation = world_to_sensor.rotation.compose(&obj.bbox.orientation);
        if sensor.noise.sigma_yaw > 0.0 {
            let eps = Normal::new(0.0, sensor.noise.sigma_yaw).unwrap().sample(&mut rng);
            orientation = orientation.compose(&Rotation::from_yaw(eps));
        }
        detections.push(Detection {
            bbox: BoundingBox3D::new(center, obj.bbox.dimensions, orientation, sensor.mount),
            covariance,
            sensor_id: sensor.id,
            timestamp,
            confidence: rng.gen_range(0.6..1.0),
        });
    }

    if sensor.false_alarms_per_frame > 0.0 {
        let count = Poisson::new(sensor.false_alarms_per_frame)
            .map_err(|e| SimError::InvalidConfig(format!("false alarm rate: {e}")))?
            .sample(&mut rng) as usize;
        for _ in 0..count {
            let range = rng.gen_range(1.0..=sensor.fov.max_range);
            let az = rng.gen_range(-sensor.fov.azimuth_half_angle..=sensor.fov.azimuth_half_angle);
            let el =
                rng.gen_range(-sensor.fov.elevation_half_angle..=sensor.fov.elevation_half_angle);
            let center = Vector3::new(
                range * el.cos() * az.cos(),
                range * el.cos() * az.sin(),
                range * el.sin(),
            );
            let yaw = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            detections.push(Detection {
                bbox: BoundingBox3D::new(
                    center,
                    Dimensions::new(1.5, 1.8, 4.2),
                    Rotation::from_yaw(yaw),
                    sensor.mount,
                ),
                covariance,
                sensor_id: sensor.id,
                timestamp,
                confidence: rng.gen_range(0.0..0.8),
            });
        }
    }

    Ok(detections)
}

/// Communication model between ego and infrastructure.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CommModel {
    pub range_m: f64,
    /// Delivery delay in frames; the study scope pins this to 0.
    pub latency_frames: usize,
}

impl CommModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.range_m <= 0.0 {
            return Err(SimError::InvalidConfig("comm range must be positive".into()));
        }
        Ok(())
    }
}

/// Ids of infrastructure sensors whose mount origin lies within comm range of
/// the ego position (inclusive boundary).
pub fn sensors_in_range(
    ego_position: &Vector3<f64>,
    sites: &[(u32, Vector3<f64>)],
    comm: &CommModel,
) -> Vec<u32> {
    sites
        .iter()
        .filter(|(_, p)| (p - ego_position).norm() <= comm.range_m)
        .map(|(id, _)| *id)
        .collect()
}

/// A deterministic infrastructure site: ground position plus mount rotation
/// (heading, then downward pitch).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SensorSite {
    pub position: Vector3<f64>,
    pub rotation: Rotation,
}

/// Places `count` sensors at seeded uniform ground positions, each mounted at
/// `height_m` with `pitch_rad` of downward tilt and a seeded heading.
pub fn place_infrastructure(
    count: usize,
    map_extent: f64,
    height_m: f64,
    pitch_rad: f64,
    seed: u64,
) -> Vec<SensorSite> {
    let half = map_extent * 0.5;
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, 2, i as u64);
            let position = Vector3::new(
                rng.gen_range(-half..=half),
                rng.gen_range(-half..=half),
                height_m,
            );
            let heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let rotation = Rotation::from_yaw(heading)
                .compose(&Rotation::from_axis_angle(Vector3::y(), pitch_rad));
            SensorSite { position, rotation }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TranslationOrder;

    fn world_with_sensor(pose: SensorSite) -> (FrameForest, FrameId) {
        let mut forest = FrameForest::new();
        let id = forest
            .add(
                WORLD,
                pose.position,
                pose.rotation,
                crate::geometry::Handedness::RightHanded,
                TranslationOrder::PostRotation,
            )
            .unwrap();
        (forest, id)
    }

    fn truth_at(id: u64, x: f64, y: f64) -> ObjectState {
        ObjectState {
            id,
            object_type: crate::scene::ObjectType::Car,
            bbox: BoundingBox3D::new(
                Vector3::new(x, y, 0.75),
                Dimensions::new(1.5, 1.8, 4.2),
                Rotation::from_yaw(0.2),
                WORLD,
            ),
            velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            timestamp: 0.0,
        }
    }

    fn basic_sensor(mount: FrameId) -> SensorModel {
        SensorModel {
            id: 0,
            mount,
            fov: FovSpec {
                azimuth_half_angle: std::f64::consts::PI,
                elevation_half_angle: std::f64::consts::FRAC_PI_2,
                max_range: 50.0,
            },
            rate_hz: 10.0,
            noise: NoiseModel::none(),
            p_miss: 0.0,
            false_alarms_per_frame: 0.0,
            lidar_lines: None,
        }
    }

    #[test]
    fn noiseless_detections_match_truth() {
        let (forest, mount) = world_with_sensor(SensorSite {
            position: Vector3::zeros(),
            rotation: Rotation::identity(),
        });
        let truths = vec![truth_at(1, 10.0, 0.0), truth_at(2, 0.0, 20.0)];
        let dets = sense(&basic_sensor(mount), &truths, &forest, 5, 0, 0.0).unwrap();
        assert_eq!(dets.len(), 2);
        for (det, truth) in dets.iter().zip(&truths) {
            assert!((det.bbox.center - truth.bbox.center).norm() < 1e-12);
            assert!(det.bbox.orientation.angle_to(&truth.bbox.orientation) < 1e-12);
        }
    }

    #[test]
    fn total_miss_leaves_only_clutter() {
        let (forest, mount) = world_with_sensor(SensorSite {
            position: Vector3::zeros(),
            rotation: Rotation::identity(),
        });
        let mut sensor = basic_sensor(mount);
        sensor.p_miss = 1.0;
        sensor.false_alarms_per_frame = 3.0;
        let truths = vec![truth_at(1, 10.0, 0.0)];
        let dets = sense(&sensor, &truths, &forest, 5, 0, 0.0).unwrap();
        for det in &dets {
            assert!((det.bbox.center - Vector3::new(10.0, 0.0, 0.75)).norm() > 1e-6);
        }
    }

    #[test]
    fn out_of_fov_not_detected() {
        let (forest, mount) = world_with_sensor(SensorSite {
            position: Vector3::zeros(),
            rotation: Rotation::identity(),
        });
        let mut sensor = basic_sensor(mount);
        sensor.fov.azimuth_half_angle = std::f64::consts::FRAC_PI_2;
        sensor.fov.max_range = 25.0;
        let truths = vec![truth_at(1, -10.0, 0.0), truth_at(2, 30.0, 0.0), truth_at(3, 10.0, 0.0)];
        let dets = sense(&sensor, &truths, &forest, 5, 0, 0.0).unwrap();
        assert_eq!(dets.len(), 1);
        assert!((dets[0].bbox.center - Vector3::new(10.0, 0.0, 0.75)).norm() < 1e-12);
    }

    #[test]
    fn per_sensor_streams_independent() {
        let (mut forest, mount) = world_with_sensor(SensorSite {
            position: Vector3::zeros(),
            rotation: Rotation::identity(),
        });
        let other_mount = forest
            .add_simple(WORLD, Vector3::new(5.0, 5.0, 0.0), Rotation::identity())
            .unwrap();
        let mut sensor = basic_sensor(mount);
        sensor.noise = NoiseModel::isotropic(0.3, 0.02);
        let truths = vec![truth_at(1, 10.0, 0.0), truth_at(2, 0.0, 20.0)];
        let alone = sense(&sensor, &truths, &forest, 5, 3, 0.3).unwrap();
        // Sensing with another sensor first must not change this sensor's draws.
        let mut other = basic_sensor(other_mount);
        other.id = 9;
        other.noise = NoiseModel::isotropic(0.5, 0.1);
        let _ = sense(&other, &truths, &forest, 5, 3, 0.3).unwrap();
        let again = sense(&sensor, &truths, &forest, 5, 3, 0.3).unwrap();
        assert_eq!(alone.len(), again.len());
        for (a, b) in alone.iter().zip(&again) {
            assert_eq!(a.bbox.center, b.bbox.center);
        }
    }

    #[test]
    fn comm_range_inclusive() {
        let comm = CommModel { range_m: 70.0, latency_frames: 0 };
        let sites = vec![
            (1, Vector3::new(60.0, 0.0, 15.0)),
            (2, Vector3::new(80.0, 0.0, 15.0)),
        ];
        let ego = Vector3::new(0.0, 0.0, 0.0);
        // 60 m in-range, 80 m out; heights enter the Euclidean distance.
        let in_range = sensors_in_range(&ego, &sites, &comm);
        assert_eq!(in_range, vec![1]);
        // Co-located sensor with zero-range comm is still included.
        let zero = CommModel { range_m: f64::MIN_POSITIVE, latency_frames: 0 };
        let colocated = vec![(3, ego)];
        assert_eq!(sensors_in_range(&ego, &colocated, &zero), vec![3]);
        assert!(sensors_in_range(&ego, &[], &comm).is_empty());
    }

    #[test]
    fn placement_deterministic_and_parameterized() {
        let a = place_infrastructure(40, 200.0, 15.0, 30f64.to_radians(), 9);
        let b = place_infrastructure(40, 200.0, 15.0, 30f64.to_radians(), 9);
        assert_eq!(a.len(), 40);
        for (sa, sb) in a.iter().zip(&b) {
            assert_eq!(sa.position, sb.position);
            assert_eq!(sa.rotation.wxyz(), sb.rotation.wxyz());
        }
        for site in &a {
            assert_eq!(site.position.z, 15.0);
            // Boresight pitched 30 degrees below horizontal.
            let boresight = site.rotation.apply(&Vector3::x());
            let pitch = (-boresight.z).asin();
            assert!((pitch - 30f64.to_radians()).abs() < 1e-12);
        }
        assert!(place_infrastructure(0, 200.0, 15.0, 0.5, 9).is_empty());
    }
}
