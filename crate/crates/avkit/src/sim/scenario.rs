//! Deterministic synthetic world generation.
//!
//! Everything is a pure function of the scenario seed: spawn poses, motion
//! kinds, and per-frame ground truth. Objects move on the ground plane with
//! piecewise constant-velocity, coordinated-turn, or stationary motion and
//! reflect off the map boundary.

use super::rng::stream;
use super::SimError;
use crate::geometry::Rotation;
use crate::scene::{BoundingBox3D, Dimensions, ObjectState, ObjectType};
use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fractions of each motion kind among spawned objects.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MotionMix {
    pub constant_velocity: f64,
    pub coordinated_turn: f64,
    pub stationary: f64,
}

impl Default for MotionMix {
    fn default() -> Self {
        MotionMix { constant_velocity: 0.5, coordinated_turn: 0.3, stationary: 0.2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Square map side, meters.
    pub map_extent: f64,
    pub num_objects: usize,
    /// Object speeds drawn uniformly from `[min, max]` m/s.
    pub speed_range: (f64, f64),
    pub motion_mix: MotionMix,
    /// Number of simulated frames.
    pub duration_frames: usize,
    pub frame_rate_hz: f64,
    /// Ego drives a constant-velocity loop at this speed.
    pub ego_speed: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            map_extent: 200.0,
            num_objects: 30,
            speed_range: (2.0, 10.0),
            motion_mix: MotionMix::default(),
            duration_frames: 100,
            frame_rate_hz: 10.0,
            ego_speed: 5.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let m = self.motion_mix;
        let total = m.constant_velocity + m.coordinated_turn + m.stationary;
        if (total - 1.0).abs() > 1e-9 {
            return Err(SimError::InvalidConfig(format!(
                "motion mix fractions sum to {total}, expected 1"
            )));
        }
        if m.constant_velocity < 0.0 || m.coordinated_turn < 0.0 || m.stationary < 0.0 {
            return Err(SimError::InvalidConfig("motion mix fractions must be non-negative".into()));
        }
        if self.frame_rate_hz <= 0.0 {
            return Err(SimError::InvalidConfig("frame rate must be positive".into()));
        }
        if self.map_extent <= 0.0 {
            return Err(SimError::InvalidConfig("map extent must be positive".into()));
        }
        if self.speed_range.0 < 0.0 || self.speed_range.1 < self.speed_range.0 {
            return Err(SimError::InvalidConfig("speed range must satisfy 0 <= min <= max".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.frame_rate_hz
    }
}

/// A world pose: position plus orientation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub rotation: Rotation,
}

/// Per-frame ground truth for one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioTruth {
    /// `frames[f]` lists every object's state at frame `f`, in the world frame.
    pub frames: Vec<Vec<ObjectState>>,
    /// Ego pose per frame.
    pub ego: Vec<Pose>,
    pub frame_rate_hz: f64,
}

impl ScenarioTruth {
    pub fn timestamp(&self, frame: usize) -> f64 {
        frame as f64 / self.frame_rate_hz
    }
}

#[derive(Debug, Clone, Copy)]
enum MotionKind {
    ConstantVelocity,
    CoordinatedTurn { yaw_rate: f64 },
    Stationary,
}

struct Mover {
    id: u64,
    position: Vector3<f64>,
    heading: f64,
    speed: f64,
    kind: MotionKind,
    dims: Dimensions,
}

impl Mover {
    fn state(&self, object_type: ObjectType, timestamp: f64) -> ObjectState {
        let velocity = Vector3::new(
            self.speed * self.heading.cos(),
            self.speed * self.heading.sin(),
            0.0,
        );
        let yaw_rate = match self.kind {
            MotionKind::CoordinatedTurn { yaw_rate } => yaw_rate,
            _ => 0.0,
        };
        ObjectState {
            id: self.id,
            object_type,
            bbox: BoundingBox3D::new(
                self.position,
                self.dims,
                Rotation::from_yaw(self.heading),
                crate::geometry::WORLD,
            ),
            velocity,
            acceleration: Vector3::zeros(),
            angular_velocity: Vector3::new(0.0, 0.0, yaw_rate),
            timestamp,
        }
    }

    fn step(&mut self, dt: f64, half_extent: f64) {
        match self.kind {
            MotionKind::Stationary => return,
            MotionKind::ConstantVelocity => {}
            MotionKind::CoordinatedTurn { yaw_rate } => {
                self.heading += yaw_rate * dt;
            }
        }
        self.position.x += self.speed * self.heading.cos() * dt;
        self.position.y += self.speed * self.heading.sin() * dt;
        // Reflect off the map boundary so density stays constant.
        let (sin, cos) = self.heading.sin_cos();
        let (mut vx, mut vy) = (cos, sin);
        if self.position.x.abs() > half_extent {
            self.position.x = self.position.x.clamp(-half_extent, half_extent);
            vx = -vx;
        }
        if self.position.y.abs() > half_extent {
            self.position.y = self.position.y.clamp(-half_extent, half_extent);
            vy = -vy;
        }
        if (vx, vy) != (cos, sin) {
            self.heading = vy.atan2(vx);
        }
    }
}

/// Generates the full ground-truth trajectory set for a scenario.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<ScenarioTruth, SimError> {
    cfg.validate()?;
    let half = cfg.map_extent * 0.5;
    let dt = cfg.dt();

    let mut movers: Vec<Mover> = (0..cfg.num_objects)
        .map(|i| {
            let mut rng = stream(cfg.seed, 0, i as u64);
            let position = Vector3::new(
                rng.gen_range(-half..=half),
                rng.gen_range(-half..=half),
                0.75,
            );
            let heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let speed = if cfg.speed_range.1 > cfg.speed_range.0 {
                rng.gen_range(cfg.speed_range.0..=cfg.speed_range.1)
            } else {
                cfg.speed_range.0
            };
            let mix = cfg.motion_mix;
            let draw: f64 = rng.gen();
            let kind = if draw < mix.constant_velocity {
                MotionKind::ConstantVelocity
            } else if draw < mix.constant_velocity + mix.coordinated_turn {
                let rate = rng.gen_range(0.05..0.3) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                MotionKind::CoordinatedTurn { yaw_rate: rate }
            } else {
                MotionKind::Stationary
            };
            let speed = if matches!(kind, MotionKind::Stationary) { 0.0 } else { speed };
            Mover {
                id: i as u64 + 1,
                position,
                heading,
                speed,
                kind,
                dims: Dimensions::new(1.5, 1.8, 4.2),
            }
        })
        .collect();

    // Ego: constant-velocity loop from the map center, seeded heading.
    let mut ego_rng = stream(cfg.seed, 1, u64::MAX);
    let mut ego_heading: f64 = ego_rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let mut ego_position = Vector3::new(0.0, 0.0, 0.75);

    let mut frames = Vec::with_capacity(cfg.duration_frames);
    let mut ego = Vec::with_capacity(cfg.duration_frames);
    for f in 0..cfg.duration_frames {
        let ts = f as f64 / cfg.frame_rate_hz;
        frames.push(movers.iter().map(|m| m.state(ObjectType::Car, ts)).collect());
        ego.push(Pose {
            position: ego_position,
            rotation: Rotation::from_yaw(ego_heading),
        });
        for m in &mut movers {
            m.step(dt, half);
        }
        ego_position.x += cfg.ego_speed * ego_heading.cos() * dt;
        ego_position.y += cfg.ego_speed * ego_heading.sin() * dt;
        if ego_position.x.abs() > half || ego_position.y.abs() > half {
            ego_position.x = ego_position.x.clamp(-half, half);
            ego_position.y = ego_position.y.clamp(-half, half);
            ego_heading += std::f64::consts::FRAC_PI_2;
        }
    }

    Ok(ScenarioTruth { frames, ego, frame_rate_hz: cfg.frame_rate_hz })
}
