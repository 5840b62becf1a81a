//! Deterministic synthetic world generator and sensor/communication
//! simulator, reproducing the collaborative (V2I) experiment structure at
//! desk scale.

pub mod rng;
mod scenario;
mod sensor;

pub use rng::derive_seed;
pub use scenario::{generate_scenario, MotionMix, Pose, ScenarioConfig, ScenarioTruth};
pub use sensor::{
    place_infrastructure, sense, sensors_in_range, CommModel, NoiseModel, SensorModel, SensorSite,
};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}
