//! Constant-velocity Kalman filtering over box tracks.
//!
//! State vector: (x, y, z, vx, vy, vz, yaw, h, w, l). The measurement model
//! observes boxes only — (x, y, z, yaw, h, w, l); velocities are inferred.

use super::TrackingError;
use crate::scene::{Detection, ObjectType};
use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

pub type StateVector = SVector<f64, 10>;
pub type StateCovariance = SMatrix<f64, 10, 10>;
type Measurement = SVector<f64, 7>;
type MeasurementCovariance = SMatrix<f64, 7, 7>;
type ObservationMatrix = SMatrix<f64, 7, 10>;

/// State indices observed by the measurement model, in measurement order.
const OBSERVED: [usize; 7] = [0, 1, 2, 6, 7, 8, 9];

/// Condition-number bound beyond which the innovation covariance is treated
/// as singular.
const CONDITION_BOUND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

/// Per-second process noise intensities.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProcessNoise {
    pub q_pos: f64,
    pub q_vel: f64,
    pub q_yaw: f64,
    pub q_dim: f64,
}

impl Default for ProcessNoise {
    fn default() -> Self {
        ProcessNoise { q_pos: 0.01, q_vel: 0.1, q_yaw: 0.01, q_dim: 1e-4 }
    }
}

impl ProcessNoise {
    fn matrix(&self, dt: f64) -> StateCovariance {
        let mut q = StateCovariance::zeros();
        for i in 0..3 {
            q[(i, i)] = self.q_pos * dt;
            q[(i + 3, i + 3)] = self.q_vel * dt;
        }
        q[(6, 6)] = self.q_yaw * dt;
        for i in 7..10 {
            q[(i, i)] = self.q_dim * dt;
        }
        q
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Track {
    pub id: u64,
    pub state: StateVector,
    pub covariance: StateCovariance,
    pub hits: u32,
    pub consecutive_misses: u32,
    pub status: TrackStatus,
    pub object_type: ObjectType,
    pub last_update: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a % two_pi;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    } else if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

fn measurement_of(det: &Detection) -> Measurement {
    let b = &det.bbox;
    Measurement::from_column_slice(&[
        b.center.x,
        b.center.y,
        b.center.z,
        b.yaw(),
        b.dimensions.height,
        b.dimensions.width,
        b.dimensions.length,
    ])
}

/// Expands the detection's 6x6 covariance (x, y, z, yaw, vertical extent,
/// horizontal extent) to the 7-dim measurement space: height takes the
/// vertical term, width and length share the horizontal term.
fn measurement_noise_of(det: &Detection) -> MeasurementCovariance {
    let c = &det.covariance;
    let mut r = MeasurementCovariance::zeros();
    for i in 0..4 {
        for j in 0..4 {
            r[(i, j)] = c[(i, j)];
        }
    }
    r[(4, 4)] = c[(4, 4)];
    r[(5, 5)] = c[(5, 5)];
    r[(6, 6)] = c[(5, 5)];
    r
}

fn observation_matrix() -> ObservationMatrix {
    let mut h = ObservationMatrix::zeros();
    for (row, &col) in OBSERVED.iter().enumerate() {
        h[(row, col)] = 1.0;
    }
    h
}

impl Track {
    /// Spawns a tentative track from an unassigned detection. Velocity starts
    /// at zero with a wide prior.
    pub fn from_detection(id: u64, det: &Detection, object_type: ObjectType) -> Track {
        let z = measurement_of(det);
        let r = measurement_noise_of(det);
        let mut state = StateVector::zeros();
        let mut covariance = StateCovariance::zeros();
        for (row, &col) in OBSERVED.iter().enumerate() {
            state[col] = z[row];
            covariance[(col, col)] = r[(row, row)].max(1e-6);
        }
        for i in 3..6 {
            covariance[(i, i)] = 25.0; // (5 m/s)^2 velocity prior
        }
        Track {
            id,
            state,
            covariance,
            hits: 1,
            consecutive_misses: 0,
            status: TrackStatus::Tentative,
            object_type,
            last_update: det.timestamp,
        }
    }

    pub fn position(&self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.state[0], self.state[1], self.state[2])
    }

    pub fn velocity(&self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.state[3], self.state[4], self.state[5])
    }

    pub fn yaw(&self) -> f64 {
        self.state[6]
    }

    /// (height, width, length)
    pub fn dimensions(&self) -> [f64; 3] {
        [self.state[7], self.state[8], self.state[9]]
    }

    /// Constant-velocity prediction over `dt` seconds.
    pub fn predict(&mut self, dt: f64, q: &ProcessNoise) {
        debug_assert!(dt >= 0.0);
        let mut f = StateCovariance::identity();
        for i in 0..3 {
            f[(i, i + 3)] = dt;
        }
        self.state = f * self.state;
        self.covariance = f * self.covariance * f.transpose() + q.matrix(dt);
    }

    /// Kalman update against a detection, with the yaw innovation wrapped to
    /// (-pi, pi]. Joseph-form covariance update keeps the result SPD.
    pub fn update(&mut self, det: &Detection) -> Result<(), TrackingError> {
        let h = observation_matrix();
        let z = measurement_of(det);
        let r = measurement_noise_of(det);
        let mut innovation = z - h * self.state;
        innovation[3] = wrap_angle(innovation[3]);

        let s = h * self.covariance * h.transpose() + r;
        let s_sym = (s + s.transpose()) * 0.5;
        let eigen = s_sym.symmetric_eigenvalues();
        let (min_l, max_l) = (eigen.min(), eigen.max());
        if !(min_l > 0.0) || max_l / min_l > CONDITION_BOUND {
            return Err(TrackingError::SingularInnovation { track: self.id });
        }
        let chol = s_sym
            .cholesky()
            .ok_or(TrackingError::SingularInnovation { track: self.id })?;
        // K = P H' S^-1 via solving S K' = H P'.
        let kt = chol.solve(&(h * self.covariance.transpose()));
        let k = kt.transpose();

        self.state += k * innovation;
        self.state[6] = wrap_angle(self.state[6]);
        let ikh = StateCovariance::identity() - k * h;
        self.covariance = ikh * self.covariance * ikh.transpose() + k * r * k.transpose();
        self.covariance = (self.covariance + self.covariance.transpose()) * 0.5;

        self.hits += 1;
        self.consecutive_misses = 0;
        self.last_update = det.timestamp;
        Ok(())
    }
}
