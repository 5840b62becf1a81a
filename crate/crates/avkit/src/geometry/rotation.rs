//! Canonical rotation type backed by a unit quaternion.
//!
//! Euler angles and direction-cosine matrices are boundary representations
//! only; everything internal composes quaternions. Canonicalization picks the
//! representative with `w >= 0` so that `q` and `-q` compare equal bit for
//! bit.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A 3D rotation stored as a canonical unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(UnitQuaternion<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(UnitQuaternion::identity())
    }

    /// Builds from raw quaternion components, normalizing and canonicalizing.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let q = UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z));
        Rotation(q).canonicalized()
    }

    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        let axis = nalgebra::Unit::new_normalize(axis);
        Rotation(UnitQuaternion::from_axis_angle(&axis, angle)).canonicalized()
    }

    /// Rotation by `yaw` about the +z (up) axis.
    pub fn from_yaw(yaw: f64) -> Self {
        Self::from_axis_angle(Vector3::z(), yaw)
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Rotation(UnitQuaternion::from_rotation_matrix(
            &nalgebra::Rotation3::from_matrix_unchecked(*m),
        ))
        .canonicalized()
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        self.0.to_rotation_matrix().into_inner()
    }

    /// Components in `(w, x, y, z)` order.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.0.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// `self * other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0).canonicalized()
    }

    pub fn inverse(&self) -> Rotation {
        Rotation(self.0.inverse()).canonicalized()
    }

    /// Heading about +z extracted from the rotated +x axis.
    pub fn yaw(&self) -> f64 {
        let fwd = self.apply(&Vector3::x());
        fwd.y.atan2(fwd.x)
    }

    pub fn angle_to(&self, other: &Rotation) -> f64 {
        self.0.angle_to(&other.0)
    }

    fn canonicalized(self) -> Self {
        let q = self.0.quaternion();
        let comps = [q.w, q.i, q.j, q.k];
        // First nonzero component decides the sign; w >= 0 wins most ties.
        let flip = comps
            .iter()
            .find(|c| **c != 0.0)
            .map(|c| *c < 0.0)
            .unwrap_or(false);
        if flip {
            Rotation(UnitQuaternion::new_unchecked(Quaternion::new(
                -q.w, -q.i, -q.j, -q.k,
            )))
        } else {
            self
        }
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Serialize for Rotation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.wxyz().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [w, x, y, z] = <[f64; 4]>::deserialize(deserializer)?;
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(D::Error::custom("quaternion must have nonzero finite norm"));
        }
        Ok(Rotation::from_quaternion(w, x, y, z))
    }
}
