//! Rigid transforms with explicit endpoint tags.
//!
//! A transform always carries which frame it maps *from* and which it maps
//! *to*; composing transforms with mismatched endpoints is an error rather
//! than a silent wrong answer.

use super::frame::FrameId;
use super::rotation::Rotation;
use super::GeometryError;
use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
    pub from: FrameId,
    pub to: FrameId,
}

impl Transform {
    pub fn identity(frame: FrameId) -> Self {
        Transform {
            rotation: Rotation::identity(),
            translation: Vector3::zeros(),
            from: frame,
            to: frame,
        }
    }

    pub fn new(rotation: Rotation, translation: Vector3<f64>, from: FrameId, to: FrameId) -> Self {
        Transform { rotation, translation, from, to }
    }

    /// Maps a point expressed in `from` coordinates into `to` coordinates.
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(p) + self.translation
    }

    /// Rotates a direction without translating it.
    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(v)
    }

    /// `outer.compose(inner)`: applies `inner` first. Requires
    /// `inner.to == outer.from`; the result maps `inner.from -> outer.to`.
    pub fn compose(&self, inner: &Transform) -> Result<Transform, GeometryError> {
        if inner.to != self.from {
            return Err(GeometryError::EndpointMismatch {
                expected: self.from,
                found: inner.to,
            });
        }
        Ok(Transform {
            rotation: self.rotation.compose(&inner.rotation),
            translation: self.rotation.apply(&inner.translation) + self.translation,
            from: inner.from,
            to: self.to,
        })
    }

    pub fn inverse(&self) -> Transform {
        let rot_inv = self.rotation.inverse();
        Transform {
            rotation: rot_inv,
            translation: -rot_inv.apply(&self.translation),
            from: self.to,
            to: self.from,
        }
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation.to_matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }
}
