//! Reference frames and the parent-linked chain they form.
//!
//! A [`FrameForest`] owns every frame in a scene. Frames are immutable once
//! added, so a built forest can be shared read-only across workers. Resolution
//! walks parent links to the root, composing each node's local transform
//! according to its translation order and normalizing left-handed nodes by the
//! y-flip conjugation.

use super::rotation::Rotation;
use super::transform::Transform;
use super::GeometryError;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Handedness {
    #[serde(rename = "RH")]
    RightHanded,
    #[serde(rename = "LH")]
    LeftHanded,
}

impl Handedness {
    /// Flips the designated axis (y) when left-handed. Involution by
    /// construction: applying twice returns the input bit for bit.
    pub fn convert_vector(self, v: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Handedness::RightHanded => *v,
            Handedness::LeftHanded => Vector3::new(v.x, -v.y, v.z),
        }
    }
}

/// Whether the local translation is applied before or after the rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TranslationOrder {
    /// `x_parent = R * (x_local + Tr)`
    #[serde(rename = "pre")]
    PreRotation,
    /// `x_parent = R * x_local + Tr`
    #[serde(rename = "post")]
    PostRotation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceFrame {
    pub id: FrameId,
    #[serde(rename = "parent_id")]
    pub parent: Option<FrameId>,
    pub translation: Vector3<f64>,
    pub rotation: Rotation,
    pub handedness: Handedness,
    pub translation_order: TranslationOrder,
}

impl ReferenceFrame {
    /// The frame's local->parent rigid transform. Left-handed frames are
    /// normalized by conjugating with the y-flip, which keeps the result a
    /// proper rotation; callers feed such frames y-flipped coordinates.
    pub fn local_transform(&self, parent: FrameId) -> Transform {
        let (rot, tr) = match self.translation_order {
            TranslationOrder::PostRotation => (self.rotation, self.translation),
            TranslationOrder::PreRotation => (self.rotation, self.rotation.apply(&self.translation)),
        };
        let (rot, tr) = match self.handedness {
            Handedness::RightHanded => (rot, tr),
            Handedness::LeftHanded => {
                let m = rot.to_matrix();
                let f = nalgebra::Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
                (Rotation::from_matrix(&(f * m * f)), Handedness::LeftHanded.convert_vector(&tr))
            }
        };
        Transform::new(rot, tr, self.id, parent)
    }
}

/// All frames of one scene, rooted at a single world frame.
#[derive(Debug, Clone, Default)]
pub struct FrameForest {
    frames: Vec<ReferenceFrame>,
}

pub const WORLD: FrameId = FrameId(0);

impl FrameForest {
    /// A forest containing only the world root (identity, right-handed).
    pub fn new() -> Self {
        FrameForest {
            frames: vec![ReferenceFrame {
                id: WORLD,
                parent: None,
                translation: Vector3::zeros(),
                rotation: Rotation::identity(),
                handedness: Handedness::RightHanded,
                translation_order: TranslationOrder::PostRotation,
            }],
        }
    }

    pub fn add(
        &mut self,
        parent: FrameId,
        translation: Vector3<f64>,
        rotation: Rotation,
        handedness: Handedness,
        translation_order: TranslationOrder,
    ) -> Result<FrameId, GeometryError> {
        if self.get(parent).is_none() {
            return Err(GeometryError::OrphanFrame { frame: parent });
        }
        let id = FrameId(self.frames.len() as u64);
        self.frames.push(ReferenceFrame {
            id,
            parent: Some(parent),
            translation,
            rotation,
            handedness,
            translation_order,
        });
        Ok(id)
    }

    /// Convenience for the common case: right-handed, post-rotation.
    pub fn add_simple(
        &mut self,
        parent: FrameId,
        translation: Vector3<f64>,
        rotation: Rotation,
    ) -> Result<FrameId, GeometryError> {
        self.add(parent, translation, rotation, Handedness::RightHanded, TranslationOrder::PostRotation)
    }

    pub fn get(&self, id: FrameId) -> Option<&ReferenceFrame> {
        self.frames.iter().find(|f| f.id == id)
    }

    pub fn frames(&self) -> &[ReferenceFrame] {
        &self.frames
    }

    /// Composed frame->root transform, walking parent links.
    pub fn resolve_to_world(&self, frame: FrameId) -> Result<Transform, GeometryError> {
        let mut node = self.get(frame).ok_or(GeometryError::OrphanFrame { frame })?;
        let mut acc = Transform::identity(frame);
        let mut steps = 0usize;
        while let Some(parent_id) = node.parent {
            let parent = self
                .get(parent_id)
                .ok_or(GeometryError::OrphanFrame { frame: parent_id })?;
            acc = node.local_transform(parent_id).compose(&acc)?;
            node = parent;
            steps += 1;
            if steps > self.frames.len() {
                return Err(GeometryError::CycleDetected { frame });
            }
        }
        // Re-tag: destination is whatever root the walk ended at.
        Ok(Transform::new(acc.rotation, acc.translation, frame, node.id))
    }

    fn root_of(&self, frame: FrameId) -> Result<FrameId, GeometryError> {
        let mut node = self.get(frame).ok_or(GeometryError::OrphanFrame { frame })?;
        let mut steps = 0usize;
        while let Some(parent_id) = node.parent {
            node = self
                .get(parent_id)
                .ok_or(GeometryError::OrphanFrame { frame: parent_id })?;
            steps += 1;
            if steps > self.frames.len() {
                return Err(GeometryError::CycleDetected { frame });
            }
        }
        Ok(node.id)
    }

    /// The a->b transform via the common root.
    pub fn transform_between(&self, a: FrameId, b: FrameId) -> Result<Transform, GeometryError> {
        let (ra, rb) = (self.root_of(a)?, self.root_of(b)?);
        if ra != rb {
            return Err(GeometryError::DisjointForests { a, b });
        }
        let a_to_world = self.resolve_to_world(a)?;
        let b_to_world = self.resolve_to_world(b)?;
        b_to_world.inverse().compose(&a_to_world)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.frames).expect("frames serialize")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, GeometryError> {
        let frames: Vec<ReferenceFrame> = serde_json::from_value(value.clone())
            .map_err(|e| GeometryError::Serialization(e.to_string()))?;
        // Every referenced parent must exist.
        for f in &frames {
            if let Some(p) = f.parent {
                if !frames.iter().any(|g| g.id == p) {
                    return Err(GeometryError::OrphanFrame { frame: f.id });
                }
            }
        }
        Ok(FrameForest { frames })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn world_resolves_to_identity() {
        let forest = FrameForest::new();
        let t = forest.resolve_to_world(WORLD).unwrap();
        assert_eq!(t.translation, Vector3::zeros());
        assert_eq!(t.rotation, Rotation::identity());
    }

    #[test]
    fn single_link_chain() {
        let mut forest = FrameForest::new();
        let f = forest
            .add_simple(WORLD, Vector3::new(1.0, 2.0, 3.0), Rotation::identity())
            .unwrap();
        let t = forest.resolve_to_world(f).unwrap();
        assert_eq!(t.translation, Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(t.rotation, Rotation::identity());
    }

    #[test]
    fn transform_between_self_is_identity() {
        let mut forest = FrameForest::new();
        let f = forest
            .add_simple(WORLD, Vector3::new(4.0, 5.0, 6.0), Rotation::from_yaw(1.1))
            .unwrap();
        let t = forest.transform_between(f, f).unwrap();
        assert!(t.translation.norm() < 1e-12);
        assert!(t.rotation.angle_to(&Rotation::identity()) < 1e-12);
    }

    #[test]
    fn siblings_pure_translation() {
        let mut forest = FrameForest::new();
        let a = forest
            .add_simple(WORLD, Vector3::new(1.0, 0.0, 0.0), Rotation::identity())
            .unwrap();
        let b = forest
            .add_simple(WORLD, Vector3::new(0.0, 1.0, 0.0), Rotation::identity())
            .unwrap();
        let t = forest.transform_between(a, b).unwrap();
        assert_abs_diff_eq!(t.translation.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.translation.y, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.translation.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pre_rotation_equals_post_with_rotated_translation() {
        let mut forest = FrameForest::new();
        let rot = Rotation::from_yaw(0.9);
        let tr = Vector3::new(2.0, -1.0, 0.5);
        let pre = forest
            .add(WORLD, tr, rot, Handedness::RightHanded, TranslationOrder::PreRotation)
            .unwrap();
        let post = forest
            .add(WORLD, rot.apply(&tr), rot, Handedness::RightHanded, TranslationOrder::PostRotation)
            .unwrap();
        let tp = forest.resolve_to_world(pre).unwrap();
        let tq = forest.resolve_to_world(post).unwrap();
        assert!((tp.translation - tq.translation).norm() < 1e-12);
        assert!(tp.rotation.angle_to(&tq.rotation) < 1e-12);
    }

    #[test]
    fn cycle_detected() {
        // Hand-build a cyclic parent graph through the JSON path.
        let json = serde_json::json!([
            {"id": 0, "parent_id": null, "translation": [0.0,0.0,0.0],
             "rotation": [1.0,0.0,0.0,0.0], "handedness": "RH", "translation_order": "post"},
            {"id": 1, "parent_id": 2, "translation": [0.0,0.0,0.0],
             "rotation": [1.0,0.0,0.0,0.0], "handedness": "RH", "translation_order": "post"},
            {"id": 2, "parent_id": 1, "translation": [0.0,0.0,0.0],
             "rotation": [1.0,0.0,0.0,0.0], "handedness": "RH", "translation_order": "post"},
        ]);
        let forest = FrameForest::from_json(&json).unwrap();
        match forest.resolve_to_world(FrameId(1)) {
            Err(GeometryError::CycleDetected { .. }) => {}
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let mut forest = FrameForest::new();
        forest
            .add(
                WORLD,
                Vector3::new(1.0, 2.0, 3.0),
                Rotation::from_yaw(0.4),
                Handedness::LeftHanded,
                TranslationOrder::PreRotation,
            )
            .unwrap();
        let json = forest.to_json();
        let back = FrameForest::from_json(&json).unwrap();
        assert_eq!(back.frames().len(), 2);
        assert_eq!(back.to_json(), json);
    }
}
