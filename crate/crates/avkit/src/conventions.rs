//! Source profiles encoding per-dataset conventions and lossless adapters
//! into/out of the canonical internal representation (FLU axes, box-center
//! origin, quaternion rotation).
//!
//! Profiles are data, not code: the bundled registry ships as JSON and new
//! sources need no rebuild.

use crate::geometry::{FrameId, Rotation};
use crate::scene::{BoundingBox3D, Dimensions, ObjectState, ObjectType};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ConventionError {
    #[error("profile {profile} expects {expected} rotation, record carries {found}")]
    ProfileMismatch {
        profile: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("rotation not representable in profile {profile}: off-vertical by {residual} rad")]
    Unrepresentable { profile: String, residual: f64 },
    #[error("unknown profile {0}")]
    UnknownProfile(String),
    #[error("profile registry: {0}")]
    Registry(String),
}

/// Axes layout of a source, as a signed permutation from canonical FLU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxesConvention {
    /// right, down, forward (camera-style)
    #[serde(rename = "RDF")]
    Rdf,
    /// forward, left, up (canonical)
    #[serde(rename = "FLU")]
    Flu,
    /// forward, right, up (left-handed)
    #[serde(rename = "FRU")]
    Fru,
    /// BEV forward-left with implied up
    #[serde(rename = "FL(U)")]
    FlU,
}

impl AxesConvention {
    /// Matrix `C` with `p_flu = C * p_src`. Entries in {-1, 0, 1}; det is +1
    /// for right-handed sources and -1 for the left-handed FRU.
    pub fn to_canonical(self) -> Matrix3<f64> {
        match self {
            AxesConvention::Rdf => Matrix3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0),
            AxesConvention::Flu | AxesConvention::FlU => Matrix3::identity(),
            AxesConvention::Fru => Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)),
        }
    }

    /// The source's vertical (up) axis expressed in source coordinates.
    pub fn up_axis(self) -> Vector3<f64> {
        self.to_canonical().transpose() * Vector3::z()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EgoOrigin {
    None,
    Camera0,
    GPRearAxle,
    EgoCenter,
    GPEgoCenter,
    BEVEgoCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectOrigin {
    BoxBottom,
    BoxCenter,
    BEVCenter,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationEncoding {
    Euler1D,
    Euler3D,
    EulerFull,
    #[serde(rename = "DCM")]
    Dcm,
    Quaternion,
}

/// One row of the source-convention table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceProfile {
    pub name: String,
    pub vehicle_frame: AxesConvention,
    pub ego_origin: EgoOrigin,
    pub object_origin: ObjectOrigin,
    pub rotation_encoding: RotationEncoding,
    pub keyframe_rate_hz: Option<f64>,
}

/// Rotation payload of a raw record, tagged by encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawRotation {
    /// Yaw about the source's vertical axis.
    Euler1d(f64),
    /// Intrinsic Z-Y-X (yaw, pitch, roll) in source axes.
    Euler3d([f64; 3]),
    /// Intrinsic Z-Y-X in source axes; distinct tag because the source
    /// documents full 3D Euler without arity.
    EulerFull([f64; 3]),
    Dcm([[f64; 3]; 3]),
    /// (w, x, y, z)
    Quaternion([f64; 4]),
}

impl RawRotation {
    fn kind(&self) -> &'static str {
        match self {
            RawRotation::Euler1d(_) => "Euler1D",
            RawRotation::Euler3d(_) => "Euler3D",
            RawRotation::EulerFull(_) => "EulerFull",
            RawRotation::Dcm(_) => "DCM",
            RawRotation::Quaternion(_) => "Quaternion",
        }
    }

    fn matches(&self, enc: RotationEncoding) -> bool {
        matches!(
            (self, enc),
            (RawRotation::Euler1d(_), RotationEncoding::Euler1D)
                | (RawRotation::Euler3d(_), RotationEncoding::Euler3D)
                | (RawRotation::EulerFull(_), RotationEncoding::EulerFull)
                | (RawRotation::Dcm(_), RotationEncoding::Dcm)
                | (RawRotation::Quaternion(_), RotationEncoding::Quaternion)
        )
    }
}

/// A source-convention object record, prior to canonicalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawObjectRecord {
    pub id: u64,
    pub object_type: ObjectType,
    /// Origin per the profile's object_origin, in source axes.
    pub position: [f64; 3],
    /// (height, width, length) meters.
    pub dimensions: [f64; 3],
    pub rotation: RawRotation,
    pub timestamp: f64,
}

fn encoding_name(enc: RotationEncoding) -> &'static str {
    match enc {
        RotationEncoding::Euler1D => "Euler1D",
        RotationEncoding::Euler3D => "Euler3D",
        RotationEncoding::EulerFull => "EulerFull",
        RotationEncoding::Dcm => "DCM",
        RotationEncoding::Quaternion => "Quaternion",
    }
}

fn zyx_to_matrix(angles: [f64; 3]) -> Matrix3<f64> {
    use crate::geometry::{euler_to_rotation, EulerConvention};
    euler_to_rotation(angles, EulerConvention::zyx_intrinsic()).to_matrix()
}

fn matrix_to_zyx(m: &Matrix3<f64>) -> [f64; 3] {
    use crate::geometry::{rotation_to_euler, EulerConvention, GeometryError};
    match rotation_to_euler(&Rotation::from_matrix(m), EulerConvention::zyx_intrinsic()) {
        Ok(a) => a,
        // At the singularity the representative reproduces the rotation
        // exactly, so the round trip stays lossless.
        Err(GeometryError::GimbalLock { representative }) => representative,
        Err(_) => unreachable!("zyx extraction only fails at gimbal lock"),
    }
}

fn decode_rotation(raw: &RawRotation, conv: AxesConvention) -> Matrix3<f64> {
    match raw {
        RawRotation::Euler1d(yaw) => {
            Rotation::from_axis_angle(conv.up_axis(), *yaw).to_matrix()
        }
        RawRotation::Euler3d(a) | RawRotation::EulerFull(a) => zyx_to_matrix(*a),
        RawRotation::Dcm(rows) => Matrix3::from_fn(|i, j| rows[i][j]),
        RawRotation::Quaternion([w, x, y, z]) => {
            Rotation::from_quaternion(*w, *x, *y, *z).to_matrix()
        }
    }
}

/// Converts a raw record into the canonical representation: FLU axes,
/// box-center origin, quaternion rotation, attached to `frame`.
pub fn ingest_object(
    raw: &RawObjectRecord,
    profile: &SourceProfile,
    frame: FrameId,
) -> Result<ObjectState, ConventionError> {
    if !raw.rotation.matches(profile.rotation_encoding) {
        return Err(ConventionError::ProfileMismatch {
            profile: profile.name.clone(),
            expected: encoding_name(profile.rotation_encoding),
            found: raw.rotation.kind(),
        });
    }
    let c = profile.vehicle_frame.to_canonical();
    let r_src = decode_rotation(&raw.rotation, profile.vehicle_frame);
    let rotation = Rotation::from_matrix(&(c * r_src * c.transpose()));
    let position = c * Vector3::new(raw.position[0], raw.position[1], raw.position[2]);
    let dims = Dimensions::new(raw.dimensions[0], raw.dimensions[1], raw.dimensions[2]);

    let center = match profile.object_origin {
        ObjectOrigin::BoxBottom => {
            // Lift from the bottom face to the center along the box's up axis.
            position + rotation.apply(&Vector3::z()) * (dims.height * 0.5)
        }
        ObjectOrigin::BoxCenter | ObjectOrigin::BEVCenter | ObjectOrigin::None => position,
    };

    Ok(ObjectState {
        id: raw.id,
        object_type: raw.object_type,
        bbox: BoundingBox3D::new(center, dims, rotation, frame),
        velocity: Vector3::zeros(),
        acceleration: Vector3::zeros(),
        angular_velocity: Vector3::zeros(),
        timestamp: raw.timestamp,
    })
}

/// Residual beyond which a rotation cannot be squeezed into a 1D encoding.
const EULER1D_TOL: f64 = 1e-9;

/// Exports a canonical object back into a source-convention record.
/// `ingest_object(export_object(x))` is the identity on the record's
/// geometric content for every representable `x`.
pub fn export_object(
    obj: &ObjectState,
    profile: &SourceProfile,
) -> Result<RawObjectRecord, ConventionError> {
    let c = profile.vehicle_frame.to_canonical();
    let dims = obj.bbox.dimensions;

    let center_src = match profile.object_origin {
        ObjectOrigin::BoxBottom => {
            let bottom =
                obj.bbox.center - obj.bbox.orientation.apply(&Vector3::z()) * (dims.height * 0.5);
            c.transpose() * bottom
        }
        ObjectOrigin::BoxCenter | ObjectOrigin::None => c.transpose() * obj.bbox.center,
        ObjectOrigin::BEVCenter => {
            let mut p = c.transpose() * obj.bbox.center;
            // Implied-up sources carry no height information.
            p.z = 0.0;
            p
        }
    };

    let r_src = c.transpose() * obj.bbox.orientation.to_matrix() * c;
    let rotation = match profile.rotation_encoding {
        RotationEncoding::Euler1D => {
            let up = profile.vehicle_frame.up_axis();
            let yaw = yaw_about(&r_src, &up);
            let reconstructed = Rotation::from_axis_angle(up, yaw).to_matrix();
            let residual = Rotation::from_matrix(&r_src).angle_to(&Rotation::from_matrix(&reconstructed));
            if residual > EULER1D_TOL {
                return Err(ConventionError::Unrepresentable {
                    profile: profile.name.clone(),
                    residual,
                });
            }
            RawRotation::Euler1d(yaw)
        }
        RotationEncoding::Euler3D => RawRotation::Euler3d(matrix_to_zyx(&r_src)),
        RotationEncoding::EulerFull => RawRotation::EulerFull(matrix_to_zyx(&r_src)),
        RotationEncoding::Dcm => {
            RawRotation::Dcm([0, 1, 2].map(|i| [0, 1, 2].map(|j| r_src[(i, j)])))
        }
        RotationEncoding::Quaternion => {
            RawRotation::Quaternion(Rotation::from_matrix(&r_src).wxyz())
        }
    };

    Ok(RawObjectRecord {
        id: obj.id,
        object_type: obj.object_type,
        position: [center_src.x, center_src.y, center_src.z],
        dimensions: [dims.height, dims.width, dims.length],
        rotation,
        timestamp: obj.timestamp,
    })
}

/// Signed angle of the rotation about the given vertical axis, measured by
/// how a perpendicular reference vector is carried around it.
fn yaw_about(r: &Matrix3<f64>, up: &Vector3<f64>) -> f64 {
    let reference = if up.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let perp = (reference - up * reference.dot(up)).normalize();
    let rotated = r * perp;
    let rotated_in_plane = rotated - up * rotated.dot(up);
    let sin = up.dot(&perp.cross(&rotated_in_plane));
    let cos = perp.dot(&rotated_in_plane);
    sin.atan2(cos)
}

const BUNDLED_PROFILES: &str = include_str!("../data/profiles.json");

/// Loads the bundled profile registry.
pub fn bundled_profiles() -> Vec<SourceProfile> {
    serde_json::from_str(BUNDLED_PROFILES).expect("bundled registry parses")
}

/// Parses a profile registry from JSON text.
pub fn parse_profiles(json: &str) -> Result<Vec<SourceProfile>, ConventionError> {
    serde_json::from_str(json).map_err(|e| ConventionError::Registry(e.to_string()))
}

pub fn find_profile<'a>(
    profiles: &'a [SourceProfile],
    name: &str,
) -> Result<&'a SourceProfile, ConventionError> {
    profiles
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ConventionError::UnknownProfile(name.to_string()))
}
