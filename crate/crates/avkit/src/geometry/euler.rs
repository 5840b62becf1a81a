//! Euler angle conversions with explicit convention tags.
//!
//! Twelve axis orders (Tait-Bryan and proper Euler) times two composition
//! modes. Conversions go through the quaternion [`Rotation`]; extraction uses
//! the direction-cosine matrix with per-family closed forms.

use super::rotation::Rotation;
use super::GeometryError;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    fn unit(self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompositionMode {
    /// Each rotation is about the already-rotated (body) axes.
    Intrinsic,
    /// Each rotation is about the fixed (world) axes.
    Extrinsic,
}

/// One of the 12 valid axis orders plus a composition mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EulerConvention {
    axes: [Axis; 3],
    mode: CompositionMode,
}

impl EulerConvention {
    pub fn new(axes: [Axis; 3], mode: CompositionMode) -> Result<Self, GeometryError> {
        if axes[0] == axes[1] || axes[1] == axes[2] {
            return Err(GeometryError::InvalidEulerOrder { axes });
        }
        Ok(EulerConvention { axes, mode })
    }

    pub fn axes(&self) -> [Axis; 3] {
        self.axes
    }

    pub fn mode(&self) -> CompositionMode {
        self.mode
    }

    /// Intrinsic ZYX (yaw, pitch, roll) — the aerospace default.
    pub fn zyx_intrinsic() -> Self {
        EulerConvention {
            axes: [Axis::Z, Axis::Y, Axis::X],
            mode: CompositionMode::Intrinsic,
        }
    }

    /// Every valid convention: 12 axis orders x 2 modes.
    pub fn all() -> Vec<EulerConvention> {
        let axes = [Axis::X, Axis::Y, Axis::Z];
        let mut out = Vec::with_capacity(24);
        for &a in &axes {
            for &b in &axes {
                for &c in &axes {
                    if a != b && b != c {
                        for mode in [CompositionMode::Intrinsic, CompositionMode::Extrinsic] {
                            out.push(EulerConvention { axes: [a, b, c], mode });
                        }
                    }
                }
            }
        }
        out
    }

    fn is_tait_bryan(&self) -> bool {
        self.axes[0] != self.axes[2]
    }

    /// Axis order and angles rearranged into intrinsic form.
    fn intrinsic_form(&self, angles: [f64; 3]) -> ([Axis; 3], [f64; 3]) {
        match self.mode {
            CompositionMode::Intrinsic => (self.axes, angles),
            CompositionMode::Extrinsic => (
                [self.axes[2], self.axes[1], self.axes[0]],
                [angles[2], angles[1], angles[0]],
            ),
        }
    }
}

/// +1 when `(a, b, c)` is an even permutation of `(X, Y, Z)`.
fn parity(a: Axis, b: Axis, c: Axis) -> f64 {
    let (i, j, k) = (a.index(), b.index(), c.index());
    if (j + 3 - i) % 3 == 1 && (k + 3 - j) % 3 == 1 {
        1.0
    } else {
        -1.0
    }
}

pub fn euler_to_rotation(angles: [f64; 3], conv: EulerConvention) -> Rotation {
    let (axes, angles) = conv.intrinsic_form(angles);
    let r1 = Rotation::from_axis_angle(axes[0].unit(), angles[0]);
    let r2 = Rotation::from_axis_angle(axes[1].unit(), angles[1]);
    let r3 = Rotation::from_axis_angle(axes[2].unit(), angles[2]);
    r1.compose(&r2).compose(&r3)
}

/// Singularity guard: rotations closer than this to gimbal lock are rejected.
const GIMBAL_EPS: f64 = 1e-9;

pub fn rotation_to_euler(r: &Rotation, conv: EulerConvention) -> Result<[f64; 3], GeometryError> {
    let (axes, _) = conv.intrinsic_form([0.0; 3]);
    let m = r.to_matrix();
    let (a, b) = (axes[0].index(), axes[1].index());

    let intrinsic = if conv.is_tait_bryan() {
        let c = axes[2].index();
        let eps = parity(axes[0], axes[1], axes[2]);
        let s2 = (eps * m[(a, c)]).clamp(-1.0, 1.0);
        if 1.0 - s2.abs() < GIMBAL_EPS {
            // theta2 at +-pi/2: only theta1 -+ theta3 is observable. Fix
            // theta3 = 0 and recover theta1 from the remaining block.
            let t2 = std::f64::consts::FRAC_PI_2.copysign(s2);
            let t1 = (eps * m[(c, b)]).atan2(m[(b, b)]);
            let rep = from_intrinsic([t1, t2, 0.0], conv);
            return Err(GeometryError::GimbalLock { representative: rep });
        }
        let t2 = s2.asin();
        let t1 = (-eps * m[(b, c)]).atan2(m[(c, c)]);
        let t3 = (-eps * m[(a, b)]).atan2(m[(a, a)]);
        [t1, t2, t3]
    } else {
        // Proper Euler: first and third axes coincide.
        let d = 3 - a - b;
        let eps = parity(axes[0], axes[1], Axis::from_index(d));
        let c2 = m[(a, a)].clamp(-1.0, 1.0);
        if 1.0 - c2.abs() < GIMBAL_EPS {
            let t2 = if c2 > 0.0 { 0.0 } else { std::f64::consts::PI };
            let t1 = (eps * m[(d, b)]).atan2(m[(b, b)]);
            let rep = from_intrinsic([t1, t2, 0.0], conv);
            return Err(GeometryError::GimbalLock { representative: rep });
        }
        let t2 = c2.acos();
        let t1 = m[(b, a)].atan2(-eps * m[(d, a)]);
        let t3 = m[(a, b)].atan2(eps * m[(a, d)]);
        [t1, t2, t3]
    };

    Ok(match conv.mode {
        CompositionMode::Intrinsic => intrinsic,
        CompositionMode::Extrinsic => [intrinsic[2], intrinsic[1], intrinsic[0]],
    })
}

fn from_intrinsic(angles: [f64; 3], conv: EulerConvention) -> [f64; 3] {
    match conv.mode {
        CompositionMode::Intrinsic => angles,
        CompositionMode::Extrinsic => [angles[2], angles[1], angles[0]],
    }
}

impl Axis {
    fn from_index(i: usize) -> Axis {
        match i {
            0 => Axis::X,
            1 => Axis::Y,
            _ => Axis::Z,
        }
    }
}
