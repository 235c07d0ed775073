//! Rigid-body primitives: Cartesian vectors, unit quaternions, and
//! right-handed frames calibrated from three taught points.

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Degeneracy threshold for frame calibration, in millimetres.
/// Well below robot repeatability, well above double-precision noise.
pub const DEGENERACY_EPS: f64 = 1e-6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    /// The calibration points are collinear or coincident.
    #[error("calibration points are collinear or coincident")]
    DegenerateFrame,
    /// The rotation columns are not orthonormal and right-handed.
    #[error("rotation is not an orthonormal right-handed basis")]
    InvalidRotation,
}

/// A 3-component Cartesian vector. Millimetres when it represents a
/// position, dimensionless when it represents a direction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        debug_assert!(
            x.is_finite() && y.is_finite() && z.is_finite(),
            "vector components must be finite"
        );
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for a near-zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n < DEGENERACY_EPS {
            None
        } else {
            Some(self / n)
        }
    }

    pub fn distance_to(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// End-effector orientation as a unit quaternion, scalar-first.
///
/// Constructors renormalize, so a stored quaternion always has unit norm.
/// Components that are already unit to within 1e-12 are kept bit-exact,
/// which keeps serialized orientations stable across a read/write cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    pub fn identity() -> Self {
        Self {
            w: 1.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    /// Builds a unit quaternion from raw components, renormalizing when
    /// the norm deviates from 1 by more than 1e-12.
    ///
    /// Panics if the components are non-finite or the norm is near zero;
    /// callers that accept external data must validate first.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        let norm_sq = w * w + x * x + y * y + z * z;
        assert!(
            norm_sq.is_finite() && norm_sq > 1e-24,
            "quaternion must be finite and non-zero"
        );
        if (norm_sq - 1.0).abs() <= 1e-12 {
            Self { w, x, y, z }
        } else {
            let n = norm_sq.sqrt();
            Self {
                w: w / n,
                x: x / n,
                y: y / n,
                z: z / n,
            }
        }
    }

    /// Rotation of `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let unit = axis.normalized().expect("rotation axis must be non-zero");
        let half = angle * 0.5;
        let s = half.sin();
        Self::new(half.cos(), unit.x * s, unit.y * s, unit.z * s)
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Components in scalar-first order `[w, x, y, z]`.
    pub fn components(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// 4-vector dot product; `cos` of half the rotation angle between
    /// the two orientations, up to sign.
    pub fn dot(&self, other: &UnitQuaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Same orientation with all components negated.
    pub fn negated(&self) -> UnitQuaternion {
        Self {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Rotation angle in radians between two orientations, in [0, pi].
    ///
    /// Uses the chord length of the aligned quaternions, which stays
    /// well-conditioned for small angles where `acos` of the dot does not.
    pub fn angle_to(&self, other: &UnitQuaternion) -> f64 {
        let aligned = if self.dot(other) < 0.0 {
            other.negated()
        } else {
            *other
        };
        let chord = ((aligned.w - self.w).powi(2)
            + (aligned.x - self.x).powi(2)
            + (aligned.y - self.y).powi(2)
            + (aligned.z - self.z).powi(2))
        .sqrt();
        4.0 * (chord / 2.0).clamp(0.0, 1.0).asin()
    }
}

/// A position paired with an orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion,
}

impl Pose {
    pub fn new(position: Vec3, orientation: UnitQuaternion) -> Self {
        Self {
            position,
            orientation,
        }
    }
}

/// Homogeneous rigid transform: an orthonormal right-handed rotation
/// stored as three column axes, plus a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    x_axis: Vec3,
    y_axis: Vec3,
    z_axis: Vec3,
    translation: Vec3,
}

impl FrameTransform {
    pub fn identity() -> Self {
        Self {
            x_axis: Vec3::new(1.0, 0.0, 0.0),
            y_axis: Vec3::new(0.0, 1.0, 0.0),
            z_axis: Vec3::new(0.0, 0.0, 1.0),
            translation: Vec3::ZERO,
        }
    }

    /// Builds a transform from rotation columns and a translation,
    /// rejecting bases that are not orthonormal right-handed within 1e-9.
    pub fn from_axes(
        x_axis: Vec3,
        y_axis: Vec3,
        z_axis: Vec3,
        translation: Vec3,
    ) -> Result<Self, GeometryError> {
        const TOL: f64 = 1e-9;
        let unit = |v: Vec3| (v.norm() - 1.0).abs() <= TOL;
        let orthogonal = x_axis.dot(y_axis).abs() <= TOL
            && x_axis.dot(z_axis).abs() <= TOL
            && y_axis.dot(z_axis).abs() <= TOL;
        let det = x_axis.dot(y_axis.cross(z_axis));
        if !(unit(x_axis) && unit(y_axis) && unit(z_axis) && orthogonal)
            || (det - 1.0).abs() > TOL
            || !translation.is_finite()
        {
            return Err(GeometryError::InvalidRotation);
        }
        Ok(Self {
            x_axis,
            y_axis,
            z_axis,
            translation,
        })
    }

    pub fn x_axis(&self) -> Vec3 {
        self.x_axis
    }

    pub fn y_axis(&self) -> Vec3 {
        self.y_axis
    }

    pub fn z_axis(&self) -> Vec3 {
        self.z_axis
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    /// Maps a point through the transform: `rotation * p + translation`.
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.x_axis * p.x + self.y_axis * p.y + self.z_axis * p.z + self.translation
    }

    /// Rotates a direction without translating it.
    pub fn transform_direction(&self, v: Vec3) -> Vec3 {
        self.x_axis * v.x + self.y_axis * v.y + self.z_axis * v.z
    }

    /// Inverse transform: rotation transposed, translation `-R^T * t`.
    pub fn inverse(&self) -> FrameTransform {
        let x_axis = Vec3::new(self.x_axis.x, self.y_axis.x, self.z_axis.x);
        let y_axis = Vec3::new(self.x_axis.y, self.y_axis.y, self.z_axis.y);
        let z_axis = Vec3::new(self.x_axis.z, self.y_axis.z, self.z_axis.z);
        let translation = -(x_axis * self.translation.x
            + y_axis * self.translation.y
            + z_axis * self.translation.z);
        FrameTransform {
            x_axis,
            y_axis,
            z_axis,
            translation,
        }
    }

    /// Composition `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &FrameTransform) -> FrameTransform {
        FrameTransform {
            x_axis: self.transform_direction(other.x_axis),
            y_axis: self.transform_direction(other.y_axis),
            z_axis: self.transform_direction(other.z_axis),
            translation: self.transform_point(other.translation),
        }
    }
}

/// Calibrates a frame from three taught points: `a` is the origin, `b`
/// lies on the +x axis, and `c` lies in the positive xOy half-plane.
///
/// The rotation columns are built from the normalized `ab`, `ab x ac`,
/// and the completing cross product, so the result is always a
/// right-handed orthonormal basis. The returned transform maps
/// frame-local coordinates to the coordinates `a`, `b`, `c` were given
/// in; use [`FrameTransform::inverse`] to express points in the frame.
pub fn frame_from_three_points(a: Vec3, b: Vec3, c: Vec3) -> Result<FrameTransform, GeometryError> {
    let ab = b - a;
    let ac = c - a;
    if ab.norm() <= DEGENERACY_EPS || ac.norm() <= DEGENERACY_EPS {
        return Err(GeometryError::DegenerateFrame);
    }
    let normal = ab.cross(ac);
    if normal.norm() <= DEGENERACY_EPS {
        return Err(GeometryError::DegenerateFrame);
    }
    let x_axis = ab.normalized().ok_or(GeometryError::DegenerateFrame)?;
    let z_axis = normal.normalized().ok_or(GeometryError::DegenerateFrame)?;
    let y_axis = z_axis.cross(x_axis);
    Ok(FrameTransform {
        x_axis,
        y_axis,
        z_axis,
        translation: a,
    })
}
