//! Planar vectors, poses and rigid transforms.
//!
//! All angles are radians. The inertial frame I sits roughly at the centre
//! of the green; the ball frame B shares its orientation, so ball positions
//! are plain [`Vec2`] values.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A planar vector in metres (or metres per second for velocities).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(length: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(length * c, length * s)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Direction angle, `atan2(y, x)`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector, or `None` for a zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Planar pose `[x, y, psi]`; `psi` is kept in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Pose2D {
    pub const IDENTITY: Pose2D = Pose2D { x: 0.0, y: 0.0, psi: 0.0 };

    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi: normalize_angle(psi) }
    }

    pub fn from_parts(position: Vec2, psi: f64) -> Self {
        Self::new(position.x, position.y, psi)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Unit vector along the local x-axis.
    pub fn heading(&self) -> Vec2 {
        Vec2::from_polar(1.0, self.psi)
    }

    /// Maps a point expressed in this pose's frame into the parent frame.
    pub fn transform_point(&self, p_local: Vec2) -> Vec2 {
        p_local.rotated(self.psi) + self.position()
    }

    /// `self ∘ other`: `other` is expressed in the frame described by `self`.
    pub fn compose(&self, other: &Pose2D) -> Pose2D {
        Pose2D::from_parts(self.transform_point(other.position()), self.psi + other.psi)
    }

    pub fn inverse(&self) -> Pose2D {
        let p = (-self.position()).rotated(-self.psi);
        Pose2D::from_parts(p, -self.psi)
    }
}

/// Free-function form of [`Pose2D::transform_point`].
pub fn transform_point(pose: &Pose2D, p_local: Vec2) -> Vec2 {
    pose.transform_point(p_local)
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
