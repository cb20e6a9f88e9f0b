use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Planar pose of a robot base, furniture anchor or object.
///
/// `theta` is always kept in `[-π, π)`; construction and deserialization both
/// normalize it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawPose")]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Deserialize)]
struct RawPose {
    x: f64,
    y: f64,
    #[serde(default)]
    theta: f64,
}

impl From<RawPose> for Pose2D {
    fn from(raw: RawPose) -> Self {
        Pose2D::new(raw.x, raw.y, raw.theta)
    }
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn at(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// Planar Euclidean distance, heading ignored.
    pub fn distance_to(&self, other: &Pose2D) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn heading_error(&self, other: &Pose2D) -> f64 {
        normalize_angle(other.theta - self.theta).abs()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Pose2D {
        Pose2D {
            x: self.x + dx,
            y: self.y + dy,
            theta: self.theta,
        }
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    if !angle.is_finite() {
        return angle;
    }
    let mut wrapped = (angle + PI).rem_euclid(TAU) - PI;
    // rem_euclid may round up to exactly TAU
    if wrapped >= PI {
        wrapped -= TAU;
    }
    wrapped
}
