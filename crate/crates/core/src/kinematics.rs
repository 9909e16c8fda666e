//! Four-omniwheel drive kinematics.
//!
//! Wheel `i` sits at angle `φ_i` on a circle of radius `wheel_offset` around the
//! robot centre, rolling tangentially to that circle. Positive wheel speed drives
//! the body counter-clockwise. With the body velocity `(vx, vy, ω)`:
//!
//! ```text
//! w_i = (-sin φ_i · vx + cos φ_i · vy + wheel_offset · ω) / wheel_radius
//! ```
//!
//! The default layout keeps the front pair 120° apart and the rear pair 90°
//! apart, so the wheel matrix is not symmetric and forward kinematics is a
//! least-squares solve.

use nalgebra::{Matrix3x4, Matrix4x3, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

/// Time constant of the motor velocity loop as seen by the simulator.
pub const DEFAULT_TRACKING_TAU: f64 = 0.030;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("non-finite velocity component")]
    NonFinite,
    #[error("invalid drive geometry: {0}")]
    BadGeometry(&'static str),
}

/// Commanded robot motion in the robot frame: forward, left, counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyVelocity {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl BodyVelocity {
    pub const ZERO: BodyVelocity = BodyVelocity {
        vx: 0.0,
        vy: 0.0,
        omega: 0.0,
    };

    pub const fn new(vx: f64, vy: f64, omega: f64) -> Self {
        BodyVelocity { vx, vy, omega }
    }

    pub fn linear(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite() && self.omega.is_finite()
    }
}

/// Signed wheel angular velocities in rad/s, ordered front-left, front-right,
/// rear-right, rear-left.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelSpeeds(pub [f64; 4]);

impl WheelSpeeds {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|w| w.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Scale all four wheels by the same factor so none exceeds `w_max`.
    /// Uniform scaling keeps the resulting body motion direction intact.
    pub fn clamped(&self, w_max: f64) -> WheelSpeeds {
        let peak = self.max_abs();
        if peak <= w_max || peak == 0.0 {
            *self
        } else {
            let s = w_max / peak;
            WheelSpeeds(self.0.map(|w| w * s))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveGeometry {
    /// Direction from the robot centre to each wheel, from +x, in radians.
    pub wheel_angles: [f64; 4],
    pub wheel_radius: f64,
    /// Centre-to-wheel distance.
    pub wheel_offset: f64,
}

impl Default for DriveGeometry {
    fn default() -> Self {
        DriveGeometry {
            wheel_angles: [
                60f64.to_radians(),
                (-60f64).to_radians(),
                (-135f64).to_radians(),
                135f64.to_radians(),
            ],
            // 67 mm across the subwheels.
            wheel_radius: 0.0335,
            wheel_offset: 0.08,
        }
    }
}

impl DriveGeometry {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.wheel_radius > 0.0 && self.wheel_radius.is_finite()) {
            return Err(KinematicsError::BadGeometry("wheel_radius must be positive"));
        }
        if !(self.wheel_offset > 0.0 && self.wheel_offset.is_finite()) {
            return Err(KinematicsError::BadGeometry("wheel_offset must be positive"));
        }
        if self.wheel_angles.iter().any(|a| !a.is_finite()) {
            return Err(KinematicsError::BadGeometry("wheel angles must be finite"));
        }
        if self.wheel_matrix().rank(1e-9) < 3 {
            return Err(KinematicsError::BadGeometry("wheel layout cannot span body motion"));
        }
        Ok(())
    }

    /// The 4x3 map from body velocity to wheel speeds.
    pub fn wheel_matrix(&self) -> Matrix4x3<f64> {
        let r = self.wheel_radius;
        let l = self.wheel_offset;
        Matrix4x3::from_fn(|i, j| {
            let phi = self.wheel_angles[i];
            match j {
                0 => -phi.sin() / r,
                1 => phi.cos() / r,
                _ => l / r,
            }
        })
    }

    /// Moore-Penrose pseudoinverse of [`wheel_matrix`](Self::wheel_matrix).
    pub fn pseudo_inverse(&self) -> Result<Matrix3x4<f64>, KinematicsError> {
        self.wheel_matrix()
            .pseudo_inverse(1e-12)
            .map_err(|_| KinematicsError::BadGeometry("singular wheel matrix"))
    }
}

pub fn inverse_kinematics(
    v: &BodyVelocity,
    g: &DriveGeometry,
) -> Result<WheelSpeeds, KinematicsError> {
    if !v.is_finite() {
        return Err(KinematicsError::NonFinite);
    }
    let mut w = [0.0; 4];
    for (wi, phi) in w.iter_mut().zip(g.wheel_angles) {
        let (s, c) = phi.sin_cos();
        *wi = (-s * v.vx + c * v.vy + g.wheel_offset * v.omega) / g.wheel_radius;
    }
    Ok(WheelSpeeds(w))
}

/// Least-squares body velocity for the given wheel speeds; exact when the
/// wheel speeds are consistent with rigid-body motion.
pub fn forward_kinematics(
    w: &WheelSpeeds,
    g: &DriveGeometry,
) -> Result<BodyVelocity, KinematicsError> {
    if !w.is_finite() {
        return Err(KinematicsError::NonFinite);
    }
    let pinv = g.pseudo_inverse()?;
    Ok(apply_pseudo_inverse(&pinv, w))
}

/// Forward kinematics with a precomputed pseudoinverse, for hot loops.
pub fn apply_pseudo_inverse(pinv: &Matrix3x4<f64>, w: &WheelSpeeds) -> BodyVelocity {
    let b: Vector3<f64> = pinv * Vector4::from(w.0);
    BodyVelocity::new(b[0], b[1], b[2])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityLimits {
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for VelocityLimits {
    fn default() -> Self {
        VelocityLimits {
            v_max: 2.0,
            omega_max: 6.0,
        }
    }
}

/// Scale the translational part onto the `v_max` disc (direction preserved) and
/// clamp the spin rate. Non-finite commands collapse to zero.
pub fn clamp_command(v: &BodyVelocity, limits: &VelocityLimits) -> BodyVelocity {
    if !v.is_finite() {
        return BodyVelocity::ZERO;
    }
    let speed = v.vx.hypot(v.vy);
    let (vx, vy) = if speed > limits.v_max {
        let s = limits.v_max / speed;
        (v.vx * s, v.vy * s)
    } else {
        (v.vx, v.vy)
    };
    BodyVelocity::new(vx, vy, v.omega.clamp(-limits.omega_max, limits.omega_max))
}
