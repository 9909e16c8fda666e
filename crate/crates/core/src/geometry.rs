//! Planar geometry shared by every other module.
//!
//! Coordinates follow the field convention used throughout the crate: origin at
//! the centre spot, +x toward the opponent goal, own goal at `x = -length / 2`.
//! Lengths are meters, angles radians.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Footprint radius of a robot. SSL robots are at most 180 mm across.
pub const ROBOT_RADIUS: f64 = 0.09;

/// Radius of a regulation golf ball.
pub const BALL_RADIUS: f64 = 0.0215;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("disc radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("invalid field dimensions: {0}")]
    BadField(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self, GeometryError> {
        let v = Vec2 { x, y };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Unit vector in the same direction, or zero for the zero vector.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            Vec2::ZERO
        }
    }

    /// Counter-clockwise rotation by `theta`.
    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Rotated by +90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn hadamard(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x * o.x, self.y * o.y)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Position plus heading; the heading is kept in (-π, π].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub position: Vec2,
    heading: f64,
}

impl Pose2 {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Pose2 {
            position,
            heading: normalize_angle(heading),
        }
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn set_heading(&mut self, heading: f64) {
        self.heading = normalize_angle(heading);
    }

    /// Express a world-frame vector in this pose's body frame.
    pub fn world_to_body(&self, v: Vec2) -> Vec2 {
        v.rotated(-self.heading)
    }

    pub fn body_to_world(&self, v: Vec2) -> Vec2 {
        v.rotated(self.heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Vec2,
    radius: f64,
}

impl Disc {
    pub fn new(center: Vec2, radius: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(Disc { center, radius })
    }

    /// A robot-sized obstacle at `center`.
    pub fn robot(center: Vec2) -> Self {
        Disc {
            center,
            radius: ROBOT_RADIUS,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Grow the radius by `margin` (a non-positive margin leaves it unchanged).
    pub fn inflated(&self, margin: f64) -> Disc {
        Disc {
            center: self.center,
            radius: self.radius + margin.max(0.0),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        point_disc_distance(p, self) < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    /// Extent along x (goal to goal).
    pub length: f64,
    /// Extent along y.
    pub width: f64,
    pub goal_width: f64,
    /// |x| of the line the goalkeeper patrols in front of each goal.
    pub defense_line_x: f64,
    /// Strip along the boundary kept free of planner milestones.
    pub boundary_margin: f64,
}

impl FieldModel {
    /// Official Division B playing area, 9 m x 6 m.
    pub fn division_b() -> Self {
        FieldModel {
            length: 9.0,
            width: 6.0,
            goal_width: 1.0,
            defense_line_x: 4.3,
            boundary_margin: 0.1,
        }
    }

    /// Reduced 5 m x 2.75 m practice field.
    pub fn practice() -> Self {
        FieldModel {
            length: 5.0,
            width: 2.75,
            goal_width: 0.8,
            defense_line_x: 2.3,
            boundary_margin: 0.1,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let all = [
            self.length,
            self.width,
            self.goal_width,
            self.defense_line_x,
            self.boundary_margin,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(GeometryError::BadField("length and width must be positive".into()));
        }
        if !(self.goal_width > 0.0 && self.goal_width < self.width) {
            return Err(GeometryError::BadField("goal width must be in (0, width)".into()));
        }
        if !(self.defense_line_x >= 0.0 && self.defense_line_x < self.length / 2.0) {
            return Err(GeometryError::BadField("defense line must lie inside the field".into()));
        }
        if !(self.boundary_margin >= 0.0
            && 2.0 * self.boundary_margin < self.length.min(self.width))
        {
            return Err(GeometryError::BadField("boundary margin too large".into()));
        }
        Ok(())
    }

    pub fn half_length(&self) -> f64 {
        self.length / 2.0
    }

    pub fn half_width(&self) -> f64 {
        self.width / 2.0
    }

    pub fn own_goal_center(&self) -> Vec2 {
        Vec2::new(-self.half_length(), 0.0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x.abs() <= self.half_length() && p.y.abs() <= self.half_width()
    }
}

/// Distance from `p` to the boundary of `d`; negative inside the disc.
pub fn point_disc_distance(p: Vec2, d: &Disc) -> f64 {
    p.distance(d.center) - d.radius
}

/// Closest point to `p` on the closed segment `[a, b]`.
pub fn closest_point_on_segment(a: Vec2, b: Vec2, p: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Minimum distance from the disc centre to the closed segment `[a, b]`,
/// minus the radius. Negative means the segment penetrates the disc.
pub fn segment_disc_distance(a: Vec2, b: Vec2, d: &Disc) -> f64 {
    // Project from whichever endpoint is nearer so the result does not depend on
    // endpoint order.
    let (a, b) = if lex_le(a, b) { (a, b) } else { (b, a) };
    let q = closest_point_on_segment(a, b, d.center);
    q.distance(d.center) - d.radius
}

fn lex_le(a: Vec2, b: Vec2) -> bool {
    (a.x, a.y) <= (b.x, b.y)
}

/// Wrap an angle into (-π, π].
pub fn normalize_angle(theta: f64) -> f64 {
    if !theta.is_finite() {
        return theta;
    }
    let mut r = theta - TAU * ((theta - PI) / TAU).ceil();
    // The closed form can land one period off when `theta` sits on a boundary.
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Clamp `p` componentwise into the field shrunk by `margin` on every side.
pub fn clamp_to_field(p: Vec2, field: &FieldModel, margin: f64) -> Vec2 {
    let hx = field.half_length() - margin;
    let hy = field.half_width() - margin;
    Vec2::new(p.x.clamp(-hx, hx), p.y.clamp(-hy, hy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(x: f64, y: f64, r: f64) -> Disc {
        Disc::new(Vec2::new(x, y), r).unwrap()
    }

    fn dense_oracle(a: Vec2, b: Vec2, d: &Disc, n: usize) -> f64 {
        (0..=n)
            .map(|i| a.lerp(b, i as f64 / n as f64).distance(d.center))
            .fold(f64::INFINITY, f64::min)
            - d.radius()
    }

    fn wrap_loop(mut t: f64) -> f64 {
        while t > PI {
            t -= TAU;
        }
        while t <= -PI {
            t += TAU;
        }
        t
    }

    #[test]
    fn segment_disc_perpendicular_foot() {
        let d = segment_disc_distance(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), &disc(1.0, 1.0, 0.5));
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_segment_inside_disc() {
        let d = segment_disc_distance(Vec2::ZERO, Vec2::ZERO, &disc(0.0, 0.0, 0.2));
        assert!((d + 0.2).abs() < 1e-15);
    }

    #[test]
    fn segment_disc_matches_dense_sampling() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        let d = disc(3.0, 4.0, 1.0);
        let oracle = dense_oracle(a, b, &d, 100_000);
        // Endpoint (1,0) is nearest: sqrt(4 + 16) - 1.
        assert!((oracle - (20f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((segment_disc_distance(a, b, &d) - oracle).abs() < 1e-6);
    }

    #[test]
    fn bad_disc_radius_rejected() {
        assert!(Disc::new(Vec2::ZERO, 0.0).is_err());
        assert!(Disc::new(Vec2::ZERO, -1.0).is_err());
        assert!(Disc::new(Vec2::new(f64::NAN, 0.0), 1.0).is_err());
    }

    #[test]
    fn normalize_angle_examples() {
        assert_eq!(normalize_angle(0.0), 0.0);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!(normalize_angle(3.0 * PI) > 0.0);
        assert_eq!(normalize_angle(-PI), PI);
        let r = normalize_angle(-7.5);
        assert!((r - wrap_loop(-7.5)).abs() < 1e-12);
        assert!((r - (-7.5 + TAU)).abs() < 1e-12);
    }

    #[test]
    fn clamp_examples() {
        let divb = FieldModel::division_b();
        assert_eq!(clamp_to_field(Vec2::ZERO, &divb, 0.1), Vec2::ZERO);
        let c = clamp_to_field(Vec2::new(10.0, 0.0), &divb, 0.1);
        assert!((c.x - 4.4).abs() < 1e-12 && c.y == 0.0);
        let c = clamp_to_field(Vec2::new(-5.0, -4.0), &FieldModel::practice(), 0.09);
        assert!((c.x + 2.41).abs() < 1e-12);
        assert!((c.y + 1.285).abs() < 1e-12);
    }

    #[test]
    fn presets_validate() {
        FieldModel::division_b().validate().unwrap();
        FieldModel::practice().validate().unwrap();
        let mut f = FieldModel::division_b();
        f.goal_width = 7.0;
        assert!(f.validate().is_err());
    }

    #[test]
    fn pose_heading_is_wrapped() {
        let p = Pose2::new(Vec2::ZERO, 3.0 * PI);
        assert!((p.heading() - PI).abs() < 1e-12);
        let v = p.world_to_body(Vec2::new(1.0, 0.0));
        assert!((v.x + 1.0).abs() < 1e-12 && v.y.abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coord() -> impl Strategy<Value = f64> {
            -10.0..10.0f64
        }

        proptest! {
            #[test]
            fn segment_distance_symmetric(ax in coord(), ay in coord(), bx in coord(), by in coord(),
                                          cx in coord(), cy in coord(), r in 0.01..3.0f64) {
                let (a, b, d) = (Vec2::new(ax, ay), Vec2::new(bx, by), disc(cx, cy, r));
                let s1 = segment_disc_distance(a, b, &d);
                let s2 = segment_disc_distance(b, a, &d);
                prop_assert!((s1 - s2).abs() <= 1e-12);
                prop_assert!(s1 <= point_disc_distance(a, &d) + 1e-12);
                prop_assert!(s1 <= point_disc_distance(b, &d) + 1e-12);
            }

            #[test]
            fn clamp_idempotent(x in -20.0..20.0f64, y in -20.0..20.0f64, m in 0.0..2.0f64) {
                let f = FieldModel::division_b();
                let once = clamp_to_field(Vec2::new(x, y), &f, m);
                prop_assert_eq!(clamp_to_field(once, &f, m), once);
                prop_assert!(once.x.abs() <= 4.5 - m && once.y.abs() <= 3.0 - m);
            }

            #[test]
            fn normalize_periodic(t in -50.0..50.0f64, k in -10i32..=10) {
                let base = normalize_angle(t);
                prop_assert!(base > -PI && base <= PI);
                let shifted = normalize_angle(t + TAU * k as f64);
                let diff = normalize_angle(base - shifted).abs();
                prop_assert!(diff <= 1e-9);
            }
        }
    }
}
